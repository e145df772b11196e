#include "linkpoison/attack/attack.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "linkpoison/errors.hpp"
#include "linkpoison/metrics/metrics.hpp"
#include "linkpoison/tensor/checkpoint.hpp"

namespace linkpoison::attack {

using surrogate::ParamVars;
using tensor::Tape;
using tensor::Var;

std::string_view scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::kUniform: return "uniform";
    case WeightScheme::kMagnitude: return "magnitude";
    case WeightScheme::kPerformance: return "performance";
    case WeightScheme::kLinear: return "linear";
  }
  return "?";
}

WeightScheme parse_scheme(std::string_view name) {
  for (auto s : {WeightScheme::kUniform, WeightScheme::kMagnitude, WeightScheme::kPerformance,
                 WeightScheme::kLinear})
    if (scheme_name(s) == name) return s;
  throw ConfigError("unknown weight scheme '" + std::string(name) + "'");
}

std::string_view mode_name(Mode m) {
  return m == Mode::kFullUnroll ? "full-unroll" : "first-order";
}

Mode parse_mode(std::string_view name) {
  if (name == "first-order") return Mode::kFirstOrder;
  if (name == "full-unroll") return Mode::kFullUnroll;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string_view target_name(Target t) {
  return t == Target::kAllEntries ? "all-entries" : "validation-links";
}

Target parse_target(std::string_view name) {
  if (name == "validation-links") return Target::kValidationLinks;
  if (name == "all-entries") return Target::kAllEntries;
  throw ConfigError("unknown attack target '" + std::string(name) + "'");
}

double epoch_weight(WeightScheme scheme, std::size_t i, std::size_t k, const Matrix& grad,
                    double val_ap) {
  switch (scheme) {
    case WeightScheme::kUniform:
      return 1.0;
    case WeightScheme::kMagnitude:
      return tensor::frobenius(grad);
    case WeightScheme::kPerformance:
      if (!(val_ap >= 0.0 && val_ap <= 1.0)) throw DomainError("epoch_weight: AP outside [0,1]");
      return val_ap;
    case WeightScheme::kLinear:
      if (i < 1 || i > k) throw DomainError("epoch_weight: epoch outside 1..k");
      return static_cast<double>(i) / static_cast<double>(k);
  }
  return 0.0;
}

std::vector<std::size_t> validation_indices(const graph::LinkSplit& split, std::size_t n) {
  std::vector<std::size_t> idx;
  idx.reserve(split.val_pos.size() + split.val_neg.size());
  for (const auto* list : {&split.val_pos, &split.val_neg})
    for (const auto& e : *list) idx.push_back(e.u * n + e.v);
  return idx;
}

void mask_gradient(Matrix& grad, const graph::LinkSplit& split) {
  for (std::size_t i = 0; i < grad.rows(); ++i) grad(i, i) = 0.0;
  for (const auto& e : split.held_out()) grad(e.u, e.v) = grad(e.v, e.u) = 0.0;
}

namespace {

struct Setup {
  Matrix train_adj;
  Matrix x;
  double pos_weight;
  Matrix labels;                                 // attack-loss targets
  std::shared_ptr<const tensor::IndexList> restrict;  // null for all entries
  std::vector<std::size_t> val_idx;
  std::vector<int> val_rel;
};

Setup prepare(const graph::Graph& g, const graph::LinkSplit& split, const AttackConfig& cfg) {
  Setup s;
  const std::size_t n = g.num_nodes();
  s.train_adj = graph::training_graph(g, split).adjacency();
  s.x = surrogate::input_features(g);
  s.pos_weight = surrogate::positive_class_weight(s.train_adj);
  s.val_idx = validation_indices(split, n);
  for (std::size_t flat : s.val_idx) s.val_rel.push_back(g.adjacency()[flat] != 0.0);
  if (cfg.target == Target::kValidationLinks) {
    if (s.val_idx.empty()) throw ConfigError("attack: validation-links target needs validation links");
    s.labels = g.adjacency();
    s.restrict = std::make_shared<const tensor::IndexList>(s.val_idx);
  } else {
    s.labels = s.train_adj;
  }
  return s;
}

double validation_ap(const Setup& s, const Matrix& a_hat) {
  if (s.val_idx.empty()) return 0.0;
  std::vector<double> scores;
  scores.reserve(s.val_idx.size());
  for (std::size_t flat : s.val_idx) scores.push_back(a_hat[flat]);
  return metrics::average_precision(scores, s.val_rel);
}

// Attack-loss gradient at fixed parameters, used for the magnitude weight.
Matrix first_order_gradient(const Setup& s, const surrogate::VgaeParams& params,
                            const std::shared_ptr<const Matrix>& noise) {
  Tape tape;
  Var a = tape.leaf(s.train_adj);
  ParamVars p = surrogate::to_leaves(tape, params, false);
  auto f = surrogate::forward(a, tape.constant(s.x), p, noise, s.pos_weight);
  Var attack = surrogate::weighted_bce(f.a_hat, tape.constant(s.labels), s.pos_weight, s.restrict);
  return tape.backward(attack, std::array{a})[a];
}

void check_finite(double v, std::size_t epoch, const char* what) {
  if (!std::isfinite(v))
    throw NumericError(std::string("attack: non-finite ") + what + " at epoch " +
                       std::to_string(epoch));
}

MetaGradient run_first_order(const Setup& s, const AttackConfig& cfg) {
  const std::size_t n = s.train_adj.rows();
  surrogate::VgaeParams params = surrogate::init_params(s.x.cols(), cfg.dims, cfg.seed);
  tensor::Optimizer opt(cfg.optimizer, cfg.lr);
  MetaGradient mg;
  mg.value = Matrix(n, n);
  for (std::size_t i = 1; i <= cfg.epochs; ++i) {
    Tape tape;
    Var a = tape.leaf(s.train_adj);
    ParamVars p = surrogate::to_leaves(tape, params);
    auto noise = surrogate::epoch_noise(cfg.seed, i - 1, n, cfg.dims.latent);
    auto f = surrogate::forward(a, tape.constant(s.x), p, noise, s.pos_weight);
    Var attack = surrogate::weighted_bce(f.a_hat, tape.constant(s.labels), s.pos_weight, s.restrict);

    EpochRecord rec{i, 0.0, attack.value().item(), f.loss.value().item(),
                    validation_ap(s, f.a_hat.value())};
    check_finite(rec.train_loss, i, "training loss");
    Matrix grad = tape.backward(attack, std::array{a})[a];
    rec.weight = epoch_weight(cfg.scheme, i, cfg.epochs, grad, rec.val_ap);
    for (std::size_t t = 0; t < grad.size(); ++t) mg.value[t] += rec.weight * grad[t];
    mg.accumulated_loss += rec.weight * rec.attack_loss;
    check_finite(mg.accumulated_loss, i, "accumulated attack loss");
    mg.epochs.push_back(rec);

    std::array<Var, 3> wrt{p.w0, p.w_mu, p.w_logvar};
    auto grads = tape.backward(f.loss, wrt);
    std::array<Matrix*, 3> targets{&params.w0, &params.w_mu, &params.w_logvar};
    std::array<Matrix, 3> gs{grads[p.w0], grads[p.w_mu], grads[p.w_logvar]};
    opt.step(targets, gs);
  }
  return mg;
}

MetaGradient run_full_unroll(const Setup& s, const AttackConfig& cfg) {
  const std::size_t n = s.train_adj.rows();
  Tape tape;
  Var a = tape.leaf(s.train_adj);
  Var x = tape.constant(s.x);
  Var labels = tape.constant(s.labels);
  ParamVars p = surrogate::to_leaves(tape, surrogate::init_params(s.x.cols(), cfg.dims, cfg.seed));
  Var accumulated;
  MetaGradient mg;
  for (std::size_t i = 1; i <= cfg.epochs; ++i) {
    auto noise = surrogate::epoch_noise(cfg.seed, i - 1, n, cfg.dims.latent);
    auto f = surrogate::forward(a, x, p, noise, s.pos_weight);
    Var attack = surrogate::weighted_bce(f.a_hat, labels, s.pos_weight, s.restrict);

    EpochRecord rec{i, 0.0, attack.value().item(), f.loss.value().item(),
                    validation_ap(s, f.a_hat.value())};
    check_finite(rec.train_loss, i, "training loss");
    Matrix grad;
    if (cfg.scheme == WeightScheme::kMagnitude)
      grad = first_order_gradient(s, surrogate::values_of(p), noise);
    rec.weight = epoch_weight(cfg.scheme, i, cfg.epochs, grad, rec.val_ap);
    Var term = tensor::scale(attack, rec.weight);
    accumulated = accumulated.valid() ? tensor::add(accumulated, term) : term;
    check_finite(accumulated.value().item(), i, "accumulated attack loss");
    mg.epochs.push_back(rec);

    // The update is recorded on the tape, so later epochs see the adjacency
    // through the trained parameters as well as through the forward pass.
    std::array<Var, 3> wrt{p.w0, p.w_mu, p.w_logvar};
    auto g = tape.grad(f.loss, wrt);
    p = {tensor::sub(p.w0, tensor::scale(g[0], cfg.lr)),
         tensor::sub(p.w_mu, tensor::scale(g[1], cfg.lr)),
         tensor::sub(p.w_logvar, tensor::scale(g[2], cfg.lr))};
  }
  mg.accumulated_loss = accumulated.value().item();
  mg.value = tape.backward(accumulated, std::array{a})[a];
  return mg;
}

}  // namespace

MetaGradient run_attack(const graph::Graph& g, const graph::LinkSplit& split,
                        const AttackConfig& cfg) {
  if (cfg.epochs == 0) throw ConfigError("attack: epochs must be at least 1");
  if (cfg.mode == Mode::kFullUnroll) {
    if (cfg.optimizer != tensor::OptimizerKind::kGradientDescent)
      throw ConfigError("attack: full-unroll mode supports plain gradient descent only");
    if (g.num_nodes() > cfg.max_unroll_nodes)
      throw ConfigError("attack: full-unroll on " + std::to_string(g.num_nodes()) +
                        " nodes exceeds the cap of " + std::to_string(cfg.max_unroll_nodes) +
                        "; use first-order mode");
  }
  const Setup s = prepare(g, split, cfg);
  MetaGradient mg = cfg.mode == Mode::kFullUnroll ? run_full_unroll(s, cfg) : run_first_order(s, cfg);
  if (!mg.value.all_finite()) throw NumericError("attack: non-finite meta-gradient");
  if (cfg.mask) mask_gradient(mg.value, split);
  return mg;
}

std::string config_json(const AttackConfig& cfg) {
  nlohmann::ordered_json j;
  j["epochs"] = cfg.epochs;
  j["scheme"] = scheme_name(cfg.scheme);
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["target"] = target_name(cfg.target);
  j["lr"] = cfg.lr;
  j["optimizer"] = tensor::optimizer_name(cfg.optimizer);
  j["hidden"] = cfg.dims.hidden;
  j["latent"] = cfg.dims.latent;
  j["max_unroll_nodes"] = cfg.max_unroll_nodes;
  j["mask"] = cfg.mask;
  return j.dump();
}

void export_meta_gradient(const MetaGradient& mg, const AttackConfig& cfg,
                          const std::filesystem::path& stem) {
  auto bin = stem;
  bin += ".bin";
  auto json_path = stem;
  json_path += ".json";
  tensor::write_matrix_binary(mg.value, bin);
  nlohmann::ordered_json j;
  j["rows"] = mg.value.rows();
  j["cols"] = mg.value.cols();
  j["config"] = nlohmann::ordered_json::parse(config_json(cfg));
  j["accumulated_loss"] = mg.accumulated_loss;
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : mg.epochs)
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"weight", e.weight},
                           {"attack_loss", e.attack_loss},
                           {"train_loss", e.train_loss},
                           {"val_ap", e.val_ap}});
  std::ofstream out(json_path);
  if (!out) throw Error("cannot write " + json_path.string());
  out << j.dump(2) << '\n';
}

Matrix load_meta_gradient(const std::filesystem::path& stem) {
  auto json_path = stem;
  json_path += ".json";
  auto bin = stem;
  bin += ".bin";
  std::ifstream in(json_path);
  if (!in) throw ParseError("cannot open " + json_path.string());
  try {
    auto j = nlohmann::json::parse(in);
    return tensor::read_matrix_binary(bin, j.at("rows"), j.at("cols"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path.string() + ": " + e.what());
  }
}

}  // namespace linkpoison::attack
