#include "linkpoison/victims/victims.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "linkpoison/errors.hpp"
#include "linkpoison/surrogate/vgae.hpp"
#include "linkpoison/tensor/optim.hpp"

namespace linkpoison::victims {

using tensor::IndexList;
using tensor::Tape;

std::string_view victim_name(VictimKind kind) {
  switch (kind) {
    case VictimKind::kVgae: return "vgae";
    case VictimKind::kGat: return "gat";
    case VictimKind::kLightGcn: return "lightgcn";
  }
  return "?";
}

VictimKind parse_victim(std::string_view name) {
  for (auto k : {VictimKind::kVgae, VictimKind::kGat, VictimKind::kLightGcn})
    if (victim_name(k) == name) return k;
  throw ConfigError("unknown victim '" + std::string(name) + "'");
}

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-r, r);
  Matrix m(fan_in, fan_out);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Flat indices of every entry except the held-out pairs (both orientations).
std::shared_ptr<const IndexList> supervised_entries(std::size_t n, const graph::LinkSplit& split,
                                                    const VictimOptions& opts) {
  std::vector<char> skip(n * n, 0);
  for (const Edge& e : split.held_out()) skip[e.u * n + e.v] = skip[e.v * n + e.u] = 1;
  auto idx = std::make_shared<IndexList>();
  idx->reserve(n * n);
  for (std::size_t f = 0; f < n * n; ++f)
    if (!skip[f]) idx->push_back(f);
  if (opts.observe)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!skip[i * n + j]) opts.observe(i, j);
  return idx;
}

void check_loss(double v, const char* model, std::size_t epoch) {
  if (!std::isfinite(v))
    throw NumericError(std::string(model) + " training diverged at epoch " + std::to_string(epoch));
}

void optimizer_step(tensor::Optimizer& opt, const Tape& tape, const Var& loss,
                    std::vector<Var> vars, std::vector<Matrix*> targets) {
  auto grads = tape.backward(loss, vars);
  std::vector<Matrix> gs;
  gs.reserve(vars.size());
  for (const Var& v : vars) gs.push_back(grads[v]);
  opt.step(targets, gs);
}

TrainedVictim train_vgae(const Graph& train, const graph::LinkSplit& split,
                         const VictimOptions& opts, std::uint64_t seed) {
  const std::size_t n = train.num_nodes();
  const Matrix& adj = train.adjacency();
  const Matrix a_norm = surrogate::normalize_adjacency(adj);
  const Matrix x = surrogate::input_features(train);
  const double w = surrogate::positive_class_weight(adj);
  const surrogate::VgaeDims dims{opts.hidden, opts.out};
  auto entries = supervised_entries(n, split, opts);
  surrogate::VgaeParams params = surrogate::init_params(x.cols(), dims, seed);
  tensor::Optimizer opt(tensor::OptimizerKind::kAdam, opts.lr);
  TrainedVictim m;
  m.kind = VictimKind::kVgae;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    Tape tape;
    auto p = surrogate::to_leaves(tape, params);
    auto enc = surrogate::encode(tape.constant(a_norm), tape.constant(x), p,
                                 surrogate::epoch_noise(seed, e, n, dims.latent));
    Var loss = tensor::add(
        surrogate::weighted_bce(surrogate::decode(enc.z), tape.constant(adj), w, entries),
        surrogate::kl_divergence(enc.mu, enc.logvar));
    m.losses.push_back(loss.value().item());
    check_loss(m.losses.back(), "vgae", e);
    optimizer_step(opt, tape, loss, {p.w0, p.w_mu, p.w_logvar},
                   {&params.w0, &params.w_mu, &params.w_logvar});
  }
  m.embeddings = surrogate::embed(params, a_norm, x);
  m.params = {"victim-vgae", seed, opts.epochs,
              {{"w0", params.w0}, {"w_mu", params.w_mu}, {"w_logvar", params.w_logvar}}};
  return m;
}

struct GatParams {
  Matrix w1, a1_src, a1_dst, w2, a2_src, a2_dst;
};

TrainedVictim train_gat(const Graph& train, const graph::LinkSplit& split,
                        const VictimOptions& opts, std::uint64_t seed) {
  const std::size_t n = train.num_nodes();
  const Matrix& adj = train.adjacency();
  const Matrix& x = *train.features();
  auto mask = std::make_shared<Matrix>(tensor::add(adj, Matrix::identity(n)));
  const double w = surrogate::positive_class_weight(adj);
  auto entries = supervised_entries(n, split, opts);

  std::mt19937_64 rng(seed);
  GatParams p;
  p.w1 = glorot(x.cols(), opts.hidden, rng);
  p.a1_src = glorot(opts.hidden, 1, rng);
  p.a1_dst = glorot(opts.hidden, 1, rng);
  p.w2 = glorot(opts.hidden, opts.out, rng);
  p.a2_src = glorot(opts.out, 1, rng);
  p.a2_dst = glorot(opts.out, 1, rng);
  std::vector<Matrix*> targets{&p.w1, &p.a1_src, &p.a1_dst, &p.w2, &p.a2_src, &p.a2_dst};

  auto forward = [&](Tape& tape, std::vector<Var>& vars) {
    for (Matrix* t : targets) vars.push_back(tape.leaf(*t));
    Var h1 = gat_layer(tape.constant(x), mask, {vars[0], vars[1], vars[2]}, true, opts.leaky_slope).out;
    return gat_layer(h1, mask, {vars[3], vars[4], vars[5]}, false, opts.leaky_slope).out;
  };

  tensor::Optimizer opt(tensor::OptimizerKind::kAdam, opts.lr);
  TrainedVictim m;
  m.kind = VictimKind::kGat;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    Tape tape;
    std::vector<Var> vars;
    Var z = forward(tape, vars);
    Var loss = surrogate::weighted_bce(surrogate::decode(z), tape.constant(adj), w, entries);
    m.losses.push_back(loss.value().item());
    check_loss(m.losses.back(), "gat", e);
    optimizer_step(opt, tape, loss, vars, targets);
  }
  Tape tape;
  std::vector<Var> vars;
  m.embeddings = forward(tape, vars).value();
  m.params = {"victim-gat", seed, opts.epochs,
              {{"w1", p.w1}, {"a1_src", p.a1_src}, {"a1_dst", p.a1_dst},
               {"w2", p.w2}, {"a2_src", p.a2_src}, {"a2_dst", p.a2_dst}}};
  return m;
}

TrainedVictim train_lightgcn(const Graph& train, const graph::LinkSplit& split,
                             const VictimOptions& opts, std::uint64_t seed) {
  const std::size_t n = train.num_nodes();
  const auto [users, items] = *train.bipartite();
  std::set<Edge> held;
  for (const Edge& e : split.held_out()) held.insert(e);
  const auto pos = train.edges();  // (user, item) since users have smaller ids
  if (pos.empty()) throw DomainError("lightgcn: no training interactions");
  auto norm = std::make_shared<const Matrix>(lightgcn_normalized(train));

  std::mt19937_64 init(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  Matrix emb(n, opts.embedding);
  for (double& v : emb.data()) v = normal(init);

  tensor::Optimizer opt(tensor::OptimizerKind::kAdam, opts.lr);
  TrainedVictim m;
  m.kind = VictimKind::kLightGcn;
  std::uniform_int_distribution<std::size_t> any_item(users, users + items - 1);
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(e), 0x62707200u};
    std::mt19937_64 rng(seq);
    auto u_idx = std::make_shared<IndexList>();
    auto i_idx = std::make_shared<IndexList>();
    auto j_idx = std::make_shared<IndexList>();
    for (const Edge& ui : pos) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        const std::size_t j = any_item(rng);
        if (train.has_edge(ui.u, j) || held.contains(Edge::canonical(ui.u, j))) continue;
        u_idx->push_back(ui.u);
        i_idx->push_back(ui.v);
        j_idx->push_back(j);
        if (opts.observe) {
          opts.observe(ui.u, ui.v);
          opts.observe(ui.u, j);
        }
        break;
      }
    }
    if (u_idx->empty()) throw DomainError("lightgcn: no negative items could be sampled");

    Tape tape;
    Var e0 = tape.leaf(emb);
    Var layer = e0;
    Var total = e0;
    for (std::size_t l = 0; l < opts.layers; ++l) {
      layer = tensor::matmul(tape.constant(*norm), layer);
      total = tensor::add(total, layer);
    }
    Var final_emb = tensor::scale(total, 1.0 / static_cast<double>(opts.layers + 1));
    Var fu = tensor::gather_rows(final_emb, u_idx);
    Var diff = tensor::row_sum(
        tensor::mul(fu, tensor::sub(tensor::gather_rows(final_emb, i_idx),
                                    tensor::gather_rows(final_emb, j_idx))));
    Var log_sig = tensor::log(tensor::clamp(tensor::sigmoid(diff), 1e-12, 1.0));
    const double t = static_cast<double>(u_idx->size());
    Var loss = tensor::add(tensor::scale(tensor::sum(log_sig), -1.0 / t),
                           tensor::scale(tensor::sum(tensor::mul(e0, e0)), opts.l2 / static_cast<double>(n)));
    m.losses.push_back(loss.value().item());
    check_loss(m.losses.back(), "lightgcn", e);
    optimizer_step(opt, tape, loss, {e0}, {&emb});
  }
  m.embeddings = lightgcn_propagate(emb, train, opts.layers);
  m.params = {"victim-lightgcn", seed, opts.epochs, {{"embedding", emb}}};
  return m;
}

}  // namespace

TrainedVictim train_victim(VictimKind kind, const Graph& g, const graph::LinkSplit& split,
                           const VictimOptions& opts, std::uint64_t seed) {
  if (kind == VictimKind::kLightGcn && !g.bipartite())
    throw ConfigError("lightgcn needs a bipartite user-item graph");
  if (kind == VictimKind::kGat && !g.features())
    throw ConfigError("gat needs node features");
  const Graph train = graph::training_graph(g, split);
  switch (kind) {
    case VictimKind::kVgae: return train_vgae(train, split, opts, seed);
    case VictimKind::kGat: return train_gat(train, split, opts, seed);
    case VictimKind::kLightGcn: return train_lightgcn(train, split, opts, seed);
  }
  throw ConfigError("unknown victim kind");
}

double predict_link(const TrainedVictim& m, std::size_t i, std::size_t j) {
  const std::size_t n = m.embeddings.rows();
  if (i >= n || j >= n)
    throw DomainError("predict_link: node id out of range (" + std::to_string(std::max(i, j)) +
                      " >= " + std::to_string(n) + ")");
  double dot = 0.0;
  const auto zi = m.embeddings.row(i);
  const auto zj = m.embeddings.row(j);
  for (std::size_t c = 0; c < zi.size(); ++c) dot += zi[c] * zj[c];
  if (m.kind == VictimKind::kLightGcn) return dot;
  return 1.0 / (1.0 + std::exp(-dot));
}

std::vector<double> predict_links(const TrainedVictim& m, std::span<const Edge> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const Edge& e : pairs) out.push_back(predict_link(m, e.u, e.v));
  return out;
}

void save_predictions(const TrainedVictim& m, std::span<const Edge> pairs,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  out << "i,j,score\n";
  for (const Edge& e : pairs) out << e.u << ',' << e.v << ',' << predict_link(m, e.u, e.v) << '\n';
}

GatOutput gat_layer(const Var& h, const std::shared_ptr<const Matrix>& mask,
                    const GatLayerVars& p, bool elu, double slope) {
  const std::size_t n = h.rows();
  Var wh = tensor::matmul(h, p.w);
  Var s = tensor::matmul(wh, p.a_src);
  Var t = tensor::matmul(wh, p.a_dst);
  Var logits = tensor::leaky_relu(
      tensor::add(tensor::broadcast_col(s, n), tensor::broadcast_row(tensor::transpose(t), n)),
      slope);
  Var alpha = tensor::masked_row_softmax(logits, mask);
  Var out = tensor::matmul(alpha, wh);
  return {alpha, elu ? tensor::elu(out) : out};
}

Matrix lightgcn_normalized(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto deg = g.degrees();
  Matrix out(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (g.has_edge(u, v))
        out(u, v) = 1.0 / (std::sqrt(static_cast<double>(deg[u])) *
                           std::sqrt(static_cast<double>(deg[v])));
  return out;
}

Matrix lightgcn_propagate(const Matrix& e0, const Graph& g, std::size_t layers) {
  const std::size_t n = g.num_nodes();
  if (e0.rows() != n) throw ShapeError("lightgcn_propagate: embedding rows must equal node count");
  const auto nbrs = g.neighbors();
  const std::size_t d = e0.cols();
  Matrix layer = e0;
  Matrix total = e0;
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix next(n, d);
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v : nbrs[u]) {
        const double c = 1.0 / (std::sqrt(static_cast<double>(nbrs[u].size())) *
                                std::sqrt(static_cast<double>(nbrs[v].size())));
        for (std::size_t k = 0; k < d; ++k) next(u, k) += c * layer(v, k);
      }
    layer = std::move(next);
    for (std::size_t f = 0; f < total.size(); ++f) total[f] += layer[f];
  }
  for (double& v : total.data()) v /= static_cast<double>(layers + 1);
  return total;
}

double evaluate(const TrainedVictim& m, const Graph& clean, const graph::LinkSplit& split,
                metrics::MetricKind metric, std::size_t k) {
  using metrics::MetricKind;
  if (metric == MetricKind::kRocAuc || metric == MetricKind::kAveragePrecision) {
    std::vector<double> scores = predict_links(m, split.test_pos);
    auto neg = predict_links(m, split.test_neg);
    scores.insert(scores.end(), neg.begin(), neg.end());
    std::vector<int> rel(split.test_pos.size(), 1);
    rel.resize(scores.size(), 0);
    return metric == MetricKind::kRocAuc ? metrics::roc_auc(scores, rel)
                                         : metrics::average_precision(scores, rel);
  }
  const std::size_t n = clean.num_nodes();
  std::vector<std::vector<std::size_t>> relevant(n);
  for (const Edge& e : split.test_pos) {
    relevant[e.u].push_back(e.v);
    if (!clean.bipartite()) relevant[e.v].push_back(e.u);
  }
  std::set<Edge> known(split.train_pos.begin(), split.train_pos.end());
  known.insert(split.val_pos.begin(), split.val_pos.end());
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (relevant[u].empty()) continue;
    std::vector<double> scores;
    std::vector<int> rel;
    const std::set<std::size_t> targets(relevant[u].begin(), relevant[u].end());
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u || !clean.allows_pair(u, v) || known.contains(Edge::canonical(u, v))) continue;
      scores.push_back(predict_link(m, u, v));
      rel.push_back(targets.contains(v) ? 1 : 0);
    }
    total += metric == MetricKind::kNdcg ? metrics::ndcg_at_k(scores, rel, k)
                                         : metrics::recall_at_k(scores, rel, k);
    ++counted;
  }
  if (counted == 0) throw DomainError("evaluate: no test positives to rank");
  return total / static_cast<double>(counted);
}

}  // namespace linkpoison::victims
