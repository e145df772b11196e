#include "linkpoison/surrogate/vgae.hpp"

#include <cmath>
#include <random>

#include "linkpoison/errors.hpp"
#include "linkpoison/tensor/checkpoint.hpp"

namespace linkpoison::surrogate {

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-r, r);
  Matrix m(fan_in, fan_out);
  for (double& v : m.data()) v = u(rng);
  return m;
}

}  // namespace

VgaeParams init_params(std::size_t input_dim, VgaeDims dims, std::uint64_t seed) {
  if (input_dim == 0 || dims.hidden == 0 || dims.latent == 0)
    throw ShapeError("init_params: zero dimension");
  std::mt19937_64 rng(seed);
  VgaeParams p;
  p.w0 = glorot(input_dim, dims.hidden, rng);
  p.w_mu = glorot(dims.hidden, dims.latent, rng);
  p.w_logvar = glorot(dims.hidden, dims.latent, rng);
  return p;
}

ParamVars to_leaves(Tape& tape, const VgaeParams& p, bool requires_grad) {
  return {tape.leaf(p.w0, requires_grad), tape.leaf(p.w_mu, requires_grad),
          tape.leaf(p.w_logvar, requires_grad)};
}

VgaeParams values_of(const ParamVars& p) {
  return {p.w0.value(), p.w_mu.value(), p.w_logvar.value()};
}

Var normalize_adjacency(const Var& a) {
  if (a.rows() != a.cols()) throw ShapeError("normalize_adjacency: adjacency must be square");
  const std::size_t n = a.rows();
  Var with_loops = tensor::add(a, a.tape().constant(Matrix::identity(n)));
  Var d = tensor::pow(tensor::row_sum(with_loops), -0.5);
  Var left = tensor::mul(tensor::broadcast_col(d, n), with_loops);
  return tensor::mul(left, tensor::broadcast_row(tensor::transpose(d), n));
}

Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("normalize_adjacency: adjacency must be square");
  const std::size_t n = a.rows();
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 1.0;
    for (std::size_t j = 0; j < n; ++j) d += a(i, j);
    dinv[i] = std::pow(d, -0.5);
  }
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = dinv[i] * (a(i, j) + (i == j ? 1.0 : 0.0)) * dinv[j];
  return out;
}

Encoding encode(const Var& a_norm, const Var& x, const ParamVars& p,
                std::shared_ptr<const Matrix> noise) {
  Var h = tensor::relu(tensor::matmul(a_norm, tensor::matmul(x, p.w0)));
  Var mu = tensor::matmul(a_norm, tensor::matmul(h, p.w_mu));
  Var logvar = tensor::matmul(a_norm, tensor::matmul(h, p.w_logvar));
  if (!noise || !noise->same_shape(mu.value()))
    throw ShapeError("encode: noise must be " + mu.value().shape_string());
  Var z = tensor::add(mu, tensor::mul_const(tensor::exp(tensor::scale(logvar, 0.5)), noise));
  return {z, mu, logvar};
}

Var decode(const Var& z) { return tensor::sigmoid(tensor::matmul(z, z, false, true)); }

Var kl_divergence(const Var& mu, const Var& logvar) {
  const double n = static_cast<double>(mu.rows());
  Var inner = tensor::sub(tensor::sub(tensor::add_scalar(logvar, 1.0), tensor::mul(mu, mu)),
                          tensor::exp(logvar));
  return tensor::scale(tensor::sum(inner), -0.5 / n);
}

double positive_class_weight(const Matrix& adjacency) {
  double total = 0.0;
  for (double v : adjacency.data()) total += v;
  if (total <= 0.0) throw DomainError("positive_class_weight: adjacency has no edges");
  const double n2 = static_cast<double>(adjacency.rows()) * static_cast<double>(adjacency.cols());
  return (n2 - total) / total;
}

Var weighted_bce(const Var& a_hat, const Var& target, double pos_weight,
                 std::shared_ptr<const IndexList> restrict) {
  if (!a_hat.value().same_shape(target.value()))
    throw ShapeError("weighted_bce: prediction " + a_hat.value().shape_string() +
                     " vs target " + target.value().shape_string());
  Var p = a_hat;
  Var y = target;
  if (restrict) {
    if (restrict->empty()) throw DomainError("weighted_bce: empty restriction set");
    p = tensor::gather(p, restrict);
    y = tensor::gather(y, restrict);
  }
  p = tensor::clamp(p, kProbClip, 1.0 - kProbClip);
  Var pos = tensor::mul(y, tensor::log(p));
  Var neg = tensor::mul(tensor::add_scalar(tensor::scale(y, -1.0), 1.0),
                        tensor::log(tensor::add_scalar(tensor::scale(p, -1.0), 1.0)));
  Var total = tensor::add(tensor::scale(tensor::sum(pos), pos_weight), tensor::sum(neg));
  return tensor::scale(total, -1.0);
}

Forward forward(const Var& a, const Var& x, const ParamVars& p,
                std::shared_ptr<const Matrix> noise, double pos_weight) {
  Forward f;
  f.a_norm = normalize_adjacency(a);
  f.enc = encode(f.a_norm, x, p, std::move(noise));
  f.a_hat = decode(f.enc.z);
  f.bce = weighted_bce(f.a_hat, a, pos_weight);
  f.kl = kl_divergence(f.enc.mu, f.enc.logvar);
  f.loss = tensor::add(f.bce, f.kl);
  return f;
}

std::shared_ptr<const Matrix> epoch_noise(std::uint64_t seed, std::size_t epoch, std::size_t n,
                                          std::size_t latent) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto m = std::make_shared<Matrix>(n, latent);
  for (double& v : m->data()) v = normal(rng);
  return m;
}

Matrix input_features(const graph::Graph& g) {
  if (g.features()) return *g.features();
  return Matrix::identity(g.num_nodes());
}

Matrix embed(const VgaeParams& p, const Matrix& a_norm, const Matrix& x) {
  Matrix h = tensor::relu(tensor::matmul(a_norm, tensor::matmul(x, p.w0)));
  return tensor::matmul(a_norm, tensor::matmul(h, p.w_mu));
}

VgaeTrainer::VgaeTrainer(const graph::Graph& g, TrainOptions opts, std::uint64_t seed)
    : adjacency_(g.adjacency()),
      a_norm_(normalize_adjacency(g.adjacency())),
      x_(input_features(g)),
      opts_(opts),
      seed_(seed),
      pos_weight_(positive_class_weight(g.adjacency())),
      params_(init_params(x_.cols(), opts.dims, seed)),
      optimizer_(opts.optimizer, opts.lr) {}

VgaeTrainer::Step VgaeTrainer::step() {
  Tape tape;
  Var a = tape.constant(adjacency_);
  Var x = tape.constant(x_);
  ParamVars p = to_leaves(tape, params_);
  auto noise = epoch_noise(seed_, epoch_, adjacency_.rows(), opts_.dims.latent);
  // The normalized adjacency is a constant here, so skip rebuilding it.
  Var a_norm = tape.constant(a_norm_);
  Encoding enc = encode(a_norm, x, p, noise);
  Var bce = weighted_bce(decode(enc.z), a, pos_weight_);
  Var kl = kl_divergence(enc.mu, enc.logvar);
  Var loss = tensor::add(bce, kl);
  const double value = loss.value().item();
  if (!std::isfinite(value))
    throw NumericError("VGAE training diverged at epoch " + std::to_string(epoch_));

  std::array<Var, 3> wrt{p.w0, p.w_mu, p.w_logvar};
  auto grads = tape.backward(loss, wrt);
  std::array<Matrix*, 3> targets{&params_.w0, &params_.w_mu, &params_.w_logvar};
  std::array<Matrix, 3> g{grads[p.w0], grads[p.w_mu], grads[p.w_logvar]};
  optimizer_.step(targets, g);
  ++epoch_;
  return {value, bce.value().item(), kl.value().item()};
}

void save_params(const VgaeParams& p, std::uint64_t seed, std::size_t epoch,
                 const std::filesystem::path& path) {
  tensor::save_checkpoint({"vgae", seed, epoch, {{"w0", p.w0}, {"w_mu", p.w_mu}, {"w_logvar", p.w_logvar}}},
                          path);
}

VgaeParams load_params(const std::filesystem::path& path) {
  auto ckpt = tensor::load_checkpoint(path);
  if (ckpt.kind != "vgae") throw ParseError(path.string() + ": not a VGAE checkpoint");
  return {ckpt.get("w0"), ckpt.get("w_mu"), ckpt.get("w_logvar")};
}

}  // namespace linkpoison::surrogate
