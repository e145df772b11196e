#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>

#include "linkpoison/graph/graph.hpp"
#include "linkpoison/tensor/optim.hpp"
#include "linkpoison/tensor/tape.hpp"

namespace linkpoison::surrogate {

using tensor::IndexList;
using tensor::Matrix;
using tensor::Tape;
using tensor::Var;

struct VgaeDims {
  std::size_t hidden = 32;
  std::size_t latent = 16;
};

/// Shared first layer W0 (d x hidden) and the two heads (hidden x latent).
struct VgaeParams {
  Matrix w0;
  Matrix w_mu;
  Matrix w_logvar;

  friend bool operator==(const VgaeParams&, const VgaeParams&) = default;
};

/// Glorot-uniform initialization from `seed`.
VgaeParams init_params(std::size_t input_dim, VgaeDims dims, std::uint64_t seed);

/// The same three parameters living on a tape.
struct ParamVars {
  Var w0;
  Var w_mu;
  Var w_logvar;
};

ParamVars to_leaves(Tape& tape, const VgaeParams& p, bool requires_grad = true);
VgaeParams values_of(const ParamVars& p);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Var normalize_adjacency(const Var& a);
Matrix normalize_adjacency(const Matrix& a);

struct Encoding {
  Var z;
  Var mu;
  Var logvar;
};

/// Two-layer GCN encoder with ReLU after the shared layer and the
/// reparameterized sample z = mu + exp(logvar / 2) * noise.
Encoding encode(const Var& a_norm, const Var& x, const ParamVars& p,
                std::shared_ptr<const Matrix> noise);

/// sigmoid(Z Z^T).
Var decode(const Var& z);

/// Mean over nodes of the KL divergence from N(mu, exp(logvar)) to N(0, I).
Var kl_divergence(const Var& mu, const Var& logvar);

/// (N^2 - sum A) / sum A. Throws DomainError when A has no edges.
double positive_class_weight(const Matrix& adjacency);

/// Sum of -w y ln(p) - (1 - y) ln(1 - p) with p clipped to [1e-7, 1 - 1e-7].
/// With `restrict`, only the listed flat (row-major) entries are summed.
Var weighted_bce(const Var& a_hat, const Var& target, double pos_weight,
                 std::shared_ptr<const IndexList> restrict = nullptr);

inline constexpr double kProbClip = 1e-7;

/// Everything one forward pass produces. The training target is `a` itself.
struct Forward {
  Var a_norm;
  Encoding enc;
  Var a_hat;
  Var bce;
  Var kl;
  Var loss;
};

Forward forward(const Var& a, const Var& x, const ParamVars& p,
                std::shared_ptr<const Matrix> noise, double pos_weight);

/// Standard normal noise for one epoch, a pure function of (seed, epoch).
std::shared_ptr<const Matrix> epoch_noise(std::uint64_t seed, std::size_t epoch, std::size_t n,
                                          std::size_t latent);

/// Node features used by the encoder: the graph's own features or, if it
/// has none, the identity matrix.
Matrix input_features(const graph::Graph& g);

/// Posterior means for every node (no sampling).
Matrix embed(const VgaeParams& p, const Matrix& a_norm, const Matrix& x);

struct TrainOptions {
  double lr = 0.01;
  tensor::OptimizerKind optimizer = tensor::OptimizerKind::kAdam;
  VgaeDims dims;
};

/// Parameters plus optimizer state for a numeric (non-differentiated) run.
class VgaeTrainer {
 public:
  /// `g` is the graph the model trains on; the class weight is fixed from it.
  VgaeTrainer(const graph::Graph& g, TrainOptions opts, std::uint64_t seed);

  struct Step {
    double loss;
    double bce;
    double kl;
  };

  /// One forward pass and one optimizer update with this epoch's noise.
  /// Throws NumericError if the loss is not finite.
  Step step();

  const VgaeParams& params() const noexcept { return params_; }
  void set_params(VgaeParams p) { params_ = std::move(p); }
  std::size_t epoch() const noexcept { return epoch_; }
  double pos_weight() const noexcept { return pos_weight_; }
  const Matrix& a_norm() const noexcept { return a_norm_; }
  const Matrix& features() const noexcept { return x_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  Matrix adjacency_;
  Matrix a_norm_;
  Matrix x_;
  TrainOptions opts_;
  std::uint64_t seed_;
  double pos_weight_;
  VgaeParams params_;
  tensor::Optimizer optimizer_;
  std::size_t epoch_ = 0;
};

void save_params(const VgaeParams& p, std::uint64_t seed, std::size_t epoch,
                 const std::filesystem::path& path);
VgaeParams load_params(const std::filesystem::path& path);

}  // namespace linkpoison::surrogate
