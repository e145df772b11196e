#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "linkpoison/graph/graph.hpp"
#include "linkpoison/graph/split.hpp"
#include "linkpoison/surrogate/vgae.hpp"

namespace linkpoison::attack {

using tensor::Matrix;

enum class WeightScheme { kUniform, kMagnitude, kPerformance, kLinear };
enum class Mode { kFirstOrder, kFullUnroll };
enum class Target { kValidationLinks, kAllEntries };

std::string_view scheme_name(WeightScheme s);
WeightScheme parse_scheme(std::string_view name);  // uniform|magnitude|performance|linear
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);  // first-order|full-unroll
std::string_view target_name(Target t);
Target parse_target(std::string_view name);  // validation-links|all-entries

struct AttackConfig {
  std::size_t epochs = 100;
  WeightScheme scheme = WeightScheme::kLinear;
  std::uint64_t seed = 0;
  Mode mode = Mode::kFirstOrder;
  Target target = Target::kValidationLinks;
  double lr = 0.01;
  /// Adam is only accepted in first-order mode.
  tensor::OptimizerKind optimizer = tensor::OptimizerKind::kAdam;
  surrogate::VgaeDims dims;
  std::size_t max_unroll_nodes = 1500;
  /// Zero the gradient on the diagonal and on every held-out pair.
  bool mask = true;
};

/// Weight of epoch i (1-based) out of k. `grad` is only read by the magnitude
/// scheme and `val_ap` only by the performance scheme.
double epoch_weight(WeightScheme scheme, std::size_t i, std::size_t k, const Matrix& grad,
                    double val_ap);

struct EpochRecord {
  std::size_t epoch = 0;
  double weight = 0.0;
  double attack_loss = 0.0;
  double train_loss = 0.0;
  double val_ap = 0.0;
};

struct MetaGradient {
  Matrix value;
  std::vector<EpochRecord> epochs;
  double accumulated_loss = 0.0;
};

/// Trains the surrogate on training_graph(g, split) for cfg.epochs epochs,
/// accumulating the weighted attack loss, and returns its gradient with
/// respect to the training adjacency.
MetaGradient run_attack(const graph::Graph& g, const graph::LinkSplit& split,
                        const AttackConfig& cfg);

/// Row-major flat indices of the validation pairs (one orientation each).
std::vector<std::size_t> validation_indices(const graph::LinkSplit& split, std::size_t n);

/// Zeroes the diagonal and both orientations of every held-out pair.
void mask_gradient(Matrix& grad, const graph::LinkSplit& split);

std::string config_json(const AttackConfig& cfg);

/// Writes `<stem>.bin` (n x n little-endian doubles) and `<stem>.json`.
void export_meta_gradient(const MetaGradient& mg, const AttackConfig& cfg,
                          const std::filesystem::path& stem);
Matrix load_meta_gradient(const std::filesystem::path& stem);

}  // namespace linkpoison::attack
