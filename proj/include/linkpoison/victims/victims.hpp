#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "linkpoison/graph/graph.hpp"
#include "linkpoison/graph/split.hpp"
#include "linkpoison/metrics/metrics.hpp"
#include "linkpoison/tensor/checkpoint.hpp"
#include "linkpoison/tensor/tape.hpp"

namespace linkpoison::victims {

using graph::Edge;
using graph::Graph;
using tensor::Matrix;
using tensor::Var;

enum class VictimKind { kVgae, kGat, kLightGcn };

std::string_view victim_name(VictimKind kind);
/// Accepts "vgae", "gat", "lightgcn"; throws ConfigError otherwise.
VictimKind parse_victim(std::string_view name);

struct VictimOptions {
  std::size_t epochs = 200;
  double lr = 0.01;
  std::size_t hidden = 32;     // VGAE / GAT first layer
  std::size_t out = 16;        // VGAE latent / GAT second layer
  std::size_t embedding = 32;  // LightGCN
  std::size_t layers = 3;      // LightGCN
  double l2 = 1e-4;            // LightGCN
  double leaky_slope = 0.2;    // GAT attention
  /// Called with every node pair the training objective reads as
  /// supervision (instrumentation for leak checks).
  std::function<void(std::size_t, std::size_t)> observe;
};

/// Trained victim reduced to what scoring needs: one embedding row per node.
/// VGAE and GAT score sigmoid(z_i . z_j); LightGCN scores z_i . z_j.
struct TrainedVictim {
  VictimKind kind = VictimKind::kVgae;
  Matrix embeddings;
  std::vector<double> losses;
  tensor::Checkpoint params;
};

/// Trains on training_graph(g, split); held-out pairs are never supervised.
/// Throws ConfigError for LightGCN on a non-bipartite graph or GAT without
/// features.
TrainedVictim train_victim(VictimKind kind, const Graph& g, const graph::LinkSplit& split,
                           const VictimOptions& opts, std::uint64_t seed);

/// Throws DomainError for an out-of-range node id.
double predict_link(const TrainedVictim& m, std::size_t i, std::size_t j);
std::vector<double> predict_links(const TrainedVictim& m, std::span<const Edge> pairs);

/// CSV "i,j,score".
void save_predictions(const TrainedVictim& m, std::span<const Edge> pairs,
                      const std::filesystem::path& path);

// Building blocks, exposed for testing.

struct GatLayerVars {
  Var w;      // in x out
  Var a_src;  // out x 1
  Var a_dst;  // out x 1
};

struct GatOutput {
  Var alpha;  // n x n attention, zero outside the mask
  Var out;
};

/// alpha = masked softmax of leaky_relu(a_src . Wh_i + a_dst . Wh_j) over the
/// mask's nonzero entries per row; out = act(alpha Wh) with act ELU or identity.
GatOutput gat_layer(const Var& h, const std::shared_ptr<const Matrix>& mask,
                    const GatLayerVars& p, bool elu, double slope);

/// Symmetric normalization 1 / (sqrt|N_u| sqrt|N_i|) over graph edges; rows of
/// isolated nodes are zero.
Matrix lightgcn_normalized(const Graph& g);

/// Mean of the layer-0..layers embeddings, each layer summing neighbors with
/// weight 1 / (sqrt(deg u) sqrt(deg v)), computed with per-node loops.
Matrix lightgcn_propagate(const Matrix& e0, const Graph& g, std::size_t layers);

/// Metric of a trained victim on the split's test pairs. ROC-AUC and AP use
/// test positives against test negatives. NDCG@k and Recall@k rank, for each
/// node with a test positive, every admissible partner that is not already a
/// training or validation neighbor in `clean`, and average over those nodes.
double evaluate(const TrainedVictim& m, const Graph& clean, const graph::LinkSplit& split,
                metrics::MetricKind metric, std::size_t k = 20);

}  // namespace linkpoison::victims
