#pragma once

#include <cstdint>
#include <vector>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::graph {

struct SplitFractions {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

/// Held-out link prediction split. Negatives are non-edges of the graph the
/// split was drawn from; the five lists are pairwise disjoint.
struct LinkSplit {
  std::vector<Edge> train_pos;
  std::vector<Edge> val_pos;
  std::vector<Edge> test_pos;
  std::vector<Edge> val_neg;
  std::vector<Edge> test_neg;
  std::uint64_t seed = 0;

  /// Validation and test pairs, positive and negative.
  std::vector<Edge> held_out() const;
};

/// Seeded uniform split of the edges; val/test sizes are fractions of the
/// edge count rounded half-up, train takes the rest. Bipartite graphs draw
/// negatives across the partition only. Throws InfeasibleError when there are
/// not enough non-edges.
LinkSplit make_split(const Graph& g, const SplitFractions& fractions, std::uint64_t seed);

/// The graph a link predictor may train on: every held-out pair removed.
Graph training_graph(const Graph& g, const LinkSplit& split);

}  // namespace linkpoison::graph
