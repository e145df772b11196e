#pragma once

#include <filesystem>
#include <string>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::modifier {

using graph::EditList;
using graph::Graph;
using tensor::Matrix;

/// (G + G^T) / 2. Throws ShapeError for a non-square input.
Matrix symmetrize(const Matrix& grad);

/// Greedy budgeted flips: visit pairs i < j by decreasing |grad(i, j)| (ties
/// to the smallest pair), add where the gradient is positive on a non-edge,
/// remove where it is negative on an edge, skip everything else. Each pair is
/// visited once; zero-gradient pairs and pairs the graph forbids (bipartite
/// same-side) are never candidates. Logs a warning on shortfall.
EditList select_edits(const Matrix& grad, const Graph& g, std::size_t budget);

/// Graph after the edits, plus the edits that produced it.
struct PoisonedGraph {
  Graph graph;
  EditList edits;
};

PoisonedGraph poison(const Graph& g, const EditList& edits);

/// Budget given either as an absolute flip count or as a fraction of the
/// edge count (rounded half-up).
struct Budget {
  enum class Kind { kCount, kFraction } kind = Kind::kCount;
  double value = 0.0;

  static Budget count(std::size_t n) { return {Kind::kCount, static_cast<double>(n)}; }
  static Budget fraction(double f) { return {Kind::kFraction, f}; }
};

/// Throws ConfigError for a negative count, non-integral count, or a
/// fraction outside [0, 0.5].
std::size_t resolve_budget(const Budget& b, std::size_t edge_count);

/// CSV with header "i,j,action,magnitude".
void save_edits(const EditList& edits, const std::filesystem::path& path);
std::string edits_csv(const EditList& edits);
/// Throws ParseError (with line number) on malformed rows.
EditList load_edits(const std::filesystem::path& path);

}  // namespace linkpoison::modifier
