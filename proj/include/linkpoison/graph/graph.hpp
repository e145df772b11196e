#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linkpoison/tensor/matrix.hpp"

namespace linkpoison::graph {

using tensor::Matrix;

/// Unordered node pair, stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  static Edge canonical(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class EditAction { kAdd, kRemove };

const char* action_name(EditAction a);

struct Edit {
  std::size_t i = 0;
  std::size_t j = 0;
  EditAction action = EditAction::kAdd;
  double magnitude = 0.0;

  friend bool operator==(const Edit&, const Edit&) = default;
};

/// Ordered edge flips. `requested` is the budget the list was produced for;
/// a list shorter than that ran out of feasible candidates.
struct EditList {
  std::vector<Edit> edits;
  std::size_t requested = 0;

  std::size_t size() const noexcept { return edits.size(); }
  bool empty() const noexcept { return edits.empty(); }
  std::size_t shortfall() const noexcept {
    return requested > edits.size() ? requested - edits.size() : 0;
  }
};

/// Users occupy ids [0, users), items [users, users + items).
struct BipartiteSplit {
  std::size_t users = 0;
  std::size_t items = 0;

  friend bool operator==(const BipartiteSplit&, const BipartiteSplit&) = default;
};

/// Undirected, unweighted graph over a dense symmetric 0/1 adjacency with a
/// zero diagonal. Immutable once built.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);
  Graph(std::size_t n, std::span<const Edge> edges);

  /// Throws DomainError unless `adjacency` is square, symmetric, binary and
  /// has a zero diagonal.
  static Graph from_adjacency(Matrix adjacency);

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edge_count_; }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  bool has_edge(std::size_t i, std::size_t j) const { return adjacency_(i, j) != 0.0; }

  /// Edges in lexicographic (u, v) order.
  std::vector<Edge> edges() const;
  std::vector<std::vector<std::size_t>> neighbors() const;
  std::vector<std::size_t> degrees() const;

  const std::optional<Matrix>& features() const noexcept { return features_; }
  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  const std::optional<BipartiteSplit>& bipartite() const noexcept { return bipartite_; }

  Graph with_features(Matrix features) const;
  Graph with_labels(std::vector<int> labels) const;
  Graph with_bipartite(BipartiteSplit split) const;

  /// True unless the graph is bipartite and both endpoints sit on one side.
  bool allows_pair(std::size_t i, std::size_t j) const;

  /// Copy with each listed pair toggled symmetrically.
  Graph flipped(std::span<const Edge> pairs) const;

  /// Copy without the listed pairs (absent pairs are ignored).
  Graph without(std::span<const Edge> pairs) const;

  /// Induced subgraph on `nodes`, relabelled 0..k-1 in the given order.
  Graph induced(std::span<const std::size_t> nodes) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adjacency_ == b.adjacency_ && a.features_ == b.features_ &&
           a.labels_ == b.labels_;
  }

 private:
  void set_pair(std::size_t i, std::size_t j, double value);

  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  Matrix adjacency_;
  std::optional<Matrix> features_;
  std::optional<std::vector<int>> labels_;
  std::optional<BipartiteSplit> bipartite_;
};

/// Flips every edit's pair. Applying the same list twice restores the input.
Graph apply_edits(const Graph& g, const EditList& edits);

/// Largest connected component (ties: the one holding the smallest node id),
/// cut down to at most `max_nodes` nodes by breadth-first search from its
/// highest-degree node.
Graph connected_subset(const Graph& g, std::size_t max_nodes);

/// Connected components as node lists, each sorted, ordered by smallest id.
std::vector<std::vector<std::size_t>> connected_components(const Graph& g);

}  // namespace linkpoison::graph
