#include "linkpoison/graph/graph.hpp"

#include <algorithm>
#include <queue>

#include "linkpoison/errors.hpp"

namespace linkpoison::graph {

const char* action_name(EditAction a) { return a == EditAction::kAdd ? "add" : "remove"; }

Graph::Graph(std::size_t n) : n_(n), adjacency_(n, n) {}

Graph::Graph(std::size_t n, std::span<const Edge> edges) : Graph(n) {
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) throw DomainError("edge endpoint out of range");
    if (e.u == e.v) throw DomainError("self-loop (" + std::to_string(e.u) + ") not allowed");
    set_pair(e.u, e.v, 1.0);
  }
}

Graph Graph::from_adjacency(Matrix adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw DomainError("adjacency must be square, got " + adjacency.shape_string());
  }
  const std::size_t n = adjacency.rows();
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw DomainError("adjacency has a non-zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0 && v != 1.0) throw DomainError("adjacency entries must be 0 or 1");
      if (v != adjacency(j, i)) throw DomainError("adjacency is not symmetric");
      if (j > i && v == 1.0) ++g.edge_count_;
    }
  }
  g.adjacency_ = std::move(adjacency);
  return g;
}

void Graph::set_pair(std::size_t i, std::size_t j, double value) {
  const double old = adjacency_(i, j);
  if (old == value) return;
  adjacency_(i, j) = value;
  adjacency_(j, i) = value;
  if (value != 0.0) {
    ++edge_count_;
  } else {
    --edge_count_;
  }
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto row = adjacency_.row(i);
    for (std::size_t j = i + 1; j < n_; ++j)
      if (row[j] != 0.0) out.push_back({i, j});
  }
  return out;
}

std::vector<std::vector<std::size_t>> Graph::neighbors() const {
  std::vector<std::vector<std::size_t>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto row = adjacency_.row(i);
    for (std::size_t j = 0; j < n_; ++j)
      if (row[j] != 0.0) out[i].push_back(j);
  }
  return out;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (double v : adjacency_.row(i)) d[i] += v != 0.0 ? 1 : 0;
  return d;
}

Graph Graph::with_features(Matrix features) const {
  if (features.rows() != n_) {
    throw ShapeError("feature rows (" + std::to_string(features.rows()) +
                     ") must equal node count (" + std::to_string(n_) + ")");
  }
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_labels(std::vector<int> labels) const {
  if (labels.size() != n_) throw ShapeError("label count must equal node count");
  Graph g = *this;
  g.labels_ = std::move(labels);
  return g;
}

Graph Graph::with_bipartite(BipartiteSplit split) const {
  if (split.users + split.items != n_) {
    throw DomainError("bipartite split does not cover the node set");
  }
  for (const Edge& e : edges()) {
    if ((e.u < split.users) == (e.v < split.users)) {
      throw DomainError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                        ") does not cross the user/item partition");
    }
  }
  Graph g = *this;
  g.bipartite_ = split;
  return g;
}

bool Graph::allows_pair(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  if (!bipartite_) return true;
  return (i < bipartite_->users) != (j < bipartite_->users);
}

Graph Graph::flipped(std::span<const Edge> pairs) const {
  Graph g = *this;
  for (const Edge& e : pairs) {
    if (e.u >= n_ || e.v >= n_) throw DomainError("edit references a node out of range");
    if (e.u == e.v) throw DomainError("edit on the diagonal (" + std::to_string(e.u) + ")");
    if (!allows_pair(e.u, e.v)) throw DomainError("edit does not cross the bipartite partition");
    g.set_pair(e.u, e.v, g.has_edge(e.u, e.v) ? 0.0 : 1.0);
  }
  return g;
}

Graph Graph::without(std::span<const Edge> pairs) const {
  Graph g = *this;
  for (const Edge& e : pairs) g.set_pair(e.u, e.v, 0.0);
  return g;
}

Graph Graph::induced(std::span<const std::size_t> nodes) const {
  std::vector<std::size_t> index(n_, n_);
  for (std::size_t k = 0; k < nodes.size(); ++k) index.at(nodes[k]) = k;
  Graph g(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (has_edge(nodes[a], nodes[b])) g.set_pair(a, b, 1.0);
    }
  }
  if (features_) {
    Matrix f(nodes.size(), features_->cols());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      auto src = features_->row(nodes[k]);
      std::copy(src.begin(), src.end(), f.row(k).begin());
    }
    g.features_ = std::move(f);
  }
  if (labels_) {
    std::vector<int> l(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) l[k] = (*labels_)[nodes[k]];
    g.labels_ = std::move(l);
  }
  return g;
}

Graph apply_edits(const Graph& g, const EditList& edits) {
  std::vector<Edge> pairs;
  pairs.reserve(edits.size());
  for (const Edit& e : edits.edits) {
    if (e.i == e.j) throw DomainError("edit on the diagonal (" + std::to_string(e.i) + ")");
    pairs.push_back(Edge::canonical(e.i, e.j));
  }
  return g.flipped(pairs);
}

std::vector<std::vector<std::size_t>> connected_components(const Graph& g) {
  const auto nbrs = g.neighbors();
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t s = 0; s < g.num_nodes(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      comp.push_back(u);
      for (std::size_t v : nbrs[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

Graph connected_subset(const Graph& g, std::size_t max_nodes) {
  if (g.num_nodes() == 0) throw DomainError("connected_subset: empty graph");
  auto comps = connected_components(g);
  const auto& largest = *std::max_element(
      comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  if (largest.size() <= max_nodes) return g.induced(largest);

  const auto deg = g.degrees();
  std::size_t start = largest.front();
  for (std::size_t v : largest)
    if (deg[v] > deg[start]) start = v;

  const auto nbrs = g.neighbors();
  std::vector<char> seen(g.num_nodes(), 0);
  std::vector<std::size_t> picked;
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = 1;
  while (!q.empty() && picked.size() < max_nodes) {
    const std::size_t u = q.front();
    q.pop();
    picked.push_back(u);
    for (std::size_t v : nbrs[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        q.push(v);
      }
    }
  }
  std::sort(picked.begin(), picked.end());
  return g.induced(picked);
}

}  // namespace linkpoison::graph
