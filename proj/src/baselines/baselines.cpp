#include "linkpoison/baselines/baselines.hpp"

#include <random>
#include <spdlog/spdlog.h>
#include <string>

#include "linkpoison/errors.hpp"

namespace linkpoison::baselines {

using graph::EditAction;

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandomFlip: return "random-flip";
    case BaselineKind::kDice: return "dice";
    case BaselineKind::kNullModel: return "null-model";
  }
  return "?";
}

BaselineKind parse_baseline(std::string_view name) {
  for (auto k : {BaselineKind::kRandomFlip, BaselineKind::kDice, BaselineKind::kNullModel})
    if (baseline_name(k) == name) return k;
  throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

namespace {

bool usable(const Graph& g, const PairSet& forbidden, std::size_t i, std::size_t j) {
  return g.allows_pair(i, j) && (forbidden.empty() || !forbidden.contains(Edge::canonical(i, j)));
}

graph::Edit flip_of(const Graph& g, const Edge& e) {
  return {e.u, e.v, g.has_edge(e.u, e.v) ? EditAction::kRemove : EditAction::kAdd, 0.0};
}

// Removes and returns a uniformly chosen element (order of the rest changes).
Edge take(std::vector<Edge>& pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const std::size_t k = pick(rng);
  Edge e = pool[k];
  pool[k] = pool.back();
  pool.pop_back();
  return e;
}

}  // namespace

EditList random_flip(const Graph& g, std::size_t budget, std::uint64_t seed,
                     const PairSet& forbidden) {
  EditList out;
  out.requested = budget;
  if (budget == 0) return out;
  std::vector<Edge> pool;
  const std::size_t n = g.num_nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (usable(g, forbidden, i, j)) pool.push_back({i, j});
  if (pool.size() < budget)
    throw InfeasibleError("random_flip: budget " + std::to_string(budget) + " exceeds the " +
                          std::to_string(pool.size()) + " available pairs");
  // Partial Fisher-Yates: the first `budget` slots become a uniform sample.
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < budget; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
    out.edits.push_back(flip_of(g, pool[k]));
  }
  return out;
}

EditList dice(const Graph& g, std::size_t budget, std::uint64_t seed, const PairSet& forbidden) {
  if (!g.labels()) throw ConfigError("dice: the graph has no node labels");
  const auto& labels = *g.labels();
  EditList out;
  out.requested = budget;
  if (budget == 0) return out;
  std::vector<Edge> internal;  // same-label edges
  std::vector<Edge> external;  // cross-label non-edges
  const std::size_t n = g.num_nodes();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!usable(g, forbidden, i, j)) continue;
      const bool same = labels[i] == labels[j];
      if (g.has_edge(i, j) && same) internal.push_back({i, j});
      else if (!g.has_edge(i, j) && !same) external.push_back({i, j});
    }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  while (out.size() < budget && !(internal.empty() && external.empty())) {
    bool remove = coin(rng);
    if (remove && internal.empty()) remove = false;
    if (!remove && external.empty()) remove = true;
    const Edge e = take(remove ? internal : external, rng);
    out.edits.push_back({e.u, e.v, remove ? EditAction::kRemove : EditAction::kAdd, 0.0});
  }
  if (out.shortfall() > 0)
    spdlog::warn("dice: only {} of {} requested flips were possible", out.size(), budget);
  return out;
}

Graph null_model(const Graph& g, std::size_t swaps, std::uint64_t seed, const PairSet& forbidden) {
  if (g.num_edges() < 2) throw DomainError("null_model: needs at least two edges");
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (forbidden.empty() || !forbidden.contains(e)) edges.push_back(e);
  if (edges.size() < 2 || swaps == 0) return g;

  graph::Matrix adj = g.adjacency();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
  std::bernoulli_distribution coin(0.5);
  std::size_t done = 0;
  std::size_t rejected = 0;
  const std::size_t max_rejected = 100 * swaps + 1000;
  while (done < swaps && rejected < max_rejected) {
    const std::size_t x = pick(rng);
    const std::size_t y = pick(rng);
    Edge e1 = edges[x];
    Edge e2 = edges[y];
    if (coin(rng)) std::swap(e2.u, e2.v);
    const std::size_t a = e1.u, b = e1.v, c = e2.u, d = e2.v;
    const bool distinct = x != y && a != c && a != d && b != c && b != d;
    if (!distinct || adj(a, d) != 0.0 || adj(c, b) != 0.0 || !usable(g, forbidden, a, d) ||
        !usable(g, forbidden, c, b)) {
      ++rejected;
      continue;
    }
    adj(a, b) = adj(b, a) = adj(c, d) = adj(d, c) = 0.0;
    adj(a, d) = adj(d, a) = adj(c, b) = adj(b, c) = 1.0;
    edges[x] = Edge::canonical(a, d);
    edges[y] = Edge::canonical(c, b);
    ++done;
  }
  if (done < swaps)
    spdlog::warn("null_model: performed {} of {} requested swaps", done, swaps);
  std::vector<Edge> changed;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t j = i + 1; j < g.num_nodes(); ++j)
      if (adj(i, j) != g.adjacency()(i, j)) changed.push_back({i, j});
  return g.flipped(changed);
}

std::size_t swaps_for_budget(std::size_t budget) { return budget / 4; }

EditList edits_between(const Graph& before, const Graph& after) {
  if (before.num_nodes() != after.num_nodes())
    throw ShapeError("edits_between: graphs have different node counts");
  EditList out;
  for (std::size_t i = 0; i < before.num_nodes(); ++i)
    for (std::size_t j = i + 1; j < before.num_nodes(); ++j)
      if (before.has_edge(i, j) != after.has_edge(i, j)) out.edits.push_back(flip_of(before, {i, j}));
  out.requested = out.size();
  return out;
}

}  // namespace linkpoison::baselines
