#include "linkpoison/graph/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "linkpoison/errors.hpp"

namespace linkpoison::graph {

namespace {

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

std::size_t count_candidate_pairs(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (const auto& bp = g.bipartite()) return bp->users * bp->items;
  return n < 2 ? 0 : n * (n - 1) / 2;
}

// Negatives drawn uniformly without replacement from allowed non-edges.
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, std::mt19937_64& rng) {
  const std::size_t available = count_candidate_pairs(g) - g.num_edges();
  if (count > available) {
    throw InfeasibleError("need " + std::to_string(count) + " negative pairs but only " +
                          std::to_string(available) + " non-edges exist");
  }
  std::vector<Edge> out;
  if (count == 0) return out;
  const std::size_t n = g.num_nodes();

  if (count * 4 > available) {
    // Dense regime: enumerate and take a prefix of a shuffle.
    std::vector<Edge> pool;
    pool.reserve(available);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (g.allows_pair(i, j) && !g.has_edge(i, j)) pool.push_back({i, j});
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
  }

  std::set<Edge> chosen;
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  while (out.size() < count) {
    const std::size_t a = node(rng);
    const std::size_t b = node(rng);
    if (!g.allows_pair(a, b) || g.has_edge(a, b)) continue;
    const Edge e = Edge::canonical(a, b);
    if (chosen.insert(e).second) out.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<Edge> LinkSplit::held_out() const {
  std::vector<Edge> out;
  out.reserve(val_pos.size() + test_pos.size() + val_neg.size() + test_neg.size());
  for (const auto* list : {&val_pos, &test_pos, &val_neg, &test_neg})
    out.insert(out.end(), list->begin(), list->end());
  return out;
}

LinkSplit make_split(const Graph& g, const SplitFractions& f, std::uint64_t seed) {
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw DomainError("split fractions must be non-negative and sum to 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges = g.edges();
  for (std::size_t k = edges.size(); k > 1; --k) {
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::swap(edges[k - 1], edges[pick(rng)]);
  }

  const std::size_t m = edges.size();
  const std::size_t n_test = std::min(m, round_half_up(f.test * static_cast<double>(m)));
  const std::size_t n_val = std::min(m - n_test, round_half_up(f.val * static_cast<double>(m)));

  LinkSplit s;
  s.seed = seed;
  s.test_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test),
                   edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), edges.end());

  std::vector<Edge> negatives = sample_non_edges(g, n_test + n_val, rng);
  s.test_neg.assign(negatives.begin(), negatives.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val_neg.assign(negatives.begin() + static_cast<std::ptrdiff_t>(n_test), negatives.end());
  return s;
}

Graph training_graph(const Graph& g, const LinkSplit& split) {
  const auto held = split.held_out();
  return g.without(held);
}

}  // namespace linkpoison::graph
