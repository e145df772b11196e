#include <doctest.h>

#include <cmath>
#include <map>

#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"
#include "linkpoison/graph/generators.hpp"
#include "linkpoison/graph/split.hpp"

using namespace linkpoison;
using namespace linkpoison::baselines;
using graph::EditAction;

namespace {

Graph complete(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j});
  return Graph(n, e);
}

bool valid(const Graph& g) {
  const auto& a = g.adjacency();
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (a(i, i) != 0.0) return false;
    for (std::size_t j = 0; j < g.num_nodes(); ++j)
      if (a(i, j) != a(j, i) || (a(i, j) != 0.0 && a(i, j) != 1.0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("random-flip basics") {
  Graph g = graph::erdos_renyi(10, 0.3, 1);
  CHECK(random_flip(g, 0, 1).empty());
  CHECK(random_flip(g, 5, 7).edits == random_flip(g, 5, 7).edits);
  CHECK(random_flip(g, 5, 7).edits != random_flip(g, 5, 8).edits);

  EditList k3 = random_flip(complete(3), 1, 4);
  REQUIRE(k3.size() == 1);
  CHECK(k3.edits[0].action == EditAction::kRemove);

  CHECK_THROWS_AS(random_flip(complete(3), 4, 1), InfeasibleError);

  EditList e = random_flip(g, 20, 3);
  std::set<Edge> seen;
  for (const auto& ed : e.edits) {
    CHECK(ed.i < ed.j);
    CHECK(seen.insert({ed.i, ed.j}).second);
    CHECK((ed.action == EditAction::kRemove) == g.has_edge(ed.i, ed.j));
  }

  PairSet forbidden{{0, 1}, {2, 3}};
  for (std::uint64_t s = 0; s < 50; ++s)
    for (const auto& ed : random_flip(g, 10, s, forbidden).edits)
      CHECK_FALSE(forbidden.contains({ed.i, ed.j}));
}

TEST_CASE("random-flip picks pairs uniformly") {
  Graph g = graph::erdos_renyi(10, 0.3, 2);
  const std::size_t pairs = 45, budget = 3, trials = 10000;
  std::map<Edge, std::size_t> counts;
  for (std::size_t t = 0; t < trials; ++t)
    for (const auto& ed : random_flip(g, budget, t).edits) ++counts[{ed.i, ed.j}];
  CHECK(counts.size() == pairs);
  const double p = static_cast<double>(budget) / pairs;
  const double mean = trials * p;
  const double sigma = std::sqrt(trials * p * (1.0 - p));
  for (const auto& [pair, c] : counts) {
    CAPTURE(pair.u);
    CAPTURE(pair.v);
    CHECK(std::abs(static_cast<double>(c) - mean) <= 3.0 * sigma);
  }
}

TEST_CASE("dice removes internally and connects externally") {
  Graph g = graph::planted_partition(30, 2, 0.4, 0.1, 5);
  const auto& labels = *g.labels();
  EditList e = dice(g, 25, 9);
  CHECK(e.size() == 25);
  std::size_t adds = 0, removes = 0;
  for (const auto& ed : e.edits) {
    if (ed.action == EditAction::kRemove) {
      ++removes;
      CHECK(g.has_edge(ed.i, ed.j));
      CHECK(labels[ed.i] == labels[ed.j]);
    } else {
      ++adds;
      CHECK_FALSE(g.has_edge(ed.i, ed.j));
      CHECK(labels[ed.i] != labels[ed.j]);
    }
  }
  CHECK(adds > 0);
  CHECK(removes > 0);
  CHECK(dice(g, 25, 9).edits == e.edits);
  CHECK(dice(g, 0, 9).empty());
}

TEST_CASE("dice degenerate cases") {
  Graph one = graph::erdos_renyi(8, 0.5, 3).with_labels(std::vector<int>(8, 0));
  EditList e = dice(one, 5, 1);
  for (const auto& ed : e.edits) CHECK(ed.action == EditAction::kRemove);
  EditList all = dice(one, 1000, 1);
  CHECK(all.size() == one.num_edges());
  CHECK(all.shortfall() == 1000 - one.num_edges());
  CHECK_THROWS_AS(dice(graph::erdos_renyi(8, 0.5, 3), 2, 1), ConfigError);
}

TEST_CASE("null-model preserves degrees") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = graph::erdos_renyi(25, 0.2, seed);
    Graph h = null_model(g, 30, seed);
    CHECK(valid(h));
    CHECK(h.num_edges() == g.num_edges());
    CHECK(h.degrees() == g.degrees());
    CHECK(h.labels() == g.labels());
  }
  Graph g = graph::erdos_renyi(25, 0.2, 1);
  CHECK(null_model(g, 30, 4) == null_model(g, 30, 4));
  CHECK_FALSE(null_model(g, 30, 4).adjacency() == g.adjacency());
}

TEST_CASE("null-model on K4 has no legal swap") {
  Graph k4 = complete(4);
  // Exhaustive check: any two disjoint edges rewire onto existing edges.
  CHECK(null_model(k4, 5, 1).adjacency() == k4.adjacency());
  CHECK_THROWS_AS(null_model(Graph(3, std::vector<Edge>{{0, 1}}), 1, 1), DomainError);
}

TEST_CASE("null-model respects forbidden pairs and bipartite sides") {
  Graph g = graph::erdos_renyi(30, 0.2, 6);
  auto split = graph::make_split(g, {}, 3);
  auto held = split.held_out();
  PairSet forbidden(held.begin(), held.end());
  Graph h = null_model(g, 40, 2, forbidden);
  for (const auto& e : forbidden) CHECK(h.has_edge(e.u, e.v) == g.has_edge(e.u, e.v));
  CHECK(h.degrees() == g.degrees());

  Graph bp = graph::random_bipartite(8, 10, 0.3, 4);
  Graph hb = null_model(bp, 20, 5);
  for (const auto& e : hb.edges()) CHECK(bp.allows_pair(e.u, e.v));
  CHECK(hb.degrees() == bp.degrees());
}

TEST_CASE("edit accounting helpers") {
  Graph g = graph::erdos_renyi(20, 0.2, 8);
  Graph h = null_model(g, 10, 1);
  EditList diff = edits_between(g, h);
  CHECK(graph::apply_edits(g, diff) == h);
  CHECK(diff.size() % 2 == 0);
  CHECK(swaps_for_budget(9) == 2);
  CHECK(parse_baseline("null-model") == BaselineKind::kNullModel);
  CHECK_THROWS_AS(parse_baseline("pgd"), ConfigError);
}
