#include <doctest.h>

#include <random>

#include "linkpoison/errors.hpp"
#include "linkpoison/graph/generators.hpp"
#include "linkpoison/graph/stats.hpp"
#include "linkpoison/modifier/modifier.hpp"
#include "support/modifier_oracle.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace linkpoison;
using namespace linkpoison::modifier;
using graph::Edge;
using graph::EditAction;

namespace {

Matrix random_symmetric(std::size_t n, std::mt19937_64& rng, bool coarse) {
  Matrix m = oracle::random_matrix(n, n, rng, -2.0, 2.0);
  if (coarse)  // force ties and exact zeros
    for (double& v : m.data()) v = std::round(v * 2.0) / 2.0;
  Matrix s = symmetrize(m);
  for (std::size_t i = 0; i < n; ++i) s(i, i) = 0.0;
  return s;
}

}  // namespace

TEST_CASE("symmetrize examples") {
  CHECK(symmetrize(Matrix{{0, 4}, {2, 0}}) == Matrix{{0, 3}, {3, 0}});
  Matrix s{{1, 2}, {2, 5}};
  CHECK(symmetrize(s) == s);
  CHECK(symmetrize(Matrix{{0, 1.5}, {-1.5, 0}}) == Matrix(2, 2));
  CHECK_THROWS_AS(symmetrize(Matrix(2, 3)), ShapeError);
}

TEST_CASE("select-edits hand trace") {
  Matrix grad{{0, 2.5, -1.0}, {2.5, 0, 0.5}, {-1.0, 0.5, 0}};
  Graph g(3, std::vector<Edge>{{0, 2}});
  EditList e = select_edits(grad, g, 2);
  REQUIRE(e.size() == 2);
  CHECK(e.edits[0] == graph::Edit{0, 1, EditAction::kAdd, 2.5});
  CHECK(e.edits[1] == graph::Edit{0, 2, EditAction::kRemove, 1.0});

  CHECK(select_edits(grad, g, 0).empty());

  // Argmax points at an existing edge with a positive gradient: skipped.
  Graph full(3, std::vector<Edge>{{0, 1}, {0, 2}});
  EditList f = select_edits(grad, full, 1);
  REQUIRE(f.size() == 1);
  CHECK(f.edits[0] == graph::Edit{0, 2, EditAction::kRemove, 1.0});
}

TEST_CASE("select-edits shortfall and zero gradients") {
  Graph g(3, std::vector<Edge>{{0, 1}});
  Matrix zero(3, 3);
  EditList e = select_edits(zero, g, 2);
  CHECK(e.empty());
  CHECK(e.shortfall() == 2);
  CHECK_THROWS_AS(select_edits(Matrix(2, 2), g, 1), ShapeError);
}

TEST_CASE("select-edits restricts bipartite graphs to cross pairs") {
  Graph g = graph::random_bipartite(3, 4, 0.3, 2);
  std::mt19937_64 rng(3);
  Matrix grad = random_symmetric(7, rng, false);
  EditList e = select_edits(grad, g, 10);
  for (const auto& ed : e.edits) CHECK(g.allows_pair(ed.i, ed.j));
  CHECK(e.edits == oracle::greedy_edits(grad, g, 10).edits);
}

TEST_CASE("select-edits equals the brute-force greedy loop") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 11;
    Graph g = graph::erdos_renyi(n, 0.35, rng());
    Matrix grad = random_symmetric(n, rng, trial % 2 == 0);
    const std::size_t budget = rng() % 7;
    EditList fast = select_edits(grad, g, budget);
    EditList slow = oracle::greedy_edits(grad, g, budget);
    CAPTURE(trial);
    CHECK(fast.edits == slow.edits);
    CHECK(fast.size() <= budget);

    std::size_t feasible = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        feasible += (grad(i, j) > 0 && !g.has_edge(i, j)) || (grad(i, j) < 0 && g.has_edge(i, j));
    CHECK(fast.size() == std::min(budget, feasible));

    for (std::size_t k = 0; k < fast.size(); ++k) {
      const auto& e = fast.edits[k];
      CHECK(e.i < e.j);
      if (e.action == EditAction::kAdd) CHECK((grad(e.i, e.j) > 0 && !g.has_edge(e.i, e.j)));
      else CHECK((grad(e.i, e.j) < 0 && g.has_edge(e.i, e.j)));
      if (k > 0) CHECK(fast.edits[k - 1].magnitude >= e.magnitude);
    }
  }
}

TEST_CASE("poison applies exactly the selected flips") {
  std::mt19937_64 rng(5);
  Graph g = graph::erdos_renyi(12, 0.3, 8);
  Matrix grad = random_symmetric(12, rng, false);
  EditList e = select_edits(grad, g, 5);
  REQUIRE(e.size() == 5);
  PoisonedGraph p = poison(g, e);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) diff += g.has_edge(i, j) != p.graph.has_edge(i, j);
  CHECK(diff == 5);
  const long delta = static_cast<long>(p.graph.num_edges()) - static_cast<long>(g.num_edges());
  CHECK(std::abs(delta) <= 5);
  CHECK(p.edits.edits == e.edits);
}

TEST_CASE("budget resolution") {
  CHECK(resolve_budget(Budget::count(7), 100) == 7);
  CHECK(resolve_budget(Budget::fraction(0.05), 4488) == 224);
  CHECK(resolve_budget(Budget::fraction(0.05), 90) == 5);  // 4.5 rounds up
  CHECK(resolve_budget(Budget::fraction(0.0), 90) == 0);
  CHECK_THROWS_AS(resolve_budget(Budget::fraction(0.6), 90), ConfigError);
  CHECK_THROWS_AS(resolve_budget(Budget::fraction(-0.1), 90), ConfigError);
  CHECK_THROWS_AS(resolve_budget({Budget::Kind::kCount, 2.5}, 90), ConfigError);
}

TEST_CASE("edit list CSV round trip") {
  testutil::TempDir dir;
  EditList e;
  e.edits = {{0, 3, EditAction::kAdd, 0.1 + 0.2}, {2, 5, EditAction::kRemove, 1e-300}};
  save_edits(e, dir / "edits.csv");
  EditList back = load_edits(dir / "edits.csv");
  CHECK(back.edits == e.edits);
  CHECK(testutil::read_file(dir / "edits.csv").rfind("i,j,action,magnitude\n", 0) == 0);
  try {
    load_edits(dir.write("bad.csv", "i,j,action,magnitude\n0,1,add,0.5\n0,2,flip,1\n"));
    FAIL("expected parse error");
  } catch (const ParseError& err) {
    CHECK(err.line() == 3);
  }
}
