#include "linkpoison/modifier/modifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <spdlog/spdlog.h>

#include "linkpoison/errors.hpp"

namespace linkpoison::modifier {

Matrix symmetrize(const Matrix& grad) {
  if (grad.rows() != grad.cols())
    throw ShapeError("symmetrize: gradient must be square, got " + grad.shape_string());
  Matrix out(grad.rows(), grad.cols());
  for (std::size_t i = 0; i < grad.rows(); ++i)
    for (std::size_t j = 0; j < grad.cols(); ++j) out(i, j) = (grad(i, j) + grad(j, i)) / 2.0;
  return out;
}

EditList select_edits(const Matrix& grad, const Graph& g, std::size_t budget) {
  const std::size_t n = g.num_nodes();
  if (grad.rows() != n || grad.cols() != n)
    throw ShapeError("select_edits: gradient " + grad.shape_string() + " for a graph of " +
                     std::to_string(n) + " nodes");
  EditList out;
  out.requested = budget;
  if (budget == 0) return out;

  struct Candidate {
    double mag;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> heap;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (grad(i, j) != 0.0 && g.allows_pair(i, j)) heap.push_back({std::abs(grad(i, j)), i, j});
  // Max-heap on magnitude, then on the smallest pair.
  auto lower = [](const Candidate& a, const Candidate& b) {
    if (a.mag != b.mag) return a.mag < b.mag;
    return std::tie(a.i, a.j) > std::tie(b.i, b.j);
  };
  std::make_heap(heap.begin(), heap.end(), lower);
  const Matrix& adj = g.adjacency();
  while (!heap.empty() && out.size() < budget) {
    std::pop_heap(heap.begin(), heap.end(), lower);
    const Candidate c = heap.back();
    heap.pop_back();
    const double d = grad(c.i, c.j);
    const bool linked = adj(c.i, c.j) != 0.0;
    if (d > 0.0 && !linked) out.edits.push_back({c.i, c.j, graph::EditAction::kAdd, c.mag});
    else if (d < 0.0 && linked) out.edits.push_back({c.i, c.j, graph::EditAction::kRemove, c.mag});
  }
  if (out.shortfall() > 0)
    spdlog::warn("select_edits: only {} of {} requested flips were feasible", out.size(), budget);
  return out;
}

PoisonedGraph poison(const Graph& g, const EditList& edits) {
  return {graph::apply_edits(g, edits), edits};
}

std::size_t resolve_budget(const Budget& b, std::size_t edge_count) {
  if (!std::isfinite(b.value) || b.value < 0.0) throw ConfigError("budget must be non-negative");
  if (b.kind == Budget::Kind::kCount) {
    if (b.value != std::floor(b.value)) throw ConfigError("budget count must be an integer");
    return static_cast<std::size_t>(b.value);
  }
  if (b.value > 0.5) throw ConfigError("budget fraction must lie in [0, 0.5]");
  return static_cast<std::size_t>(std::floor(b.value * static_cast<double>(edge_count) + 0.5));
}

std::string edits_csv(const EditList& edits) {
  std::ostringstream out;
  out.precision(17);
  out << "i,j,action,magnitude\n";
  for (const auto& e : edits.edits)
    out << e.i << ',' << e.j << ',' << graph::action_name(e.action) << ',' << e.magnitude << '\n';
  return out.str();
}

void save_edits(const EditList& edits, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << edits_csv(edits);
}

EditList load_edits(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  EditList list;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("i,", 0) == 0)) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw ParseError(path.string() + ": expected 4 fields", lineno);
    graph::Edit e;
    auto parse_index = [&](const std::string& s, std::size_t& dst) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), dst);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(path.string() + ": bad node id '" + s + "'", lineno);
    };
    parse_index(cells[0], e.i);
    parse_index(cells[1], e.j);
    if (cells[2] == "add") e.action = graph::EditAction::kAdd;
    else if (cells[2] == "remove") e.action = graph::EditAction::kRemove;
    else throw ParseError(path.string() + ": bad action '" + cells[2] + "'", lineno);
    try {
      std::size_t used = 0;
      e.magnitude = std::stod(cells[3], &used);
      if (used != cells[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad magnitude '" + cells[3] + "'", lineno);
    }
    list.edits.push_back(e);
  }
  list.requested = list.size();
  return list;
}

}  // namespace linkpoison::modifier
