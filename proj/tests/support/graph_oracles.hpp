#pragma once

// Brute-force graph statistics working straight off the adjacency matrix:
// Floyd-Warshall distances and triple-loop triangle counts.

#include <algorithm>
#include <limits>
#include <vector>

#include "linkpoison/graph/stats.hpp"

namespace oracle {

inline linkpoison::graph::GraphStats brute_force_stats(const linkpoison::graph::Graph& g) {
  const std::size_t n = g.num_nodes();
  const auto& a = g.adjacency();
  linkpoison::graph::GraphStats s;
  s.nodes = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s.edges += a(i, j) != 0.0;
  s.avg_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(n);
  s.density = n < 2 ? 0.0 : 2.0 * static_cast<double>(s.edges) / (double(n) * double(n - 1));

  double clustering = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t deg = 0;
    std::size_t tri = 0;
    for (std::size_t i = 0; i < n; ++i) deg += a(v, i) != 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (a(v, i) != 0.0 && a(v, j) != 0.0 && a(i, j) != 0.0) ++tri;
    if (deg >= 2) clustering += 2.0 * double(tri) / (double(deg) * double(deg - 1));
  }
  s.avg_clustering = clustering / static_cast<double>(n);

  const std::size_t inf = std::numeric_limits<std::size_t>::max() / 4;
  std::vector<std::size_t> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) != 0.0) d[i * n + j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);

  // Largest component by size, ties to the one containing the smallest id.
  std::vector<std::size_t> best;
  std::vector<char> done(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> comp;
    for (std::size_t j = 0; j < n; ++j)
      if (d[i * n + j] < inf) {
        comp.push_back(j);
        done[j] = 1;
      }
    if (comp.size() > best.size()) best = comp;
  }
  if (best.size() > 1) {
    std::size_t total = 0;
    for (std::size_t u : best)
      for (std::size_t v : best) {
        total += d[u * n + v];
        s.diameter = std::max(s.diameter, d[u * n + v]);
      }
    s.avg_path_length = double(total) / (double(best.size()) * double(best.size() - 1));
  }
  return s;
}

}  // namespace oracle
