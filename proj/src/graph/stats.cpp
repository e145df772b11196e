#include "linkpoison/graph/stats.hpp"

#include <algorithm>
#include <json.hpp>
#include <queue>

#include "linkpoison/errors.hpp"

namespace linkpoison::graph {

GraphStats compute_stats(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw DomainError("compute_stats: empty graph");

  GraphStats s;
  s.nodes = n;
  s.edges = g.num_edges();
  s.avg_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(n);
  s.density = n < 2 ? 0.0
                    : 2.0 * static_cast<double>(s.edges) /
                          (static_cast<double>(n) * static_cast<double>(n - 1));

  const auto nbrs = g.neighbors();
  double clustering = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nv = nbrs[v];
    const std::size_t k = nv.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        if (g.has_edge(nv[a], nv[b])) ++links;
    clustering += 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  s.avg_clustering = clustering / static_cast<double>(n);

  const auto comps = connected_components(g);
  const auto& lcc = *std::max_element(
      comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  if (lcc.size() > 1) {
    std::vector<std::size_t> dist(n);
    const std::size_t unseen = static_cast<std::size_t>(-1);
    std::size_t total = 0;
    std::size_t diameter = 0;
    for (std::size_t src : lcc) {
      std::fill(dist.begin(), dist.end(), unseen);
      std::queue<std::size_t> q;
      dist[src] = 0;
      q.push(src);
      while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        total += dist[u];
        diameter = std::max(diameter, dist[u]);
        for (std::size_t w : nbrs[u]) {
          if (dist[w] == unseen) {
            dist[w] = dist[u] + 1;
            q.push(w);
          }
        }
      }
    }
    const double pairs = static_cast<double>(lcc.size()) * static_cast<double>(lcc.size() - 1);
    s.diameter = diameter;
    s.avg_path_length = static_cast<double>(total) / pairs;
  }
  return s;
}

std::string stats_json(const GraphStats& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["avg_degree"] = s.avg_degree;
  j["density"] = s.density;
  j["diameter"] = s.diameter;
  j["avg_clustering_coefficient"] = s.avg_clustering;
  j["avg_path_length"] = s.avg_path_length;
  return j.dump(2);
}

}  // namespace linkpoison::graph
