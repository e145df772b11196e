#include "linkpoison/graph/generators.hpp"

#include <random>
#include <vector>

#include "linkpoison/errors.hpp"

namespace linkpoison::graph {

Graph planted_partition(std::size_t n, std::size_t blocks, double p_in, double p_out,
                        std::uint64_t seed) {
  if (blocks == 0 || blocks > n) throw DomainError("planted_partition: invalid block count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i * blocks / n);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < (labels[i] == labels[j] ? p_in : p_out)) edges.push_back({i, j});
  return Graph(n, edges).with_labels(std::move(labels)).with_features(Matrix::identity(n));
}

Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < p) edges.push_back({i, j});
  return Graph(n, edges);
}

Graph random_bipartite(std::size_t users, std::size_t items, double p, std::uint64_t seed) {
  if (users == 0 || items == 0) throw DomainError("random_bipartite: empty side");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_item(0, items - 1);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < users; ++a) {
    bool has_any = false;
    for (std::size_t b = 0; b < items; ++b) {
      if (u(rng) < p) {
        edges.push_back({a, users + b});
        has_any = true;
      }
    }
    if (!has_any) edges.push_back({a, users + any_item(rng)});
  }
  return Graph(users + items, edges).with_bipartite({users, items});
}

}  // namespace linkpoison::graph
