#pragma once

// Per-node propagation written straight from the layer rule
// e_u^(k+1) = sum_{i in N_u} e_i^(k) / (sqrt|N_u| sqrt|N_i|), reading
// neighborhoods off the adjacency matrix, followed by a uniform layer mean.

#include <cmath>
#include <vector>

#include "linkpoison/graph/graph.hpp"

namespace oracle {

inline linkpoison::tensor::Matrix loop_lightgcn(const linkpoison::tensor::Matrix& e0,
                                                const linkpoison::graph::Graph& g,
                                                std::size_t layers) {
  using linkpoison::tensor::Matrix;
  const std::size_t n = g.num_nodes();
  const Matrix& a = g.adjacency();
  std::vector<double> size(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) size[u] += a(u, v);
  std::vector<Matrix> all{e0};
  for (std::size_t l = 0; l < layers; ++l) {
    const Matrix& prev = all.back();
    Matrix next(n, e0.cols());
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t i = 0; i < n; ++i) {
        if (a(u, i) == 0.0) continue;
        const double c = 1.0 / (std::sqrt(size[u]) * std::sqrt(size[i]));
        for (std::size_t k = 0; k < e0.cols(); ++k) next(u, k) += c * prev(i, k);
      }
    all.push_back(next);
  }
  Matrix mean(n, e0.cols());
  for (const Matrix& m : all)
    for (std::size_t f = 0; f < m.size(); ++f) mean[f] += m[f];
  for (double& v : mean.data()) v /= static_cast<double>(layers + 1);
  return mean;
}

}  // namespace oracle
