#pragma once

// Literal greedy loop: repeatedly scan the whole matrix for the largest
// |gradient| among mutable off-diagonal cells (first in row-major order on
// ties), apply the add/remove conditions, then lock the cell and its mirror.

#include <cmath>
#include <vector>

#include "linkpoison/graph/graph.hpp"

namespace oracle {

inline linkpoison::graph::EditList greedy_edits(const linkpoison::tensor::Matrix& grad,
                                                const linkpoison::graph::Graph& g,
                                                std::size_t budget) {
  using linkpoison::graph::EditAction;
  const std::size_t n = g.num_nodes();
  std::vector<char> locked(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    locked[i * n + i] = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (!g.allows_pair(i, j)) locked[i * n + j] = 1;
  }
  linkpoison::graph::EditList out;
  out.requested = budget;
  std::size_t remaining = budget;
  while (remaining > 0) {
    double best = 0.0;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!locked[i * n + j] && std::abs(grad(i, j)) > best) {
          best = std::abs(grad(i, j));
          bi = i;
          bj = j;
        }
    if (bi == n) break;
    const double d = grad(bi, bj);
    const double a = g.adjacency()(bi, bj);
    const std::size_t lo = std::min(bi, bj), hi = std::max(bi, bj);
    if (d > 0 && a == 0.0) {
      out.edits.push_back({lo, hi, EditAction::kAdd, best});
      --remaining;
    } else if (d < 0 && a == 1.0) {
      out.edits.push_back({lo, hi, EditAction::kRemove, best});
      --remaining;
    }
    locked[bi * n + bj] = locked[bj * n + bi] = 1;
  }
  return out;
}

}  // namespace oracle
