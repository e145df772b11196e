#pragma once

#include <cstdint>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::graph {

/// Stochastic block model with equal blocks: node i belongs to block
/// i * blocks / n, pairs connect with p_in inside a block and p_out across.
/// Labels are the block ids; features are the identity matrix.
Graph planted_partition(std::size_t n, std::size_t blocks, double p_in, double p_out,
                        std::uint64_t seed);

/// G(n, p) without features or labels.
Graph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Random user/item interaction graph; every user gets at least one item.
Graph random_bipartite(std::size_t users, std::size_t items, double p, std::uint64_t seed);

}  // namespace linkpoison::graph
