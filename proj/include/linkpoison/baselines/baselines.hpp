#pragma once

#include <cstdint>
#include <set>
#include <string_view>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::baselines {

using graph::Edge;
using graph::EditList;
using graph::Graph;

/// Pairs a baseline must leave alone (typically the held-out link split).
using PairSet = std::set<Edge>;

enum class BaselineKind { kRandomFlip, kDice, kNullModel };

std::string_view baseline_name(BaselineKind kind);
/// Accepts "random-flip", "dice", "null-model"; throws ConfigError otherwise.
BaselineKind parse_baseline(std::string_view name);

/// `budget` distinct pairs drawn uniformly from the allowed off-diagonal
/// pairs; edges become removals, non-edges additions. Throws InfeasibleError
/// when fewer than `budget` pairs are available.
EditList random_flip(const Graph& g, std::size_t budget, std::uint64_t seed,
                     const PairSet& forbidden = {});

/// Disconnect internally, connect externally: each step a fair coin picks
/// between removing a same-label edge and adding a cross-label non-edge,
/// falling back to the other pool when one is empty. Throws ConfigError
/// without labels; warns on shortfall.
EditList dice(const Graph& g, std::size_t budget, std::uint64_t seed,
              const PairSet& forbidden = {});

/// Degree-preserving double-edge swaps (a,b),(c,d) -> (a,d),(c,b). Forbidden
/// pairs are neither removed nor created. Gives up with a warning after
/// 100 * swaps + 1000 rejected proposals. Throws DomainError with < 2 edges.
Graph null_model(const Graph& g, std::size_t swaps, std::uint64_t seed,
                 const PairSet& forbidden = {});

/// Swap count whose four flips per swap stay within a flip budget.
std::size_t swaps_for_budget(std::size_t budget);

/// Pairs that differ between two graphs over the same nodes, as edits
/// relative to `before` (magnitude 0).
EditList edits_between(const Graph& before, const Graph& after);

}  // namespace linkpoison::baselines
