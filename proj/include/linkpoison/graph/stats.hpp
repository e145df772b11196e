#pragma once

#include <string>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::graph {

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double avg_degree = 0.0;
  double density = 0.0;
  std::size_t diameter = 0;        // largest connected component
  double avg_clustering = 0.0;     // mean local coefficient, degree < 2 counts as 0
  double avg_path_length = 0.0;    // largest connected component, ordered pairs
};

/// Throws DomainError on an empty graph.
GraphStats compute_stats(const Graph& g);

/// JSON object with the seven fields.
std::string stats_json(const GraphStats& s);

}  // namespace linkpoison::graph
