#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "linkpoison/graph/graph.hpp"

namespace linkpoison::graph {

/// Counts gathered while parsing an edge list.
struct LoadReport {
  std::size_t lines_read = 0;
  std::size_t raw_edges = 0;     // edge lines as written, self-loops included
  std::size_t unique_edges = 0;  // after dropping duplicates and reversals
  std::size_t self_loops = 0;
};

struct LoadedGraph {
  Graph graph;
  LoadReport report;
};

/// Edge list: one "u v" pair per line. Optional header lines "#nodes=N" and
/// "#users=U" (the latter marks a bipartite user/item graph); other lines
/// starting with '#' are comments. Node count is max id + 1 unless given.
LoadedGraph load_edge_list(const std::filesystem::path& path);

Graph load_graph(const std::filesystem::path& edges,
                 const std::optional<std::filesystem::path>& features = std::nullopt,
                 const std::optional<std::filesystem::path>& labels = std::nullopt);

/// CSV, one row per node.
Matrix load_features(const std::filesystem::path& path);

/// CSV "node,label"; an optional non-numeric header line is skipped. Every
/// node in [0, n) must be labelled.
std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n);

/// Canonical edge list: header, then "u v" with u < v in lexicographic order.
void save_edge_list(const Graph& g, const std::filesystem::path& path);
std::string edge_list_text(const Graph& g);
void save_features(const Matrix& features, const std::filesystem::path& path);
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// LINQS citation format: "<paper-id> <f1> ... <fd> <class>" per node and
/// "<cited> <citing>" per citation. Node order follows the content file;
/// class names become integer ids in order of first appearance.
LoadedGraph load_linqs(const std::filesystem::path& content, const std::filesystem::path& cites);

}  // namespace linkpoison::graph
