#include "linkpoison/graph/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "linkpoison/errors.hpp"

namespace linkpoison::graph {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_on(std::string_view s, auto is_sep) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_sep(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_sep(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  return split_on(s, [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

template <class T>
bool parse_number(std::string_view token, T& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_header(std::string_view line, std::string_view key, std::size_t& value) {
  if (line.rfind(key, 0) != 0) return false;
  return parse_number(trim(line.substr(key.size())), value);
}

}  // namespace

LoadedGraph load_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::optional<std::size_t> declared_nodes;
  std::optional<std::size_t> declared_users;
  std::set<Edge> unique;
  LoadReport report;
  std::size_t max_id = 0;
  bool any = false;

  std::string raw;
  while (std::getline(in, raw)) {
    ++report.lines_read;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::size_t v = 0;
      if (parse_header(line, "#nodes=", v)) {
        declared_nodes = v;
      } else if (parse_header(line, "#users=", v)) {
        declared_users = v;
      }
      continue;
    }
    const auto tokens = split_ws(line);
    std::size_t u = 0;
    std::size_t v = 0;
    if (tokens.size() != 2 || !parse_number(tokens[0], u) || !parse_number(tokens[1], v)) {
      throw ParseError(path.string() + ": expected two non-negative integer ids, got '" +
                           std::string(line) + "'",
                       report.lines_read);
    }
    ++report.raw_edges;
    if (u == v) {
      ++report.self_loops;
      spdlog::warn("{}:{}: dropping self-loop on node {}", path.string(), report.lines_read, u);
      max_id = std::max(max_id, u);
      any = true;
      continue;
    }
    unique.insert(Edge::canonical(u, v));
    max_id = std::max({max_id, u, v});
    any = true;
  }

  std::size_t n = any ? max_id + 1 : 0;
  if (declared_nodes) {
    if (any && max_id >= *declared_nodes) {
      throw ParseError(path.string() + ": node id " + std::to_string(max_id) +
                       " exceeds declared node count " + std::to_string(*declared_nodes));
    }
    n = *declared_nodes;
  }
  report.unique_edges = unique.size();
  std::vector<Edge> edges(unique.begin(), unique.end());
  Graph g(n, edges);
  if (declared_users) {
    if (*declared_users > n) throw ParseError(path.string() + ": #users exceeds node count");
    g = g.with_bipartite({*declared_users, n - *declared_users});
  }
  return {std::move(g), report};
}

Matrix load_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto tokens = split_on(line, [](char c) { return c == ','; });
    if (rows == 0) cols = tokens.size();
    if (tokens.size() != cols) {
      throw ParseError(path.string() + ": expected " + std::to_string(cols) + " columns", line_no);
    }
    for (auto tok : tokens) {
      double v = 0.0;
      if (!parse_number(trim(tok), v)) {
        throw ParseError(path.string() + ": bad number '" + std::string(tok) + "'", line_no);
      }
      data.push_back(v);
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n) {
  auto in = open_input(path);
  std::vector<int> labels(n, -1);
  std::size_t line_no = 0;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto tokens = split_on(line, [](char c) { return c == ','; });
    std::size_t node = 0;
    int label = 0;
    const bool ok = tokens.size() == 2 && parse_number(trim(tokens[0]), node) &&
                    parse_number(trim(tokens[1]), label);
    if (!ok) {
      if (line_no == 1) continue;  // header
      throw ParseError(path.string() + ": expected 'node,label'", line_no);
    }
    if (node >= n) {
      throw ParseError(path.string() + ": node " + std::to_string(node) + " out of range", line_no);
    }
    labels[node] = label;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) throw ParseError(path.string() + ": node " + std::to_string(i) + " has no label");
  }
  return labels;
}

Graph load_graph(const std::filesystem::path& edges,
                 const std::optional<std::filesystem::path>& features,
                 const std::optional<std::filesystem::path>& labels) {
  Graph g = load_edge_list(edges).graph;
  if (features) g = g.with_features(load_features(*features));
  if (labels) g = g.with_labels(load_labels(*labels, g.num_nodes()));
  return g;
}

std::string edge_list_text(const Graph& g) {
  std::ostringstream out;
  out << "#nodes=" << g.num_nodes() << '\n';
  if (g.bipartite()) out << "#users=" << g.bipartite()->users << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << edge_list_text(g);
}

void save_features(const Matrix& features, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out.precision(17);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      if (c) out << ',';
      out << features(r, c);
    }
    out << '\n';
  }
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

LoadedGraph load_linqs(const std::filesystem::path& content, const std::filesystem::path& cites) {
  auto in = open_input(content);
  std::unordered_map<std::string, std::size_t> index;
  std::vector<int> class_order_labels;
  std::vector<double> features;
  std::size_t dims = 0;
  std::size_t line_no = 0;
  std::string raw;
  std::vector<std::string> class_names;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() < 3) throw ParseError(content.string() + ": too few columns", line_no);
    const std::size_t d = tokens.size() - 2;
    if (index.empty()) dims = d;
    if (d != dims) throw ParseError(content.string() + ": inconsistent feature width", line_no);
    const std::string id(tokens.front());
    if (!index.emplace(id, index.size()).second) {
      throw ParseError(content.string() + ": duplicate paper id " + id, line_no);
    }
    for (std::size_t k = 1; k + 1 < tokens.size(); ++k) {
      double v = 0.0;
      if (!parse_number(tokens[k], v)) throw ParseError(content.string() + ": bad feature", line_no);
      features.push_back(v);
    }
    const std::string cls(tokens.back());
    auto it = std::find(class_names.begin(), class_names.end(), cls);
    if (it == class_names.end()) {
      class_names.push_back(cls);
      it = class_names.end() - 1;
    }
    class_order_labels.push_back(static_cast<int>(it - class_names.begin()));
  }
  const std::size_t n = index.size();

  auto cin = open_input(cites);
  std::set<Edge> unique;
  LoadReport report;
  line_no = 0;
  std::size_t unknown = 0;
  while (std::getline(cin, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError(cites.string() + ": expected two ids", line_no);
    ++report.raw_edges;
    auto a = index.find(std::string(tokens[0]));
    auto b = index.find(std::string(tokens[1]));
    if (a == index.end() || b == index.end()) {
      ++unknown;
      continue;
    }
    if (a->second == b->second) {
      ++report.self_loops;
      continue;
    }
    unique.insert(Edge::canonical(a->second, b->second));
  }
  report.lines_read = line_no;
  report.unique_edges = unique.size();
  if (unknown) spdlog::warn("{}: skipped {} citations to unknown papers", cites.string(), unknown);
  if (report.self_loops) spdlog::warn("{}: dropped {} self-citations", cites.string(), report.self_loops);

  std::vector<Edge> edges(unique.begin(), unique.end());
  Graph g = Graph(n, edges)
                .with_features(Matrix(n, dims, std::move(features)))
                .with_labels(std::move(class_order_labels));
  return {std::move(g), report};
}

}  // namespace linkpoison::graph
