#include "cli/commands.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <spdlog/spdlog.h>
#include <sstream>
#include <vector>

#include "linkpoison/attack/attack.hpp"
#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"
#include "linkpoison/experiment/experiment.hpp"
#include "linkpoison/graph/io.hpp"
#include "linkpoison/graph/stats.hpp"
#include "linkpoison/modifier/modifier.hpp"
#include "linkpoison/tensor/checkpoint.hpp"
#include "linkpoison/victims/victims.hpp"

#ifndef LINKPOISON_VERSION
#define LINKPOISON_VERSION "0.0.0"
#endif

namespace linkpoison::cli {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

std::vector<fs::path> inputs_of(const ExperimentConfig& cfg) {
  std::vector<fs::path> out;
  for (const auto& p : {cfg.data.edges, cfg.data.content, cfg.data.cites, cfg.data.features,
                        cfg.data.labels, cfg.poisoned})
    if (p) out.push_back(*p);
  return out;
}

// Writes artifacts into the output directory, refusing to touch inputs, and
// finishes with a manifest describing the run.
class Artifacts {
 public:
  Artifacts(const ExperimentConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(cfg.out_dir);
  }

  fs::path path(const std::string& name) {
    fs::path p = cfg_.out_dir / name;
    for (const auto& in : inputs_of(cfg_))
      if (fs::exists(p) && fs::equivalent(p, in))
        throw ConfigError("refusing to overwrite input file '" + in.string() + "'");
    files_.push_back(name);
    return p;
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream out(path(name), std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write '" + name + "'");
  }

  void finish() {
    json m;
    m["command"] = command_;
    m["version"] = LINKPOISON_VERSION;
    m["build"] = {{"compiler", __VERSION__},
                  {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) +
                                 "." + std::to_string(SPDLOG_VER_PATCH)},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    m["config"] = {{"path", cfg_.source.string()}, {"sha256", sha256_hex(cfg_.text)}};
    m["overrides"] = cfg_.overrides;
    const auto& v = cfg_.settings.victim;
    json victims = json::array();
    for (auto k : cfg_.settings.victims) victims.push_back(victims::victim_name(k));
    json metric_names = json::array();
    for (auto k : cfg_.settings.metrics) metric_names.push_back(metrics::metric_name(k));
    m["effective"] = {
        {"split", {{"train", cfg_.split.train}, {"val", cfg_.split.val}, {"test", cfg_.split.test}}},
        {"attack", json::parse(attack::config_json(cfg_.settings.attack))},
        {"budget", {{"kind", cfg_.budget.kind == modifier::Budget::Kind::kCount ? "count" : "fraction"},
                    {"value", cfg_.budget.value}}},
        {"victim",
         {{"models", victims},
          {"epochs", v.epochs},
          {"lr", v.lr},
          {"hidden", v.hidden},
          {"out", v.out},
          {"embedding", v.embedding},
          {"layers", v.layers},
          {"l2", v.l2},
          {"leaky_slope", v.leaky_slope}}},
        {"metrics", {{"names", metric_names}, {"k", cfg_.settings.metric_k}}}};
    m["seeds"] = {{"split", cfg_.split_seed},
                  {"attack", cfg_.settings.attack.seed},
                  {"victim", cfg_.settings.victim_seed},
                  {"run", cfg_.run_seed},
                  {"sweep", cfg_.seeds}};
    json ins = json::array();
    for (const auto& p : inputs_of(cfg_))
      ins.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    m["inputs"] = ins;
    json outs = json::array();
    for (const auto& f : files_)
      outs.push_back({{"file", f}, {"sha256", sha256_file(cfg_.out_dir / f)}});
    m["outputs"] = outs;
    std::ofstream(cfg_.out_dir / "manifest.json") << m.dump(2) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::vector<std::string> files_;
};

graph::LinkSplit split_of(const ExperimentConfig& cfg, const graph::Graph& g) {
  return graph::make_split(g, cfg.split, cfg.split_seed);
}

// The evaluated graph keeps the clean graph's features, labels and sides.
graph::Graph load_poisoned(const ExperimentConfig& cfg, const graph::Graph& clean) {
  if (!cfg.poisoned) throw ConfigError("no poisoned graph given ([evaluate] poisoned or --poisoned)");
  const auto loaded = graph::load_edge_list(*cfg.poisoned).graph;
  if (loaded.num_nodes() != clean.num_nodes() || loaded.bipartite() != clean.bipartite())
    throw ConfigError("poisoned graph does not share the clean graph's node universe");
  return graph::apply_edits(clean, baselines::edits_between(clean, loaded));
}

}  // namespace

graph::Graph load_dataset(const ExperimentConfig& cfg) {
  graph::Graph g = cfg.data.edges
                       ? graph::load_graph(*cfg.data.edges, cfg.data.features, cfg.data.labels)
                       : graph::load_linqs(*cfg.data.content, *cfg.data.cites).graph;
  if (cfg.data.subset > 0 && cfg.data.subset < g.num_nodes())
    g = graph::connected_subset(g, cfg.data.subset);
  spdlog::info("{}: {} nodes, {} edges", cfg.data.name, g.num_nodes(), g.num_edges());
  return g;
}

void cmd_attack(const ExperimentConfig& cfg) {
  const auto g = load_dataset(cfg);
  const auto split = split_of(cfg, g);
  attack::AttackConfig a = cfg.settings.attack;
  a.seed += cfg.run_seed;
  const auto mg = attack::run_attack(g, split, a);
  const std::size_t budget = modifier::resolve_budget(cfg.budget, g.num_edges());
  const auto edits = modifier::select_edits(modifier::symmetrize(mg.value), g, budget);
  const auto poisoned = modifier::poison(g, edits);
  spdlog::info("attack: {} of {} edits applied", edits.size(), budget);

  Artifacts out(cfg, "attack");
  out.write("poisoned.edges", graph::edge_list_text(poisoned.graph));
  out.write("edits.csv", modifier::edits_csv(edits));
  out.path("meta_gradient.bin");
  out.path("meta_gradient.json");
  attack::export_meta_gradient(mg, a, cfg.out_dir / "meta_gradient");
  out.finish();
}

void cmd_evaluate(const ExperimentConfig& cfg) {
  const auto clean = load_dataset(cfg);
  const auto poisoned = load_poisoned(cfg, clean);
  const auto split = split_of(cfg, clean);
  const auto flips = baselines::edits_between(clean, poisoned).size();
  const auto& s = cfg.settings;
  const std::uint64_t seed = s.victim_seed + cfg.run_seed;
  const auto test_pairs = [&] {
    auto pairs = split.test_pos;
    pairs.insert(pairs.end(), split.test_neg.begin(), split.test_neg.end());
    return pairs;
  }();

  Artifacts out(cfg, "evaluate");
  std::string lines;
  for (auto kind : s.victims) {
    const std::string name(victims::victim_name(kind));
    const auto m_clean = victims::train_victim(kind, clean, split, s.victim, seed);
    const auto m_poisoned = victims::train_victim(kind, poisoned, split, s.victim, seed);
    for (auto metric : s.metrics) {
      const auto r = metrics::make_record(
          name, s.dataset, static_cast<double>(flips), "input", cfg.run_seed,
          std::string(metrics::metric_name(metric)),
          victims::evaluate(m_clean, clean, split, metric, s.metric_k),
          victims::evaluate(m_poisoned, clean, split, metric, s.metric_k));
      lines += metrics::to_json_line(r) + "\n";
    }
    for (const auto& [tag, m] : {std::pair{"clean", &m_clean}, std::pair{"poisoned", &m_poisoned}}) {
      tensor::save_checkpoint(m->params, out.path(name + "-" + tag + ".ckpt"));
      victims::save_predictions(*m, test_pairs, out.path(name + "-" + tag + ".predictions.csv"));
    }
  }
  out.write("metrics.jsonl", lines);
  out.finish();
}

void cmd_sweep(const ExperimentConfig& cfg) {
  const auto g = load_dataset(cfg);
  const auto split = split_of(cfg, g);
  const auto result =
      experiment::compare_schemes(g, split, cfg.budgets, cfg.schemes, cfg.seeds, cfg.settings);
  std::string lines;
  for (const auto& r : result.records) lines += metrics::to_json_line(r) + "\n";
  json cells = json::array();
  for (const auto& c : result.cells)
    cells.push_back({{"scheme", c.scheme}, {"budget", c.budget}, {"model", c.model},
                     {"metric", c.metric}, {"runs", c.runs}, {"clean", c.clean},
                     {"poisoned", c.poisoned}, {"delta", c.delta}, {"delta_std", c.delta_std}});
  Artifacts out(cfg, "sweep");
  out.write("sweep.csv", experiment::cells_csv(result.cells));
  out.write("drop_table.csv", experiment::drop_table_csv(result.cells));
  out.write("sweep.json", json{{"dataset", cfg.data.name}, {"cells", cells}}.dump(2) + "\n");
  out.write("records.jsonl", lines);
  out.finish();
}

void cmd_stats(const ExperimentConfig& cfg, std::ostream& os) {
  const auto g = load_dataset(cfg);
  json report;
  report["dataset"] = cfg.data.name;
  report["clean"] = json::parse(graph::stats_json(graph::compute_stats(g)));
  if (cfg.poisoned)
    report["poisoned"] = json::parse(graph::stats_json(graph::compute_stats(load_poisoned(cfg, g))));
  const std::string text = report.dump(2) + "\n";
  Artifacts out(cfg, "stats");
  out.write("stats.json", text);
  out.finish();
  os << text;
}

void cmd_baseline(const ExperimentConfig& cfg) {
  const auto g = load_dataset(cfg);
  const auto split = split_of(cfg, g);
  const std::size_t budget = modifier::resolve_budget(cfg.budget, g.num_edges());
  const auto p = experiment::poison_with(g, split, cfg.baseline, budget, cfg.settings, cfg.run_seed);
  Artifacts out(cfg, "baseline");
  out.write("poisoned.edges", graph::edge_list_text(p.graph));
  out.write("edits.csv", modifier::edits_csv(p.edits));
  out.finish();
}

}  // namespace linkpoison::cli
