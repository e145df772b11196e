#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"
#include "linkpoison/graph/generators.hpp"
#include "linkpoison/graph/io.hpp"
#include "linkpoison/metrics/metrics.hpp"
#include "linkpoison/modifier/modifier.hpp"
#include "linkpoison/tensor/checkpoint.hpp"
#include "support/tempdir.hpp"

using namespace linkpoison;
using namespace linkpoison::cli;
using json = nlohmann::json;

namespace {

using Sections = std::map<std::string, std::map<std::string, std::string>>;

// Small labelled graph on disk plus a fast config around it.
struct Workspace {
  testutil::TempDir dir;
  graph::Graph g = graph::planted_partition(30, 2, 0.35, 0.05, 3);

  Workspace() {
    graph::save_edge_list(g, dir / "toy.edges");
    graph::save_labels(*g.labels(), dir / "toy.labels");
    graph::save_features(*g.features(), dir / "toy.features");
  }

  // Base settings per section; `extra` entries add or replace keys.
  std::string config(const Sections& extra = {}) const {
    Sections all{{"data", {{"edges", "toy.edges"}, {"labels", "toy.labels"}, {"features", "toy.features"}}},
                 {"split", {{"seed", "1"}}},
                 {"attack", {{"epochs", "4"}, {"budget", "5%"}, {"hidden", "8"}, {"latent", "4"}}},
                 {"victim", {{"epochs", "5"}, {"hidden", "8"}, {"out", "4"}}},
                 {"metrics", {{"names", "roc_auc, ap"}}}};
    for (const auto& [section, keys] : extra)
      for (const auto& [k, v] : keys) all[section][k] = v;
    std::string text;
    for (const auto& [section, keys] : all) {
      text += "[" + section + "]\n";
      for (const auto& [k, v] : keys) text += k + " = " + v + "\n";
    }
    return text;
  }

  ExperimentConfig load(const Sections& extra = {}, const std::string& name = "run.ini") const {
    dir.write(name, config(extra));
    return load_config(dir / name);
  }
};

int run_tool(const std::string& args) {
  const std::string cmd = std::string(LINKPOISON_TOOL) + " --log-level off " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("budget parsing") {
  auto b = parse_budget("5%");
  CHECK(b.kind == modifier::Budget::Kind::kFraction);
  CHECK(b.value == doctest::Approx(0.05));
  CHECK(parse_budget("0.025").kind == modifier::Budget::Kind::kFraction);
  auto c = parse_budget("12");
  CHECK(c.kind == modifier::Budget::Kind::kCount);
  CHECK(c.value == 12.0);
  CHECK_THROWS_AS(parse_budget("0.6"), ConfigError);
  CHECK_THROWS_AS(parse_budget("60%"), ConfigError);
  CHECK_THROWS_AS(parse_budget("lots"), ConfigError);
  CHECK_THROWS_AS(parse_budget("-3"), ConfigError);
}

TEST_CASE("config validation") {
  Workspace w;
  auto cfg = w.load({{"sweep", {{"schemes", "linear, null-model"}, {"budgets", "1%, 2.5%"}, {"seeds", "3, 4"}}}});
  CHECK(cfg.data.edges == w.dir / "toy.edges");
  CHECK(cfg.data.name == "toy");
  CHECK(cfg.settings.attack.epochs == 4);
  CHECK(cfg.schemes == std::vector<std::string>{"linear", "null-model"});
  CHECK(cfg.budgets.size() == 2);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(cfg.settings.metrics.size() == 2);
  CHECK(cfg.out_dir == w.dir.path() / "out");

  CHECK_THROWS_AS(w.load({{"attack", {{"epoch", "3"}}}}), ConfigError);
  CHECK_THROWS_AS(w.load({{"bogus", {{"x", "1"}}}}), ConfigError);
  CHECK_THROWS_AS(w.load({{"victim", {{"models", "gcn"}}}}), ConfigError);
  CHECK_THROWS_AS(w.load({{"sweep", {{"schemes", "loud"}}}}), ConfigError);
  CHECK_THROWS_AS(w.load({{"split", {{"val", "1.5"}}}}), ConfigError);
  CHECK_THROWS_AS(w.load({{"data", {{"features", "missing.csv"}}}}), ConfigError);
  w.dir.write("bad.ini", "[attack]\nlr = fast\n[data]\nedges = toy.edges\n");
  CHECK_THROWS_AS(load_config(w.dir / "bad.ini"), ConfigError);

  override_mode(cfg, attack::Mode::kFullUnroll);
  CHECK(cfg.settings.attack.optimizer == tensor::OptimizerKind::kGradientDescent);
  override_seed(cfg, 9);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{9});
  CHECK(cfg.overrides.at("seed") == "9");
}

TEST_CASE("attack with zero budget reproduces the input graph") {
  Workspace w;
  auto cfg = w.load({{"output", {{"dir", "zero"}}}});
  cfg.budget = modifier::Budget::count(0);
  cmd_attack(cfg);
  CHECK(testutil::read_file(w.dir / "zero/poisoned.edges") ==
        testutil::read_file(w.dir / "toy.edges"));
  CHECK(testutil::read_file(w.dir / "zero/edits.csv") == "i,j,action,magnitude\n");
}

TEST_CASE("attack artifacts are reproducible and inputs untouched") {
  Workspace w;
  const auto before = sha256_file(w.dir / "toy.edges");
  auto a = w.load({{"output", {{"dir", "a"}}}});
  auto b = w.load({{"output", {{"dir", "b"}}}}, "run2.ini");
  b.text = a.text;  // same bytes apart from the output directory
  cmd_attack(a);
  cmd_attack(b);
  for (const char* f : {"poisoned.edges", "edits.csv", "meta_gradient.bin", "meta_gradient.json"})
    CHECK(testutil::read_file(w.dir / "a" / f) == testutil::read_file(w.dir / "b" / f));
  CHECK(sha256_file(w.dir / "toy.edges") == before);

  const auto edits = modifier::load_edits(w.dir / "a/edits.csv");
  CHECK(edits.size() == modifier::resolve_budget(a.budget, w.g.num_edges()));
  const auto m = json::parse(testutil::read_file(w.dir / "a/manifest.json"));
  CHECK(m["command"] == "attack");
  CHECK(m["config"]["sha256"] == sha256_hex(a.text));
  CHECK(m["seeds"]["split"] == 1);
  CHECK(m["inputs"].size() == 3);
  CHECK(m["outputs"].size() == 4);
  CHECK(m["outputs"][0]["sha256"] == sha256_file(w.dir / "a/poisoned.edges"));
}

TEST_CASE("evaluate: clean against itself gives zero deltas") {
  Workspace w;
  auto cfg = w.load({{"victim", {{"models", "vgae, gat"}}}});
  cfg.poisoned = w.dir / "toy.edges";
  cmd_evaluate(cfg);
  std::istringstream lines(testutil::read_file(cfg.out_dir / "metrics.jsonl"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto r = metrics::record_from_json(line);
    CHECK(r.delta == 0.0);
    CHECK(r.clean == r.poisoned);
    ++count;
  }
  CHECK(count == 2 * 2);
  for (const char* model : {"vgae", "gat"}) {
    const auto ck = tensor::load_checkpoint(cfg.out_dir / (std::string(model) + "-clean.ckpt"));
    const auto ck2 = tensor::load_checkpoint(cfg.out_dir / (std::string(model) + "-poisoned.ckpt"));
    CHECK(ck.tensors == ck2.tensors);
    const auto pred = testutil::read_file(cfg.out_dir / (std::string(model) + "-clean.predictions.csv"));
    CHECK(pred.rfind("i,j,score\n", 0) == 0);
  }
  const auto manifest = json::parse(testutil::read_file(cfg.out_dir / "manifest.json"));
  CHECK(manifest["effective"]["victim"]["epochs"] == 5);
  CHECK(manifest["effective"]["victim"]["models"].size() == 2);

  graph::save_edge_list(graph::planted_partition(31, 2, 0.3, 0.05, 1), w.dir / "other.edges");
  cfg.poisoned = w.dir / "other.edges";
  CHECK_THROWS_AS(cmd_evaluate(cfg), ConfigError);
}

TEST_CASE("sweep grid shape") {
  Workspace w;
  auto cfg = w.load({{"sweep",
                      {{"schemes", "uniform, magnitude, performance, linear"},
                       {"budgets", "0, 2.5%, 5%"},
                       {"seeds", "0, 1"}}},
                     {"metrics", {{"names", "roc_auc"}}}});
  cmd_sweep(cfg);
  std::istringstream lines(testutil::read_file(cfg.out_dir / "records.jsonl"));
  std::string line;
  std::size_t runs = 0;
  while (std::getline(lines, line)) {
    const auto r = metrics::record_from_json(line);
    if (r.budget == 0.0) CHECK(r.delta == 0.0);
    ++runs;
  }
  CHECK(runs == 3 * 4 * 2);
  const std::string csv = testutil::read_file(cfg.out_dir / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 3);
  const std::string table = testutil::read_file(cfg.out_dir / "drop_table.csv");
  CHECK(table.rfind("model,metric,budget,uniform,magnitude,performance,linear\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 3);
  const auto j = json::parse(testutil::read_file(cfg.out_dir / "sweep.json"));
  CHECK(j["cells"].size() == 12);
}

TEST_CASE("stats and baseline commands") {
  Workspace w;
  auto cfg = w.load({{"baseline", {{"kind", "dice"}}}});
  std::ostringstream os;
  cmd_stats(cfg, os);
  const auto s = json::parse(os.str());
  CHECK(s["clean"]["nodes"] == 30);
  CHECK(s["clean"]["edges"] == w.g.num_edges());

  cmd_baseline(cfg);
  const auto edits = modifier::load_edits(cfg.out_dir / "edits.csv");
  CHECK(edits.size() == modifier::resolve_budget(cfg.budget, w.g.num_edges()));
  const auto poisoned = graph::load_edge_list(cfg.out_dir / "poisoned.edges").graph;
  CHECK(baselines::edits_between(w.g, poisoned).size() == edits.size());
}

TEST_CASE("exit codes") {
  Workspace w;
  w.dir.write("ok.ini", w.config());
  w.dir.write("typo.ini", w.config({{"attack", {{"schem", "linear"}}}}));
  w.dir.write("broken.edges", "0 1\n1 x\n");
  w.dir.write("broken.ini", w.config({{"data", {{"edges", "broken.edges"}}}}));
  const std::string d = w.dir.path().string();
  CHECK(run_tool("stats --config " + d + "/ok.ini") == 0);
  CHECK(run_tool("baseline --config " + d + "/ok.ini --seed 3 --out " + d + "/o2") == 0);
  CHECK(run_tool("stats --config " + d + "/typo.ini") == 1);
  CHECK(run_tool("stats") == 1);
  CHECK(run_tool("attack --config " + d + "/ok.ini --mode sideways") == 1);
  CHECK(run_tool("stats --config " + d + "/broken.ini") == 2);
}
