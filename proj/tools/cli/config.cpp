#include "cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"

namespace linkpoison::cli {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"data", {"edges", "content", "cites", "features", "labels", "subset", "name"}},
      {"split", {"train", "val", "test", "seed"}},
      {"attack",
       {"epochs", "scheme", "mode", "optimizer", "lr", "budget", "seed", "target", "mask",
        "hidden", "latent", "max_unroll_nodes"}},
      {"victim",
       {"models", "epochs", "lr", "seed", "hidden", "out", "embedding", "layers", "l2",
        "leaky_slope"}},
      {"metrics", {"names", "k"}},
      {"sweep", {"schemes", "budgets", "seeds"}},
      {"baseline", {"kind"}},
      {"evaluate", {"poisoned"}},
      {"output", {"dir"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, fs::path base) : tree_(tree), base_(std::move(base)) {}

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <class T>
  void number(const std::string& key, T& out) const {
    auto v = raw(key);
    if (!v) return;
    T parsed{};
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (ec != std::errc() || p != v->data() + v->size())
      throw ConfigError("config: " + key + ": expected a number, got '" + *v + "'");
    out = parsed;
  }

  void text(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }

  void flag(const std::string& key, bool& out) const {
    auto v = raw(key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else throw ConfigError("config: " + key + ": expected true/false, got '" + *v + "'");
  }

  void path(const std::string& key, std::optional<fs::path>& out) const {
    auto v = raw(key);
    if (!v) return;
    fs::path p(*v);
    if (p.is_relative()) p = base_ / p;
    if (!fs::exists(p)) throw ConfigError("config: " + key + ": no such file '" + p.string() + "'");
    out = p;
  }

  fs::path base() const { return base_; }

 private:
  const pt::ptree& tree_;
  fs::path base_;
};

void check_schema(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key))
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
  }
}

}  // namespace

modifier::Budget parse_budget(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw ConfigError("config: empty budget");
  const bool percent = t.back() == '%';
  if (percent) t.pop_back();
  const bool fractional = percent || t.find_first_of(".eE") != std::string::npos;
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError("config: bad budget '" + text + "'");
  if (!fractional) {
    if (v < 0) throw ConfigError("config: negative budget '" + text + "'");
    return modifier::Budget::count(static_cast<std::size_t>(v));
  }
  const double f = percent ? v / 100.0 : v;
  if (!(f >= 0.0 && f <= 0.5))
    throw ConfigError("config: budget fraction '" + text + "' outside [0, 0.5]");
  return modifier::Budget::fraction(f);
}

ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  check_schema(tree);
  Reader r(tree, base_dir);
  ExperimentConfig c;
  c.text = text;

  r.path("data.edges", c.data.edges);
  r.path("data.content", c.data.content);
  r.path("data.cites", c.data.cites);
  r.path("data.features", c.data.features);
  r.path("data.labels", c.data.labels);
  r.number("data.subset", c.data.subset);
  r.text("data.name", c.data.name);
  if (c.data.edges.has_value() == (c.data.content.has_value() || c.data.cites.has_value()))
    throw ConfigError("config: [data] needs either edges or content + cites");
  if (c.data.content.has_value() != c.data.cites.has_value())
    throw ConfigError("config: [data] content and cites go together");
  if (c.data.name.empty())
    c.data.name = (c.data.edges ? *c.data.edges : *c.data.content).stem().string();
  c.settings.dataset = c.data.name;

  r.number("split.train", c.split.train);
  r.number("split.val", c.split.val);
  r.number("split.test", c.split.test);
  r.number("split.seed", c.split_seed);
  for (double f : {c.split.train, c.split.val, c.split.test})
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("config: split fractions must lie in [0, 1]");

  auto& a = c.settings.attack;
  r.number("attack.epochs", a.epochs);
  if (auto v = r.raw("attack.scheme")) a.scheme = attack::parse_scheme(*v);
  if (auto v = r.raw("attack.mode")) a.mode = attack::parse_mode(*v);
  if (auto v = r.raw("attack.target")) a.target = attack::parse_target(*v);
  if (auto v = r.raw("attack.optimizer")) {
    try {
      a.optimizer = tensor::parse_optimizer(*v);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  } else if (a.mode == attack::Mode::kFullUnroll) {
    a.optimizer = tensor::OptimizerKind::kGradientDescent;
  }
  r.number("attack.lr", a.lr);
  if (auto v = r.raw("attack.budget")) c.budget = parse_budget(*v);
  r.number("attack.seed", a.seed);
  r.flag("attack.mask", a.mask);
  r.number("attack.hidden", a.dims.hidden);
  r.number("attack.latent", a.dims.latent);
  r.number("attack.max_unroll_nodes", a.max_unroll_nodes);
  if (a.epochs == 0) throw ConfigError("config: attack.epochs must be positive");

  auto& v = c.settings.victim;
  if (auto m = r.raw("victim.models")) {
    c.settings.victims.clear();
    for (const auto& name : split_list(*m)) c.settings.victims.push_back(victims::parse_victim(name));
    if (c.settings.victims.empty()) throw ConfigError("config: victim.models is empty");
  }
  r.number("victim.epochs", v.epochs);
  r.number("victim.lr", v.lr);
  r.number("victim.seed", c.settings.victim_seed);
  r.number("victim.hidden", v.hidden);
  r.number("victim.out", v.out);
  r.number("victim.embedding", v.embedding);
  r.number("victim.layers", v.layers);
  r.number("victim.l2", v.l2);
  r.number("victim.leaky_slope", v.leaky_slope);

  if (auto m = r.raw("metrics.names")) {
    c.settings.metrics.clear();
    for (const auto& name : split_list(*m)) {
      try {
        c.settings.metrics.push_back(metrics::parse_metric(name));
      } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
    if (c.settings.metrics.empty()) throw ConfigError("config: metrics.names is empty");
  }
  r.number("metrics.k", c.settings.metric_k);
  if (c.settings.metric_k == 0) throw ConfigError("config: metrics.k must be positive");

  if (auto s = r.raw("sweep.schemes")) {
    c.schemes = split_list(*s);
    for (const auto& name : c.schemes) experiment::validate_scheme(name);
  } else {
    c.schemes = {std::string(attack::scheme_name(a.scheme))};
  }
  if (auto b = r.raw("sweep.budgets")) {
    c.budgets.clear();
    for (const auto& item : split_list(*b)) c.budgets.push_back(parse_budget(item));
  } else {
    c.budgets = {c.budget};
  }
  if (auto s = r.raw("sweep.seeds")) {
    c.seeds.clear();
    for (const auto& item : split_list(*s)) {
      std::uint64_t seed = 0;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), seed);
      if (ec != std::errc() || p != item.data() + item.size())
        throw ConfigError("config: bad seed '" + item + "'");
      c.seeds.push_back(seed);
    }
  }
  if (c.schemes.empty() || c.budgets.empty() || c.seeds.empty())
    throw ConfigError("config: sweep lists must not be empty");

  r.text("baseline.kind", c.baseline);
  baselines::parse_baseline(c.baseline);
  r.path("evaluate.poisoned", c.poisoned);
  if (auto d = r.raw("output.dir")) {
    fs::path p(*d);
    c.out_dir = p.is_relative() ? base_dir / p : p;
  } else {
    c.out_dir = base_dir / "out";
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str(), fs::absolute(path).parent_path());
  c.source = path;
  return c;
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.run_seed = seed;
  cfg.seeds = {seed};
  cfg.overrides["seed"] = std::to_string(seed);
}

void override_mode(ExperimentConfig& cfg, attack::Mode mode) {
  auto& a = cfg.settings.attack;
  a.mode = mode;
  cfg.overrides["mode"] = std::string(attack::mode_name(mode));
  if (mode == attack::Mode::kFullUnroll) a.optimizer = tensor::OptimizerKind::kGradientDescent;
}

}  // namespace linkpoison::cli
