#include "linkpoison/experiment/experiment.hpp"

#include <cmath>
#include <algorithm>
#include <map>
#include <tuple>
#include <sstream>

#include "linkpoison/baselines/baselines.hpp"
#include "linkpoison/errors.hpp"

namespace linkpoison::experiment {

namespace {

constexpr std::string_view kMetaSchemes[] = {"uniform", "magnitude", "performance", "linear"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool is_baseline(std::string_view scheme) {
  for (auto m : kMetaSchemes)
    if (m == scheme) return false;
  return true;
}

void validate_scheme(std::string_view scheme) {
  if (is_baseline(scheme)) baselines::parse_baseline(scheme);
}

Poisoning poison_with(const Graph& g, const LinkSplit& split, std::string_view scheme,
                      std::size_t budget, const Settings& s, std::uint64_t seed) {
  validate_scheme(scheme);
  if (budget == 0) return {g, {}, 0};
  if (!is_baseline(scheme)) {
    attack::AttackConfig cfg = s.attack;
    cfg.scheme = attack::parse_scheme(scheme);
    cfg.seed = s.attack.seed + seed;
    const auto mg = attack::run_attack(g, split, cfg);
    auto edits = modifier::select_edits(modifier::symmetrize(mg.value), g, budget);
    auto p = modifier::poison(g, edits);
    return {std::move(p.graph), std::move(p.edits), budget};
  }
  const auto held = split.held_out();
  const baselines::PairSet forbidden(held.begin(), held.end());
  const std::uint64_t bseed = s.attack.seed + seed;
  switch (baselines::parse_baseline(scheme)) {
    case baselines::BaselineKind::kRandomFlip: {
      auto p = modifier::poison(g, baselines::random_flip(g, budget, bseed, forbidden));
      return {std::move(p.graph), std::move(p.edits), budget};
    }
    case baselines::BaselineKind::kDice: {
      auto p = modifier::poison(g, baselines::dice(g, budget, bseed, forbidden));
      return {std::move(p.graph), std::move(p.edits), budget};
    }
    case baselines::BaselineKind::kNullModel: {
      Graph out = baselines::null_model(g, baselines::swaps_for_budget(budget), bseed, forbidden);
      auto edits = baselines::edits_between(g, out);
      return {std::move(out), std::move(edits), budget};
    }
  }
  throw ConfigError("unknown scheme");
}

CleanScores score_clean(const Graph& g, const LinkSplit& split, const Settings& s,
                        std::uint64_t seed) {
  CleanScores out;
  for (auto kind : s.victims) {
    const auto m = victims::train_victim(kind, g, split, s.victim, s.victim_seed + seed);
    auto& row = out.values.emplace_back();
    for (auto metric : s.metrics) row.push_back(victims::evaluate(m, g, split, metric, s.metric_k));
  }
  return out;
}

std::vector<MetricRecord> score_poisoned(const Graph& clean, const Graph& poisoned,
                                         const LinkSplit& split, const Settings& s,
                                         const CleanScores& base, double budget_label,
                                         std::string_view scheme, std::uint64_t seed) {
  std::vector<MetricRecord> out;
  const bool unchanged = poisoned.adjacency() == clean.adjacency();
  for (std::size_t v = 0; v < s.victims.size(); ++v) {
    const auto kind = s.victims[v];
    std::vector<double> scores;
    if (unchanged) {
      scores = base.values[v];
    } else {
      const auto m = victims::train_victim(kind, poisoned, split, s.victim, s.victim_seed + seed);
      for (auto metric : s.metrics)
        scores.push_back(victims::evaluate(m, clean, split, metric, s.metric_k));
    }
    for (std::size_t k = 0; k < s.metrics.size(); ++k)
      out.push_back(metrics::make_record(std::string(victims::victim_name(kind)), s.dataset,
                                         budget_label, std::string(scheme), seed,
                                         std::string(metrics::metric_name(s.metrics[k])),
                                         base.values[v][k], scores[k]));
  }
  return out;
}

SweepResult compare_schemes(const Graph& g, const LinkSplit& split,
                            const std::vector<Budget>& budgets,
                            const std::vector<std::string>& schemes,
                            const std::vector<std::uint64_t>& seeds, const Settings& s) {
  for (const auto& name : schemes) validate_scheme(name);
  std::map<std::uint64_t, CleanScores> clean;
  for (auto seed : seeds)
    if (!clean.contains(seed)) clean.emplace(seed, score_clean(g, split, s, seed));

  SweepResult out;
  for (const auto& name : schemes)
    for (const auto& b : budgets) {
      const std::size_t flips = modifier::resolve_budget(b, g.num_edges());
      const std::size_t first = out.records.size();
      for (auto seed : seeds) {
        const auto p = poison_with(g, split, name, flips, s, seed);
        auto recs = score_poisoned(g, p.graph, split, s, clean.at(seed), b.value, name, seed);
        out.records.insert(out.records.end(), recs.begin(), recs.end());
      }
      // Records of this block are ordered seed, victim, metric.
      const std::size_t per_seed = s.victims.size() * s.metrics.size();
      for (std::size_t c = 0; c < per_seed; ++c) {
        Cell cell;
        cell.scheme = name;
        cell.budget = b.value;
        const auto& r0 = out.records[first + c];
        cell.model = r0.model;
        cell.metric = r0.metric;
        std::vector<double> deltas;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
          const auto& r = out.records[first + k * per_seed + c];
          cell.clean += r.clean;
          cell.poisoned += r.poisoned;
          deltas.push_back(r.delta);
          cell.delta += r.delta;
        }
        cell.runs = seeds.size();
        if (cell.runs > 0) {
          const double n = static_cast<double>(cell.runs);
          cell.clean /= n;
          cell.poisoned /= n;
          cell.delta /= n;
          if (cell.runs > 1) {
            double ss = 0.0;
            for (double d : deltas) ss += (d - cell.delta) * (d - cell.delta);
            cell.delta_std = std::sqrt(ss / (n - 1.0));
          }
        }
        out.cells.push_back(std::move(cell));
      }
    }
  return out;
}

std::string cells_csv(const std::vector<Cell>& cells) {
  std::ostringstream os;
  os << "scheme,budget,model,metric,runs,clean,poisoned,delta,delta_std\n";
  for (const auto& c : cells)
    os << c.scheme << ',' << fmt(c.budget) << ',' << c.model << ',' << c.metric << ',' << c.runs
       << ',' << fmt(c.clean) << ',' << fmt(c.poisoned) << ',' << fmt(c.delta) << ','
       << fmt(c.delta_std) << '\n';
  return os.str();
}

std::string drop_table_csv(const std::vector<Cell>& cells) {
  std::vector<std::string> schemes;
  // Row key keeps first-appearance order of (model, metric, budget).
  std::vector<std::tuple<std::string, std::string, double>> rows;
  std::map<std::tuple<std::string, std::string, double, std::string>, double> value;
  for (const auto& c : cells) {
    if (std::find(schemes.begin(), schemes.end(), c.scheme) == schemes.end())
      schemes.push_back(c.scheme);
    auto key = std::make_tuple(c.model, c.metric, c.budget);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    value[{c.model, c.metric, c.budget, c.scheme}] = c.delta;
  }
  std::ostringstream os;
  os << "model,metric,budget";
  for (const auto& s : schemes) os << ',' << s;
  os << '\n';
  for (const auto& [model, metric, budget] : rows) {
    os << model << ",delta_" << metric << ',' << fmt(budget);
    for (const auto& s : schemes) {
      auto it = value.find({model, metric, budget, s});
      os << ',';
      if (it != value.end()) os << fmt(it->second);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace linkpoison::experiment
