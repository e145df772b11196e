#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "linkpoison/attack/attack.hpp"
#include "linkpoison/graph/graph.hpp"
#include "linkpoison/graph/split.hpp"
#include "linkpoison/metrics/metrics.hpp"
#include "linkpoison/modifier/modifier.hpp"
#include "linkpoison/victims/victims.hpp"

namespace linkpoison::experiment {

using graph::EditList;
using graph::Graph;
using graph::LinkSplit;
using metrics::MetricRecord;
using modifier::Budget;

/// Everything a run needs besides the graph, split, scheme, budget and seed.
/// The per-run seed is added to attack.seed and victim_seed.
struct Settings {
  std::string dataset = "graph";
  attack::AttackConfig attack;
  std::uint64_t victim_seed = 0;
  victims::VictimOptions victim;
  std::vector<victims::VictimKind> victims{victims::VictimKind::kVgae};
  std::vector<metrics::MetricKind> metrics{metrics::MetricKind::kRocAuc};
  std::size_t metric_k = 20;
};

/// Meta-attack weight schemes ("uniform", "magnitude", "performance",
/// "linear") and baselines ("random-flip", "dice", "null-model").
bool is_baseline(std::string_view scheme);
/// Throws ConfigError for an unknown name.
void validate_scheme(std::string_view scheme);

struct Poisoning {
  Graph graph;
  EditList edits;
  std::size_t budget = 0;
};

/// Applies one scheme at `budget` flips. Meta-attack schemes run the attack
/// and the greedy modifier; baselines leave the held-out pairs alone. A zero
/// budget returns the clean graph without running anything.
Poisoning poison_with(const Graph& g, const LinkSplit& split, std::string_view scheme,
                      std::size_t budget, const Settings& s, std::uint64_t seed);

/// Clean metrics for one victim seed, reused across the poisoned runs.
struct CleanScores {
  std::vector<std::vector<double>> values;  // [victim][metric]
};

CleanScores score_clean(const Graph& g, const LinkSplit& split, const Settings& s,
                        std::uint64_t seed);

/// Trains each victim on the poisoned graph and reports one record per
/// (victim, metric) against the clean scores. Both are scored on the test
/// pairs of `split`.
std::vector<MetricRecord> score_poisoned(const Graph& clean, const Graph& poisoned,
                                         const LinkSplit& split, const Settings& s,
                                         const CleanScores& base, double budget_label,
                                         std::string_view scheme, std::uint64_t seed);

/// Mean and sample standard deviation over seeds of one table cell.
struct Cell {
  std::string scheme;
  double budget = 0.0;
  std::string model;
  std::string metric;
  std::size_t runs = 0;
  double clean = 0.0;
  double poisoned = 0.0;
  double delta = 0.0;
  double delta_std = 0.0;
};

struct SweepResult {
  std::vector<MetricRecord> records;  // one per (scheme, budget, seed, victim, metric)
  std::vector<Cell> cells;            // one per (scheme, budget, victim, metric)
};

/// For each (scheme, budget, seed): poison, retrain victims, compare with
/// clean training on the same seed. Records come out in loop order scheme,
/// budget, seed, victim, metric.
SweepResult compare_schemes(const Graph& g, const LinkSplit& split,
                            const std::vector<Budget>& budgets,
                            const std::vector<std::string>& schemes,
                            const std::vector<std::uint64_t>& seeds, const Settings& s);

/// Long format: scheme,budget,model,metric,runs,clean,poisoned,delta,delta_std.
std::string cells_csv(const std::vector<Cell>& cells);

/// Drop table: one row per (model, metric, budget), one column per scheme
/// holding the mean delta.
std::string drop_table_csv(const std::vector<Cell>& cells);

}  // namespace linkpoison::experiment
