#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "cli/config.hpp"
#include "linkpoison/graph/graph.hpp"

namespace linkpoison::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// Loads the configured dataset, cut to a connected subset when asked.
graph::Graph load_dataset(const ExperimentConfig& cfg);

/// Each command writes its artifacts plus manifest.json into cfg.out_dir.
/// attack:   poisoned.edges, edits.csv, meta_gradient.{bin,json}
/// evaluate: metrics.jsonl (victims x metrics records), per victim a
///           checkpoint and test-pair predictions for both trainings
/// sweep:    sweep.csv, drop_table.csv, sweep.json, records.jsonl
/// stats:    stats.json, also printed to `out`
/// baseline: poisoned.edges, edits.csv
void cmd_attack(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_sweep(const ExperimentConfig& cfg);
void cmd_stats(const ExperimentConfig& cfg, std::ostream& out);
void cmd_baseline(const ExperimentConfig& cfg);

}  // namespace linkpoison::cli
