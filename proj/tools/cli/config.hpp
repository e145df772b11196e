#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linkpoison/experiment/experiment.hpp"
#include "linkpoison/graph/split.hpp"

namespace linkpoison::cli {

namespace fs = std::filesystem;

struct DataConfig {
  std::optional<fs::path> edges;
  std::optional<fs::path> content;  // LINQS pair
  std::optional<fs::path> cites;
  std::optional<fs::path> features;
  std::optional<fs::path> labels;
  std::size_t subset = 0;  // keep a connected subset of at most this many nodes
  std::string name;
};

/// Parsed experiment file. Relative paths are resolved against the
/// directory holding the file.
struct ExperimentConfig {
  fs::path source;
  std::string text;  // raw bytes, hashed into the manifest
  DataConfig data;
  graph::SplitFractions split;
  std::uint64_t split_seed = 0;
  experiment::Settings settings;
  modifier::Budget budget = modifier::Budget::fraction(0.05);
  std::vector<std::string> schemes{"linear"};
  std::vector<modifier::Budget> budgets{modifier::Budget::fraction(0.05)};
  std::vector<std::uint64_t> seeds{0};
  std::string baseline = "random-flip";
  std::optional<fs::path> poisoned;
  std::uint64_t run_seed = 0;
  fs::path out_dir = "out";
  /// Command-line overrides in effect, recorded in the manifest.
  std::map<std::string, std::string> overrides;
};

/// "5%" and decimals are fractions of the edge count, plain integers are
/// flip counts. Throws ConfigError.
modifier::Budget parse_budget(const std::string& text);

/// INI text with sections [data] [split] [attack] [victim] [metrics] [sweep]
/// [baseline] [evaluate] [output]. Unknown sections or keys, malformed
/// values and missing input files are ConfigErrors.
ExperimentConfig parse_config(const std::string& text, const fs::path& base_dir);
ExperimentConfig load_config(const fs::path& path);

/// Command-line overrides.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);
void override_mode(ExperimentConfig& cfg, attack::Mode mode);

}  // namespace linkpoison::cli
