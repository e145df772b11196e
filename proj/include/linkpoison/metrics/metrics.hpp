#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linkpoison::metrics {

/// Scores and binary relevance for one ranking problem. Higher scores rank
/// first; equal scores keep their input order.
struct RankedEval {
  std::vector<double> scores;
  std::vector<int> relevance;
  std::size_t k = 20;
};

/// Probability that a random positive outscores a random negative, ties
/// counted as one half. Throws DomainError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> relevance);

/// Mean precision at the rank of each positive. Throws DomainError without
/// positives.
double average_precision(std::span<const double> scores, std::span<const int> relevance);

/// Binary-relevance NDCG truncated at k; 0 when nothing is relevant.
double ndcg_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k);

/// Fraction of relevant candidates found in the top k. Throws DomainError
/// without relevant candidates.
double recall_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k);

double roc_auc(const RankedEval& e);
double average_precision(const RankedEval& e);
double ndcg_at_k(const RankedEval& e);
double recall_at_k(const RankedEval& e);

/// Candidate order by descending score, stable for ties.
std::vector<std::size_t> ranking(std::span<const double> scores);

enum class MetricKind { kRocAuc, kAveragePrecision, kNdcg, kRecall };

std::string_view metric_name(MetricKind kind);
/// Accepts "roc_auc", "ap", "ndcg", "recall". Throws DomainError otherwise.
MetricKind parse_metric(std::string_view name);

/// One clean-vs-poisoned comparison for a single model and metric.
struct MetricRecord {
  std::string model;
  std::string dataset;
  double budget = 0.0;
  std::string scheme;
  std::uint64_t seed = 0;
  std::string metric;
  double clean = 0.0;
  double poisoned = 0.0;
  double delta = 0.0;
};

MetricRecord make_record(std::string model, std::string dataset, double budget,
                         std::string scheme, std::uint64_t seed, std::string metric,
                         double clean, double poisoned);

std::string to_json_line(const MetricRecord& r);
MetricRecord record_from_json(std::string_view line);

}  // namespace linkpoison::metrics
