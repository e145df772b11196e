#include "linkpoison/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "linkpoison/errors.hpp"

namespace linkpoison::metrics {

namespace {

void check_lengths(std::span<const double> scores, std::span<const int> relevance,
                   const char* what) {
  if (scores.size() != relevance.size())
    throw ShapeError(std::string(what) + ": scores and relevance differ in length");
  for (int r : relevance)
    if (r != 0 && r != 1) throw DomainError(std::string(what) + ": relevance must be 0 or 1");
}

std::size_t count_relevant(std::span<const int> relevance) {
  return static_cast<std::size_t>(std::count(relevance.begin(), relevance.end(), 1));
}

}  // namespace

std::vector<std::size_t> ranking(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double roc_auc(std::span<const double> scores, std::span<const int> relevance) {
  check_lengths(scores, relevance, "roc_auc");
  const std::size_t pos = count_relevant(relevance);
  const std::size_t neg = relevance.size() - pos;
  if (pos == 0 || neg == 0) throw DomainError("roc_auc: needs both positives and negatives");

  // Mann-Whitney U from midranks; midranks are half-integers so the sum is exact.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double midrank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t t = lo; t < hi; ++t)
      if (relevance[order[t]] == 1) rank_sum += midrank;
    lo = hi;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

double average_precision(std::span<const double> scores, std::span<const int> relevance) {
  check_lengths(scores, relevance, "average_precision");
  const std::size_t pos = count_relevant(relevance);
  if (pos == 0) throw DomainError("average_precision: no positives");
  const auto order = ranking(scores);
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (relevance[order[r]] != 1) continue;
    ++hits;
    total += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return total / static_cast<double>(pos);
}

double ndcg_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k) {
  check_lengths(scores, relevance, "ndcg_at_k");
  if (k == 0) throw DomainError("ndcg_at_k: k must be at least 1");
  const std::size_t pos = count_relevant(relevance);
  if (pos == 0) return 0.0;
  const auto order = ranking(scores);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r)
    if (relevance[order[r]] == 1) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, pos); ++r) ideal += 1.0 / std::log2(static_cast<double>(r + 2));
  return dcg / ideal;
}

double recall_at_k(std::span<const double> scores, std::span<const int> relevance, std::size_t k) {
  check_lengths(scores, relevance, "recall_at_k");
  const std::size_t pos = count_relevant(relevance);
  if (pos == 0) throw DomainError("recall_at_k: no relevant candidates");
  const auto order = ranking(scores);
  std::size_t found = 0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) found += relevance[order[r]] == 1;
  return static_cast<double>(found) / static_cast<double>(pos);
}

double roc_auc(const RankedEval& e) { return roc_auc(e.scores, e.relevance); }
double average_precision(const RankedEval& e) { return average_precision(e.scores, e.relevance); }
double ndcg_at_k(const RankedEval& e) { return ndcg_at_k(e.scores, e.relevance, e.k); }
double recall_at_k(const RankedEval& e) { return recall_at_k(e.scores, e.relevance, e.k); }

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kRocAuc: return "roc_auc";
    case MetricKind::kAveragePrecision: return "ap";
    case MetricKind::kNdcg: return "ndcg";
    case MetricKind::kRecall: return "recall";
  }
  return "?";
}

MetricKind parse_metric(std::string_view name) {
  for (auto kind : {MetricKind::kRocAuc, MetricKind::kAveragePrecision, MetricKind::kNdcg,
                    MetricKind::kRecall})
    if (metric_name(kind) == name) return kind;
  throw DomainError("unknown metric '" + std::string(name) + "'");
}

MetricRecord make_record(std::string model, std::string dataset, double budget,
                         std::string scheme, std::uint64_t seed, std::string metric,
                         double clean, double poisoned) {
  return {std::move(model), std::move(dataset), budget,  std::move(scheme), seed,
          std::move(metric), clean,             poisoned, clean - poisoned};
}

std::string to_json_line(const MetricRecord& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["dataset"] = r.dataset;
  j["budget"] = r.budget;
  j["scheme"] = r.scheme;
  j["seed"] = r.seed;
  j["metric"] = r.metric;
  j["clean"] = r.clean;
  j["poisoned"] = r.poisoned;
  j["delta"] = r.delta;
  return j.dump();
}

MetricRecord record_from_json(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    return {j.at("model"),  j.at("dataset"), j.at("budget"),   j.at("scheme"), j.at("seed"),
            j.at("metric"), j.at("clean"),   j.at("poisoned"), j.at("delta")};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics record: ") + e.what());
  }
}

}  // namespace linkpoison::metrics
