#pragma once

// Definitional metric implementations: exhaustive pair counting for ROC-AUC
// and explicit rank positions (score first, input order on ties) for the rest.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline std::size_t rank_of(const std::vector<double>& s, std::size_t i) {
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++ahead;
  return ahead + 1;
}

inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& rel) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (rel[p] != 1) continue;
    for (std::size_t q = 0; q < s.size(); ++q) {
      if (rel[q] != 0) continue;
      pairs += 1.0;
      if (s[p] > s[q]) wins += 1.0;
      else if (s[p] == s[q]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double definitional_ap(const std::vector<double>& s, const std::vector<int>& rel) {
  double total = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (rel[i] != 1) continue;
    positives += 1.0;
    const std::size_t r = rank_of(s, i);
    double at_or_above = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (rel[j] == 1 && rank_of(s, j) <= r) at_or_above += 1.0;
    total += at_or_above / static_cast<double>(r);
  }
  return total / positives;
}

inline double definitional_ndcg(const std::vector<double>& s, const std::vector<int>& rel,
                                std::size_t k) {
  std::vector<double> by_rank(s.size() + 1, 0.0);
  std::size_t relevant = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    by_rank[rank_of(s, i)] = rel[i];
    relevant += rel[i] == 1;
  }
  if (relevant == 0) return 0.0;
  double dcg = 0.0;
  double ideal = 0.0;
  for (std::size_t r = 1; r <= k && r <= s.size(); ++r) dcg += by_rank[r] / std::log2(r + 1.0);
  for (std::size_t r = 1; r <= k && r <= relevant; ++r) ideal += 1.0 / std::log2(r + 1.0);
  return dcg / ideal;
}

inline double definitional_recall(const std::vector<double>& s, const std::vector<int>& rel,
                                  std::size_t k) {
  double hit = 0.0;
  double relevant = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (rel[i] != 1) continue;
    relevant += 1.0;
    if (rank_of(s, i) <= k) hit += 1.0;
  }
  return hit / relevant;
}

}  // namespace oracle
