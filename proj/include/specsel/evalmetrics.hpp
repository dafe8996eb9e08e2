#pragma once

// Binary-classification metrics. AUROC uses the rank-sum (Mann-Whitney)
// formulation with average ranks for tied scores.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "specsel/common.hpp"

namespace specsel {

// Area under the ROC curve for scores where larger means "more positive".
// Labels are 1 (positive) and 0 (negative); both classes must be present.
inline double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::numeric, "auroc: scores and labels differ in length");
  if (scores.empty()) throw Error(ErrorKind::numeric, "auroc: empty input");

  std::size_t n = scores.size();
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw Error(ErrorKind::numeric, "auroc: labels must be 0 or 1");
    if (!std::isfinite(scores[i]))
      throw Error(ErrorKind::numeric, "auroc: non-finite score");
    positives += static_cast<std::size_t>(labels[i]);
  }
  std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw Error(ErrorKind::numeric, "auroc: needs both a positive and a negative sample");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Tied scores share the average of the 1-based ranks they span.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (labels[k] == 1) pos_rank_sum += rank[k];

  double p = static_cast<double>(positives);
  double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

// Fraction in [0,1] to a percentage with one decimal place, rounding half up.
inline double to_percent(double fraction) {
  return std::floor(fraction * 1000.0 + 0.5) / 10.0;
}

}  // namespace specsel
