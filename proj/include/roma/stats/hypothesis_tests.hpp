#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roma/error.hpp"
#include "roma/stats/distributions.hpp"

namespace roma::stats {

struct StatResult {
  double statistic = 0.0;
  std::vector<int> df;
  double p_value = 1.0;
  std::optional<std::pair<double, double>> ci95;
  std::optional<double> mean_diff;
  std::string note;
};

struct MeanSd {
  double mean = 0.0;
  std::optional<double> sd;  // sample (n - 1) sd; absent for a single value
};

inline MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::kContract, "mean_sd needs at least one value");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  MeanSd out{mean, std::nullopt};
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
/// Also reports sum of (t^3 - t) over tie groups.
inline std::vector<double> average_ranks(std::span<const double> values, double* tie_term = nullptr) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  double ties = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  if (tie_term) *tie_term = ties;
  return ranks;
}

/// Classic one-way ANOVA; df = (k - 1, N - k).
inline StatResult one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) fail(ErrorKind::kContract, "ANOVA needs at least two groups");
  std::size_t n_total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(ErrorKind::kContract, "every ANOVA group needs at least two values");
    n_total += g.size();
    grand += std::accumulate(g.begin(), g.end(), 0.0);
  }
  grand /= static_cast<double>(n_total);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }
  const int df1 = static_cast<int>(groups.size()) - 1;
  const int df2 = static_cast<int>(n_total - groups.size());
  StatResult r;
  r.df = {df1, df2};
  if (ss_within == 0.0) {
    if (ss_between == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.note = "zero within-group variance";
    }
    return r;
  }
  r.statistic = (ss_between / df1) / (ss_within / df2);
  r.p_value = tail_probability(Distribution::kF, r.statistic, {double(df1), double(df2)});
  return r;
}

/// Kruskal-Wallis H with average ranks and the standard tie correction.
inline StatResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) fail(ErrorKind::kContract, "Kruskal-Wallis needs at least two groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) fail(ErrorKind::kContract, "Kruskal-Wallis groups must be non-empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  if (pooled.size() < 3) fail(ErrorKind::kContract, "Kruskal-Wallis needs N >= 3");
  double ties = 0.0;
  const std::vector<double> ranks = average_ranks(pooled, &ties);
  const double n = static_cast<double>(pooled.size());
  double sum_term = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
    offset += g.size();
    sum_term += rank_sum * rank_sum / static_cast<double>(g.size());
  }
  StatResult r;
  r.df = {static_cast<int>(groups.size()) - 1};
  const double correction = 1.0 - ties / (n * n * n - n);
  if (correction <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.note = "all values tied";
    return r;
  }
  const double h = 12.0 / (n * (n + 1.0)) * sum_term - 3.0 * (n + 1.0);
  r.statistic = std::max(0.0, h / correction);
  r.p_value = tail_probability(Distribution::kChiSquare, r.statistic, {double(r.df[0])});
  return r;
}

/// Friedman rank-sum test over n blocks (rows) x k treatments (columns),
/// ranks within each block, tie-corrected.
inline StatResult friedman(std::span<const std::vector<double>> blocks) {
  if (blocks.size() < 2) fail(ErrorKind::kContract, "Friedman needs at least two blocks");
  const std::size_t k = blocks[0].size();
  if (k < 2) fail(ErrorKind::kContract, "Friedman needs at least two treatments");
  std::vector<double> rank_sums(k, 0.0);
  double ties = 0.0;
  for (const auto& row : blocks) {
    if (row.size() != k) fail(ErrorKind::kContract, "Friedman matrix must be complete");
    double row_ties = 0.0;
    const auto ranks = average_ranks(row, &row_ties);
    ties += row_ties;
    for (std::size_t j = 0; j < k; ++j) rank_sums[j] += ranks[j];
  }
  const double n = static_cast<double>(blocks.size());
  const double kk = static_cast<double>(k);
  double numer = 0.0;
  for (double rj : rank_sums) {
    const double dev = rj - n * (kk + 1.0) / 2.0;
    numer += dev * dev;
  }
  StatResult r;
  r.df = {static_cast<int>(k) - 1};
  const double denom = n * kk * (kk + 1.0) - ties / (kk - 1.0);
  if (denom <= 0.0) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.note = "all blocks fully tied";
    return r;
  }
  r.statistic = 12.0 * numer / denom;
  r.p_value = tail_probability(Distribution::kChiSquare, r.statistic, {kk - 1.0});
  return r;
}

/// Paired t on d = a - b with a two-sided p and a 95% CI for mean(d).
/// Zero-variance differences: t = 0, p = 1 when mean(d) = 0; otherwise
/// t = +/-inf (sign of the mean) and p = 0.
inline StatResult paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::kContract, "paired_t needs equal-length samples");
  if (a.size() < 2) fail(ErrorKind::kContract, "paired_t needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const MeanSd ms = mean_sd(d);
  const double n = static_cast<double>(d.size());
  const int df = static_cast<int>(d.size()) - 1;
  StatResult r;
  r.df = {df};
  r.mean_diff = ms.mean;
  const double sd = *ms.sd;
  if (sd == 0.0) {
    if (ms.mean == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = std::copysign(std::numeric_limits<double>::infinity(), ms.mean);
      r.p_value = 0.0;
      r.note = "zero variance of differences";
    }
    r.ci95 = {ms.mean, ms.mean};
    return r;
  }
  const double se = sd / std::sqrt(n);
  r.statistic = ms.mean / se;
  r.p_value = tail_probability(Distribution::kStudentT, r.statistic, {double(df)});
  const double half = student_t_critical(0.05, df) * se;
  r.ci95 = {ms.mean - half, ms.mean + half};
  return r;
}

}  // namespace roma::stats
