#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hwfl {

double mean(std::span<const double> xs);

/// Unbiased (n - 1) variance. Requires at least two values.
double sample_variance(std::span<const double> xs);

/// Regularized incomplete beta I_x(a, b), evaluated with the continued
/// fraction (modified Lentz) on whichever side of the symmetry point
/// converges fastest.
double regularized_incomplete_beta(double a, double b, double x);

/// Student-t cumulative distribution with real-valued degrees of freedom.
double student_t_cdf(double t, double dof);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_two_sided = 1.0;
};

/// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
/// freedom. Each sample needs n >= 2 and at least one variance must be
/// positive; otherwise ValidationError.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

/// (mean_a - mean_b) / pooled standard deviation, pooled with (n - 1)
/// weights. Zero pooled variance is an error.
double cohens_d(std::span<const double> a, std::span<const double> b);

/// Final-round metrics and cumulative totals for one seed.
struct TrialFinal {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double balanced_accuracy = 0.0;
  double total_time_s = 0.0;
  double total_comm_mb = 0.0;
  double mean_round_time_s = 0.0;
  double total_energy = 0.0;
  double jain = 0.0;
};

struct MetricStat {
  double mean = 0.0;
  double std = 0.0;
};

struct TrialSummary {
  std::vector<TrialFinal> finals;
  // Single seed: every std is 0 and this flag is set.
  bool degenerate = false;
  MetricStat accuracy;
  MetricStat macro_f1;
  MetricStat balanced_accuracy;
  MetricStat total_time_s;
  MetricStat total_comm_mb;
  MetricStat mean_round_time_s;
  MetricStat total_energy;
  MetricStat jain;
};

TrialSummary summarize_trials(std::span<const TrialFinal> finals);

}  // namespace hwfl
