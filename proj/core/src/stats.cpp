#include "hwfl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwfl/error.hpp"

namespace hwfl {
namespace {

constexpr int kMaxFractionTerms = 2000;
constexpr double kFractionEps = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), evaluated by the modified Lentz method.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionEps) return h;
  }
  throw ValidationError("incomplete beta: continued fraction did not converge");
}

// Order-independent sum: permuting the inputs yields bit-identical results.
double sorted_sum(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

MetricStat stat_of(std::span<const TrialFinal> finals,
                   double TrialFinal::*field) {
  std::vector<double> xs;
  xs.reserve(finals.size());
  for (const auto& f : finals) xs.push_back(f.*field);
  const double n = static_cast<double>(xs.size());
  const double m = sorted_sum(xs) / n;
  if (xs.size() < 2) return {m, 0.0};
  std::vector<double> sq;
  sq.reserve(xs.size());
  for (double x : xs) sq.push_back((x - m) * (x - m));
  return {m, std::sqrt(sorted_sum(std::move(sq)) / (n - 1.0))};
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2)
    throw ValidationError("sample variance needs at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ValidationError("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw ValidationError("incomplete beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ValidationError("student_t_cdf: dof must be > 0");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail =
      0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return t < 0.0 ? tail : 1.0 - tail;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw ValidationError("welch_t: each sample needs at least two values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  if (!(va + vb > 0.0))
    throw ValidationError("welch_t: both samples have zero variance");
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  const double dof =
      (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  // Two-sided tail: P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
  const double p =
      regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return {t, dof, std::clamp(p, 0.0, 1.0)};
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw ValidationError("cohens_d: each sample needs at least two values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * sample_variance(a) +
                         (nb - 1.0) * sample_variance(b)) /
                        (na + nb - 2.0);
  if (!(pooled > 0.0))
    throw ValidationError("cohens_d: pooled variance is zero");
  return (mean(a) - mean(b)) / std::sqrt(pooled);
}

TrialSummary summarize_trials(std::span<const TrialFinal> finals) {
  if (finals.empty()) throw ValidationError("summarize_trials: no trials");
  TrialSummary s;
  s.finals.assign(finals.begin(), finals.end());
  std::sort(s.finals.begin(), s.finals.end(),
            [](const auto& x, const auto& y) { return x.seed < y.seed; });
  s.degenerate = finals.size() == 1;
  s.accuracy = stat_of(finals, &TrialFinal::accuracy);
  s.macro_f1 = stat_of(finals, &TrialFinal::macro_f1);
  s.balanced_accuracy = stat_of(finals, &TrialFinal::balanced_accuracy);
  s.total_time_s = stat_of(finals, &TrialFinal::total_time_s);
  s.total_comm_mb = stat_of(finals, &TrialFinal::total_comm_mb);
  s.mean_round_time_s = stat_of(finals, &TrialFinal::mean_round_time_s);
  s.total_energy = stat_of(finals, &TrialFinal::total_energy);
  s.jain = stat_of(finals, &TrialFinal::jain);
  return s;
}

}  // namespace hwfl
