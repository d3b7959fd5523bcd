#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dynperc {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0;
  double high = 0;
};

/// Wilson score interval for k successes out of n.
Interval wilson_interval(std::int64_t successes, std::int64_t n, double z = kZ95);

struct BinomialEstimate {
  std::int64_t successes = 0;
  std::int64_t n = 0;
  double estimate = 0;
  Interval ci;

  static BinomialEstimate from_counts(std::int64_t successes, std::int64_t n);
  /// sqrt(p(1-p)/n) at the point estimate.
  double standard_error() const;
};

struct MeanEstimate {
  double mean = 0;
  double standard_error = 0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<const double> xs);

/// |a - b| <= k * sqrt(se_a^2 + se_b^2).
bool within_sigma(double a, double se_a, double b, double se_b, double k = 3.0);

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0;
  double p_value = 1;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Kolmogorov distribution tail Q(x) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}.
double kolmogorov_tail(double x);

/// DKW bound: P(sup |F_n - F| > eps) <= 2 exp(-2 n eps^2).
double dkw_exceedance_bound(std::int64_t n, double eps);

}  // namespace dynperc
