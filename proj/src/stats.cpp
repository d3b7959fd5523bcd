#include "dynperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynperc {

Interval wilson_interval(std::int64_t successes, std::int64_t n, double z) {
  if (n <= 0) throw std::invalid_argument("wilson_interval requires n >= 1");
  if (successes < 0 || successes > n) throw std::invalid_argument("successes out of range");
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  // Clamp so that the interval always brackets the point estimate exactly.
  return {std::min(phat, std::max(0.0, centre - half)), std::max(phat, std::min(1.0, centre + half))};
}

BinomialEstimate BinomialEstimate::from_counts(std::int64_t successes, std::int64_t n) {
  BinomialEstimate e;
  e.successes = successes;
  e.n = n;
  e.estimate = static_cast<double>(successes) / static_cast<double>(n);
  e.ci = wilson_interval(successes, n);
  return e;
}

double BinomialEstimate::standard_error() const {
  return std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(n));
}

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate m;
  m.n = xs.size();
  if (xs.empty()) return m;
  double sum = 0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.standard_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return m;
}

bool within_sigma(double a, double se_a, double b, double se_b, double k) {
  return std::abs(a - b) <= k * std::sqrt(se_a * se_a + se_b * se_b);
}

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample requires non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' small-sample correction.
  return {d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)};
}

double dkw_exceedance_bound(std::int64_t n, double eps) {
  return std::min(1.0, 2.0 * std::exp(-2.0 * static_cast<double>(n) * eps * eps));
}

}  // namespace dynperc
