#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dynperc/hashing.hpp"
#include "dynperc/lattice.hpp"

namespace dynperc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// (p, v, lambda): edge density, edge update speed, infection rate.
struct ModelParams {
  double p = 0.5;
  double v = 1.0;
  double lambda = 1.0;

  /// Throws std::invalid_argument on p outside [0,1], v < 0 or lambda < 0.
  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Tags separating the keyed variable families. Values are part of the
/// seed contract; never renumber.
enum class Family : std::uint64_t {
  Omega = 1,
  TPlus = 2,
  TMinus = 3,
  XSite = 4,
  XPrime = 5,
  XEdge = 6,
  ChiSite = 7,
  ChiEdge = 8,
  EnvHold = 9,
  MarkThin = 10,
  BetaXi = 11,
  BetaZeta = 12,
  IndependentXi = 13,
  PercoEdge = 14,
  ExtraRecovery = 15,
};

/// Exp(rate) by inverse CDF; rate 0 gives +inf.
inline double exponential_from_unit(double u, double rate) {
  if (rate <= 0.0) return kInfinity;
  return -std::log(u) / rate;
}

/// Poisson point process on [0, inf) built block by block: block j covers
/// [j/rate, (j+1)/rate) and holds Poisson(1) uniformly placed marks keyed by
/// (key, j). Any mark is therefore reachable in O(1) expected work, and
/// extending the materialized horizon never changes earlier marks.
/// A stream may instead wrap a fixed sorted list (test fixtures).
class MarkStream {
 public:
  MarkStream() = default;
  static MarkStream poisson(std::uint64_t key, double rate);
  static MarkStream fixed(std::vector<double> sorted_marks);

  /// First mark strictly greater than t, or +inf.
  double next_after(double t) const;

  /// Materialize all marks in [0, horizon]; earlier marks are kept as-is.
  const std::vector<double>& materialize(double horizon);
  const std::vector<double>& marks() const { return marks_; }
  double horizon() const { return horizon_; }
  double rate() const { return rate_; }
  std::uint64_t key() const { return key_; }

 private:
  // Marks of block j in increasing order; returns the count written.
  int block_marks(std::int64_t j, double* out) const;

  std::uint64_t key_ = 0;
  double rate_ = 0.0;
  bool fixed_ = false;
  std::vector<double> marks_;
  std::vector<double> pending_;  // generated beyond the current horizon
  double horizon_ = 0.0;
  std::int64_t next_block_ = 0;
};

/// Lazily keyed random variable families. Every value is a pure function of
/// (master seed, family tag, canonical key), so two instances with the same
/// seed agree bit for bit and concurrent reads need no synchronization.
class VariableFamilies {
 public:
  VariableFamilies(std::uint64_t master_seed, ModelParams params);

  std::uint64_t seed() const { return seed_; }
  const ModelParams& params() const { return params_; }

  bool omega(const UnorientedEdge& e) const;
  double t_plus(const UnorientedEdge& e) const;
  double t_minus(const UnorientedEdge& e) const;
  double x_site(const Site& x) const;
  double x_prime(const Site& x) const;
  double x_edge(const OrientedEdge& e) const;
  MarkStream chi_site(const Site& x) const;
  MarkStream chi_edge(const UnorientedEdge& e) const;

  std::uint64_t key(Family f, const Site& x) const;
  std::uint64_t key(Family f, const OrientedEdge& e) const;
  std::uint64_t key(Family f, const UnorientedEdge& e) const;

  /// Uniform in (0,1] for an arbitrary key and counter.
  static double uniform(std::uint64_t key, std::uint64_t counter = 0) {
    return to_unit_open_closed(absorb(key, counter));
  }
  double uniform(Family f, const Site& x) const { return uniform(key(f, x)); }
  double uniform(Family f, const OrientedEdge& e) const { return uniform(key(f, e)); }
  double uniform(Family f, const UnorientedEdge& e) const { return uniform(key(f, e)); }

 private:
  std::uint64_t seed_;
  ModelParams params_;
};

}  // namespace dynperc
