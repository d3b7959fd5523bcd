#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dynperc/randomness.hpp"
#include "dynperc/stats.hpp"

namespace dynperc {

/// Marks driving the contact process restricted to one edge {x,y}, with
/// time measured from the infection of y by x.
struct TwoSiteMarks {
  bool starts_full = false;     // X_(x,y) < X_x; otherwise the empty process
  double x_first_recovery = 0;  // X_x - X_(x,y)
  double y_first_recovery = 0;  // X_y
  MarkStream x_recoveries;      // chi_x, shifted by x_first_recovery
  MarkStream y_recoveries;      // chi_y, shifted by y_first_recovery
  MarkStream infections;        // chi_{x,y}
  /// Optional additional recovery marks for y (absolute times); used only by
  /// monotonicity couplings.
  const MarkStream* extra_y_recoveries = nullptr;

  static TwoSiteMarks from_families(const VariableFamilies& fam, const OrientedEdge& xy);
};

struct TwoSiteState {
  double time = 0;
  bool x = false;
  bool y = false;
};

/// Piecewise-constant trajectory on [0, horizon]; `changes[0]` is the state at 0.
class TwoSiteProcess {
 public:
  TwoSiteProcess(std::vector<TwoSiteState> changes, double horizon, double extinction_time);

  bool contains_x(double t) const { return state_at(t).x; }
  bool contains_y(double t) const { return state_at(t).y; }
  bool alive(double t) const;
  TwoSiteState state_at(double t) const;
  /// +inf when the process is still alive at the horizon.
  double extinction_time() const { return extinction_; }
  double horizon() const { return horizon_; }
  const std::vector<TwoSiteState>& changes() const { return changes_; }

 private:
  std::vector<TwoSiteState> changes_;
  double horizon_;
  double extinction_;
};

/// Event-driven run of the restricted process up to `horizon` (may be +inf,
/// in which case it runs to extinction).
TwoSiteProcess run_two_site(const TwoSiteMarks& marks, double horizon);
TwoSiteProcess run_two_site(const VariableFamilies& fam, const OrientedEdge& xy, double horizon);

/// Membership of y at time t without recording the trajectory.
bool two_site_contains_y(const TwoSiteMarks& marks, double t);

/// Extinction time only (runs to absorption).
double two_site_extinction_time(const TwoSiteMarks& marks);

/// Extinction time of the two-site chain started full: states
/// {full, single, empty}, full->single at rate 2, single->full at rate lambda,
/// single->empty at rate 1.
class PhaseTypeOracle {
 public:
  explicit PhaseTypeOracle(double lambda);

  /// Exact P(tau > t) from the closed-form exponential of the 2x2 transient block.
  double survival(double t) const;
  double mean() const;
  /// Transient generator [[-2, 2], [lambda, -(lambda+1)]], row-major.
  std::array<double, 4> transient_generator() const;

 private:
  double lambda_;
  double r1_, r2_;  // eigenvalues (negative)
  double c1_, c2_;  // survival(t) = c1 e^{r1 t} + c2 e^{r2 t}
};

/// Extinction times of n restricted processes started full, replica i keyed
/// by seed + i. The first recovery of x is a fresh Exp(1), which is the law
/// of X_x - X_(x,y) given X_(x,y) < X_x.
std::vector<double> sample_extinction_times(double lambda, std::int64_t n, std::uint64_t seed);

/// Tail of the geometric sum of Exp(2) variables with Geom(1/(lambda+1))
/// terms: exp(-2 t / (lambda + 1)). Lower bound for the phase-type tail.
double extinction_tail_oracle(double lambda, double t);

/// Tail exp(-t / (2 (lambda + 1))) with the slower rate, kept so the
/// extinction report can show both curves.
double stated_extinction_tail(double lambda, double t);

/// (1 / 2^{2d-1}) p / (1 + (2d-2)(1-p)); independent of v.
double zeta_bound(int d, double p);

/// lambda / (lambda + 1 + v(1-p)), the success law of a first-chance attempt.
double b_lambda(double p, double v, double lambda);

/// Canonical special edge y = (1,...,1), z = y + e1.
OrientedEdge canonical_special_edge(int d);

/// Monte Carlo P(zeta_bar = 1) on the canonical special edge; replica i uses
/// master seed `seed + i`.
BinomialEstimate estimate_zeta_bar(int d, const ModelParams& params, std::int64_t n, std::uint64_t seed);

/// Monte Carlo of P(cap_x {T+ < T-_{x,y}, y in eta^{x,y}_{T+}}), sampling T+
/// per replica.
BinomialEstimate estimate_a_lambda(int d, const ModelParams& params, std::int64_t n, std::uint64_t seed);

}  // namespace dynperc
