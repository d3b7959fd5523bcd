#include "dynperc/second_chance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dynperc/fields.hpp"
#include "dynperc/parallel.hpp"

namespace dynperc {

TwoSiteMarks TwoSiteMarks::from_families(const VariableFamilies& fam, const OrientedEdge& xy) {
  TwoSiteMarks m;
  const double x_life = fam.x_site(xy.from);
  const double attempt = fam.x_edge(xy);
  m.starts_full = attempt < x_life;
  m.x_first_recovery = x_life - attempt;
  m.y_first_recovery = fam.x_site(xy.to);
  m.x_recoveries = fam.chi_site(xy.from);
  m.y_recoveries = fam.chi_site(xy.to);
  m.infections = fam.chi_edge(UnorientedEdge::of(xy));
  return m;
}

namespace {

// {first} U (first + stream): next mark strictly after t.
double shifted_next(double first, const MarkStream& stream, double t) {
  if (t < first) return first;
  return first + stream.next_after(t - first);
}

struct TwoSiteRun {
  TwoSiteState last;
  double extinction = kInfinity;
};

// Advances the restricted process until extinction or until the next event
// would fall after `horizon`. Recoveries win exact ties with infections.
template <class OnChange>
TwoSiteRun advance(const TwoSiteMarks& m, double horizon, OnChange&& on_change) {
  TwoSiteState s{0.0, m.starts_full, m.starts_full};
  on_change(s);
  if (!m.starts_full) return {s, 0.0};

  auto next_y = [&](double t) {
    double r = shifted_next(m.y_first_recovery, m.y_recoveries, t);
    if (m.extra_y_recoveries) r = std::min(r, m.extra_y_recoveries->next_after(t));
    return r;
  };
  auto next_x = [&](double t) { return shifted_next(m.x_first_recovery, m.x_recoveries, t); };

  double t = 0.0;
  for (;;) {
    if (s.x && s.y) {
      const double nx = next_x(t);
      const double ny = next_y(t);
      const double tn = std::min(nx, ny);
      if (tn > horizon) return {s, kInfinity};
      t = tn;
      if (nx <= tn) s.x = false;
      if (ny <= tn) s.y = false;
    } else {
      const bool y_alone = s.y;
      const double nr = y_alone ? next_y(t) : next_x(t);
      const double ni = m.infections.next_after(t);
      const double tn = std::min(nr, ni);
      if (tn > horizon) return {s, kInfinity};
      t = tn;
      if (nr <= ni) {
        s.x = s.y = false;
      } else {
        s.x = s.y = true;
      }
    }
    s.time = t;
    on_change(s);
    if (!s.x && !s.y) return {s, t};
  }
}

}  // namespace

TwoSiteProcess::TwoSiteProcess(std::vector<TwoSiteState> changes, double horizon, double extinction_time)
    : changes_(std::move(changes)), horizon_(horizon), extinction_(extinction_time) {
  if (changes_.empty()) throw std::invalid_argument("two-site trajectory needs an initial state");
}

TwoSiteState TwoSiteProcess::state_at(double t) const {
  if (t < 0.0) throw std::out_of_range("two-site query before time 0");
  if (t > horizon_ && extinction_ == kInfinity) throw std::out_of_range("two-site query beyond horizon");
  auto it = std::upper_bound(changes_.begin(), changes_.end(), t,
                             [](double v, const TwoSiteState& s) { return v < s.time; });
  return *std::prev(it);
}

bool TwoSiteProcess::alive(double t) const {
  const auto s = state_at(t);
  return s.x || s.y;
}

TwoSiteProcess run_two_site(const TwoSiteMarks& marks, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("two-site horizon must be > 0");
  std::vector<TwoSiteState> changes;
  const auto run = advance(marks, horizon, [&](const TwoSiteState& s) { changes.push_back(s); });
  return TwoSiteProcess(std::move(changes), horizon, run.extinction);
}

TwoSiteProcess run_two_site(const VariableFamilies& fam, const OrientedEdge& xy, double horizon) {
  return run_two_site(TwoSiteMarks::from_families(fam, xy), horizon);
}

bool two_site_contains_y(const TwoSiteMarks& marks, double t) {
  return advance(marks, t, [](const TwoSiteState&) {}).last.y;
}

double two_site_extinction_time(const TwoSiteMarks& marks) {
  return advance(marks, kInfinity, [](const TwoSiteState&) {}).extinction;
}

std::vector<double> sample_extinction_times(double lambda, std::int64_t n, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_extinction_times requires lambda > 0");
  if (n < 1) throw std::invalid_argument("sample_extinction_times requires n >= 1");
  const ModelParams params{0.5, 1.0, lambda};
  const OrientedEdge xy{Site::origin(2), Site::origin(2).shifted(0, 1)};
  return map_replicas<double>(n, [&](std::int64_t i) {
    const VariableFamilies fam(seed + static_cast<std::uint64_t>(i), params);
    TwoSiteMarks m = TwoSiteMarks::from_families(fam, xy);
    m.starts_full = true;
    m.x_first_recovery = fam.x_prime(xy.from);
    return two_site_extinction_time(m);
  });
}

PhaseTypeOracle::PhaseTypeOracle(double lambda) : lambda_(lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const double trace = -(lambda + 3.0);
  const double det = 2.0;
  const double disc = std::sqrt(trace * trace - 4.0 * det);
  r2_ = 0.5 * (trace - disc);
  r1_ = det / r2_;  // avoids cancellation in (trace + disc) / 2
  c1_ = -r2_ / (r1_ - r2_);
  c2_ = r1_ / (r1_ - r2_);
}

double PhaseTypeOracle::survival(double t) const {
  if (t <= 0.0) return 1.0;
  return std::clamp(c1_ * std::exp(r1_ * t) + c2_ * std::exp(r2_ * t), 0.0, 1.0);
}

double PhaseTypeOracle::mean() const { return (lambda_ + 3.0) / 2.0; }

std::array<double, 4> PhaseTypeOracle::transient_generator() const {
  return {-2.0, 2.0, lambda_, -(lambda_ + 1.0)};
}

double extinction_tail_oracle(double lambda, double t) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (t <= 0.0) return 1.0;
  return std::exp(-2.0 * t / (lambda + 1.0));
}

double stated_extinction_tail(double lambda, double t) {
  if (t <= 0.0) return 1.0;
  return std::exp(-t / (2.0 * (lambda + 1.0)));
}

double zeta_bound(int d, double p) {
  if (d < 2) throw std::invalid_argument("zeta_bound requires d >= 2");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("zeta_bound requires 0 < p < 1");
  return std::ldexp(1.0, -(2 * d - 1)) * p / (1.0 + (2.0 * d - 2.0) * (1.0 - p));
}

double b_lambda(double p, double v, double lambda) { return lambda / (lambda + 1.0 + v * (1.0 - p)); }

OrientedEdge canonical_special_edge(int d) {
  Site y = Site::origin(d);
  for (int i = 0; i < d; ++i) y[i] = 1;
  return {y, y.shifted(0, +1)};
}

BinomialEstimate estimate_zeta_bar(int d, const ModelParams& params, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate_zeta_bar requires n >= 1");
  const auto yz = canonical_special_edge(d);
  const auto hits = count_replicas(n, [&](std::int64_t i) {
    const VariableFamilies fam(seed + static_cast<std::uint64_t>(i), params);
    return zeta_bar(fam, yz) == 1;
  });
  return BinomialEstimate::from_counts(hits, n);
}

BinomialEstimate estimate_a_lambda(int d, const ModelParams& params, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate_a_lambda requires n >= 1");
  const auto yz = canonical_special_edge(d);
  const Site& y = yz.from;
  const auto hits = count_replicas(n, [&](std::int64_t i) {
    const VariableFamilies fam(seed + static_cast<std::uint64_t>(i), params);
    const double opening = fam.t_plus(UnorientedEdge::of(yz));
    for (const Site& x : neighbors(y)) {
      if (x == yz.to) continue;
      if (!(opening < fam.t_minus(UnorientedEdge::of(x, y)))) return false;
      if (!two_site_contains_y(TwoSiteMarks::from_families(fam, {x, y}), opening)) return false;
    }
    return true;
  });
  return BinomialEstimate::from_counts(hits, n);
}

}  // namespace dynperc
