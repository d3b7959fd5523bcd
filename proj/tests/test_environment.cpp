#include <doctest.h>

#include <array>
#include <cmath>

#include "dynperc/environment.hpp"
#include "dynperc/stats.hpp"

using namespace dynperc;

namespace {

using M2 = std::array<double, 4>;

M2 mul(const M2& a, const M2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// exp(Q t) by scaling and squaring of a Taylor series; independent of any
// closed form.
M2 expm(M2 q, double t) {
  int squarings = 0;
  double norm = std::abs(q[0]) + std::abs(q[1]) + std::abs(q[2]) + std::abs(q[3]);
  while (norm * t > 0.5) {
    t /= 2;
    ++squarings;
  }
  for (double& x : q) x *= t;
  M2 sum{1, 0, 0, 1}, term{1, 0, 0, 1};
  for (int k = 1; k < 30; ++k) {
    term = mul(term, q);
    for (double& x : term) x /= k;
    for (int i = 0; i < 4; ++i) sum[i] += term[i];
  }
  for (int i = 0; i < squarings; ++i) sum = mul(sum, sum);
  return sum;
}

}  // namespace

TEST_CASE("transition probabilities match the matrix exponential of the generator") {
  for (double p : {0.1, 0.5, 0.9})
    for (double v : {0.1, 1.0, 7.0})
      for (double t : {0.0, 0.1, 1.0, 10.0}) {
        // States ordered (0, 1): 0 -> 1 at rate vp, 1 -> 0 at rate v(1-p).
        const M2 q{-v * p, v * p, v * (1 - p), -v * (1 - p)};
        const M2 e = expm(q, t);
        CHECK(transition_probability(p, v, t, true) == doctest::Approx(e[3]).epsilon(1e-10));
        CHECK(transition_probability(p, v, t, false) == doctest::Approx(e[1]).epsilon(1e-10));
      }
}

TEST_CASE("trajectories") {
  const VariableFamilies fam(5, ModelParams{0.3, 2.0, 1.0});
  const auto e = UnorientedEdge::of(Site::of({2, 2}), Site::of({2, 3}));
  auto tr = trajectory(fam, e, 5.0);
  CHECK(state_at(tr, 0.0) == fam.omega(e));
  CHECK(tr.initial_state == fam.omega(e));
  const auto before = tr.switch_times;
  extend(tr, fam, 50.0);
  REQUIRE(tr.switch_times.size() >= before.size());
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(tr.switch_times[i] == before[i]);
  // A fresh trajectory straight to the longer horizon agrees.
  CHECK(trajectory(fam, e, 50.0).switch_times == tr.switch_times);
  CHECK_THROWS_AS(state_at(tr, 60.0), OutOfHorizon);
  // The first switch is T- when open and T+ when closed.
  if (!tr.switch_times.empty())
    CHECK(tr.switch_times[0] == (tr.initial_state ? fam.t_minus(e) : fam.t_plus(e)));
  // States alternate.
  for (std::size_t k = 0; k < tr.switch_times.size(); ++k) {
    const double mid = k + 1 < tr.switch_times.size() ? 0.5 * (tr.switch_times[k] + tr.switch_times[k + 1])
                                                        : tr.switch_times[k];
    CHECK(state_at(tr, mid) == (tr.initial_state != (k % 2 == 0)));
  }
}

TEST_CASE("p = 1 never closes and slow edges rarely switch") {
  const VariableFamilies full(3, ModelParams{1.0, 5.0, 1.0});
  const VariableFamilies slow(3, ModelParams{0.5, 0.01, 1.0});
  int slow_switching = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto e = UnorientedEdge::of(Site::of({i, 0}), Site::of({i, 1}));
    const auto tr = trajectory(full, e, 100.0);
    CHECK(tr.initial_state);
    CHECK(tr.switch_times.empty());
    slow_switching += trajectory(slow, e, 1.0).switch_times.empty() ? 0 : 1;
  }
  // Expected fraction about 1 - e^{-0.005}.
  CHECK(slow_switching < 30);
}

TEST_CASE("stationarity and transitions from both states") {
  const double p = 0.4;
  for (double v : {0.1, 1.0}) {
    const std::array<double, 3> times{0.1, 1.0, 10.0};
    const auto rows = stationarity_check(ModelParams{p, v, 1.0}, times, 100000, 11);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(std::abs(r.empirical_p - p) <= 3 * std::sqrt(p * (1 - p) / 1e5));
      const double target = transition_probability(p, v, r.t, true);
      const double se = std::sqrt(target * (1 - target) / static_cast<double>(r.started_open));
      CHECK(std::abs(r.empirical_transition - target) <= 3 * std::max(se, 1e-12));
    }
  }

  // From state 0: p (1 - e^{-vt}).
  const double v = 1.0, t = 1.0;
  const VariableFamilies fam(21, ModelParams{p, v, 1.0});
  std::int64_t closed = 0, opened = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto e = UnorientedEdge::of(Site::of({i, -1}), Site::of({i, 0}));
    const auto tr = trajectory(fam, e, t);
    if (tr.initial_state) continue;
    ++closed;
    opened += state_at(tr, t) ? 1 : 0;
  }
  const double target = p * (1 - std::exp(-v * t));
  const auto b = BinomialEstimate::from_counts(opened, closed);
  CHECK(std::abs(b.estimate - target) <= 3 * std::sqrt(target * (1 - target) / static_cast<double>(closed)));
}

TEST_CASE("environment cache agrees with direct trajectories") {
  const VariableFamilies fam(8, ModelParams{0.5, 3.0, 1.0});
  EnvironmentCache cache(fam, 0.5);
  for (int i = 0; i < 50; ++i) {
    const auto e = UnorientedEdge::of(Site::of({i, 0}), Site::of({i + 1, 0}));
    const auto tr = trajectory(fam, e, 20.0);
    for (double t : {0.0, 0.3, 2.0, 7.5, 19.0}) CHECK(cache.state_at(e, t) == state_at(tr, t));
  }
  CHECK(cache.size() == 50);
}
