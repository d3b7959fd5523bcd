#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dynperc/cpde.hpp"

using namespace dynperc;

namespace {
const Site kOrigin = Site::origin(2);

bool subset(std::vector<Site> a, std::vector<Site> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}
}  // namespace

TEST_CASE("lambda = 0 leaves only the recovery of the origin") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto run = simulate(ModelParams{0.7, 1.0, 0.0}, Window(2, 5), 100.0, seed, std::span(&kOrigin, 1));
    // The initial infection at t = 0, then the recovery.
    REQUIRE(run.events.size() == 2);
    CHECK(run.events[0].time == 0.0);
    CHECK(run.events[0].infected);
    CHECK(run.events[1].site == kOrigin);
    CHECK_FALSE(run.events[1].infected);
    CHECK_FALSE(run.alive_at_horizon());
    CHECK(run.infected_at(run.events[1].time * 0.5) == std::vector<Site>{kOrigin});
  }
}

TEST_CASE("closed environment reduces to a single recovering site") {
  // p = 0: no edge is ever available, so survival to t = 1 has probability e^{-1}.
  const auto est = survival_estimate(ModelParams{0.0, 1.0, 5.0}, Window(2, 3), 1.0, 20000, 77);
  const double target = std::exp(-1.0);
  CHECK(std::abs(est.estimate - target) <= 3 * std::sqrt(target * (1 - target) / 20000));
}

TEST_CASE("runs are deterministic and time-ordered") {
  const ModelParams mp{0.6, 1.0, 3.0};
  const auto a = simulate(mp, Window(2, 6), 8.0, 5, std::span(&kOrigin, 1));
  const auto b = simulate(mp, Window(2, 6), 8.0, 5, std::span(&kOrigin, 1));
  CHECK(a.events == b.events);
  CHECK(std::is_sorted(a.events.begin(), a.events.end(),
                       [](const auto& x, const auto& y) { return x.time < y.time; }));
  // Replaying the events reproduces the final configuration.
  auto fin = a.infected_at(8.0);
  auto expect = a.final_infected;
  std::sort(fin.begin(), fin.end());
  std::sort(expect.begin(), expect.end());
  CHECK(fin == expect);
}

TEST_CASE("nested infection marks make the process monotone in lambda") {
  const Window w(2, 6);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto lo = simulate(ModelParams{0.6, 1.0, 1.5}, w, 10.0, seed, std::span(&kOrigin, 1), 6.0);
    const auto hi = simulate(ModelParams{0.6, 1.0, 6.0}, w, 10.0, seed, std::span(&kOrigin, 1), 6.0);
    for (double t : {0.5, 1.0, 2.0, 5.0, 10.0}) CHECK(subset(lo.infected_at(t), hi.infected_at(t)));
    CHECK((!lo.alive_at_horizon() || hi.alive_at_horizon()));
  }
}

TEST_CASE("supercritical regimes survive") {
  const auto dense = survival_estimate(ModelParams{0.8, 1.0, 20.0}, Window(2, 10), 10.0, 50, 3);
  CHECK(dense.estimate > 0.0);
  const auto classic = survival_estimate(ModelParams{1.0, 1.0, 4.0}, Window(2, 20), 50.0, 200, 9);
  CHECK(classic.estimate > 0.5);
}

TEST_CASE("initial sites must lie in the window") {
  const Site far = Site::of({50, 0});
  CHECK_THROWS_AS(simulate(ModelParams{}, Window(2, 3), 1.0, 1, std::span(&far, 1)), std::invalid_argument);
}
