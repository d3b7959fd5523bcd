#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "dynperc/coupling.hpp"
#include "dynperc/fields.hpp"
#include "dynperc/second_chance.hpp"

using namespace dynperc;

namespace {

CoupleOptions opts(std::int64_t budget, bool strict = true) {
  CoupleOptions o;
  o.budget = budget;
  o.strict = strict;
  return o;
}

std::set<Site> as_set(const std::vector<Site>& v) { return {v.begin(), v.end()}; }

CoupledState run(Algorithm alg, const VariableFamilies& fam, const LowerBackend& be, const CoupleOptions& o) {
  return alg == Algorithm::First ? explore_coupled_first(fam, be, o) : explore_coupled_second(fam, be, o);
}

}  // namespace

TEST_CASE("backend validation") {
  CHECK_THROWS_AS(LowerBackend::thinned(1.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LowerBackend::independent(-0.1).validate(), std::invalid_argument);
  CHECK(std::string(to_string(LowerBackend::Kind::Thinned)) == "thinned");
}

TEST_CASE("thinned lower fields sit below the upper ones") {
  const auto be = LowerBackend::thinned(0.7, 0.5);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const VariableFamilies fam(s, ModelParams{0.47, 0.1, 1000.0});
    const auto yz = canonical_special_edge(2);
    const Site parent = yz.from.shifted(1, -1);
    CHECK(lower_xi(fam, be, Algorithm::First, yz) <= xi_first(fam, yz));
    CHECK(lower_xi(fam, be, Algorithm::Second, yz) <= xi(fam, yz));
    const int lo = lower_epsilon(fam, be, Algorithm::Second, yz);
    const int up = epsilon(fam, yz, parent);
    CHECK((lo == 0 || lo == up));
    if (lo == 2) CHECK(zeta_bar(fam, yz) == 1);
    CHECK(lower_epsilon(fam, be, Algorithm::First, yz) != 2);
  }
}

TEST_CASE("theta extremes") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const VariableFamilies fam(s, ModelParams{0.6, 1.0, 100.0});
    const auto none = explore_coupled_first(fam, LowerBackend::thinned(0.0), opts(2000));
    CHECK(none.lower.treated == std::vector<Site>{Site::origin(2)});
    CHECK(check_inclusion(none));

    const auto same = explore_coupled_first(fam, LowerBackend::thinned(1.0), opts(2000));
    CHECK(check_inclusion(same));
    CHECK(same.lower.treated.size() <= same.upper.treated.size());
    if (same.status == Status::Exhausted) CHECK(as_set(same.lower.treated) == as_set(same.upper.treated));

    // No second-chance bits on the lower side.
    const auto nozeta = explore_coupled_second(fam, LowerBackend::thinned(0.9, 0.0), opts(2000));
    CHECK(nozeta.lower.edges(EdgeKind::SecondChance).empty());
    CHECK(check_inclusion(nozeta));
  }
}

TEST_CASE("inclusions hold on every pass for both algorithms") {
  for (auto alg : {Algorithm::First, Algorithm::Second})
    for (std::uint64_t s = 0; s < 60; ++s) {
      const ModelParams mp = alg == Algorithm::First ? ModelParams{0.6, 1.0, 100.0} : ModelParams{0.47, 0.1, 1000.0};
      const auto st = run(alg, VariableFamilies(s, mp), LowerBackend::thinned(0.9), opts(3000));
      CHECK(st.violations == 0);
      CHECK(st.invariant_checks >= st.passes);
      CHECK(check_inclusion(st));
      CHECK(std::max(st.upper.treated.size(), st.lower.treated.size()) <= 3000);
      CHECK(check_properties(st.upper).all());
    }
}

TEST_CASE("disabling the lower side recovers the plain explorations bit for bit") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const VariableFamilies fam(s, ModelParams{0.5, 1.0, 50.0});
    CoupleOptions o = opts(1500);
    o.lower_enabled = false;
    ExploreOptions e;
    e.budget = 1500;
    const auto a = explore_coupled_first(fam, LowerBackend::thinned(0.9), o);
    const auto b = explore_first(fam, e);
    CHECK(a.upper.treated == b.treated);
    CHECK(a.upper.events == b.events);
    const auto c = explore_coupled_second(fam, LowerBackend::thinned(0.9), o);
    const auto d = explore_second(fam, e);
    CHECK(c.upper.treated == d.treated);
    CHECK(c.upper.events == d.events);
  }
}

TEST_CASE("the independent lower side ignores the upper state") {
  const auto be = LowerBackend::independent(0.5);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const VariableFamilies fam(s, ModelParams{0.8, 1.0, 50.0});
    CoupleOptions alone = opts(1500, false);
    alone.upper_enabled = false;
    const auto a = explore_coupled_first(fam, be, opts(1500, false));
    const auto b = explore_coupled_first(fam, be, alone);
    CHECK(a.lower.treated == b.lower.treated);
    CHECK(a.lower.examined.size() == b.lower.examined.size());
  }
}

TEST_CASE("an independent lower side breaks inclusion and is reported") {
  // q = 1 opens every available lower edge, far more than the upper side.
  const auto be = LowerBackend::independent(1.0);
  std::int64_t counted = 0;
  bool thrown = false;
  for (std::uint64_t s = 0; s < 20 && !thrown; ++s) {
    const VariableFamilies fam(s, ModelParams{0.7, 1.0, 0.5});
    counted += explore_coupled_first(fam, be, opts(500, false)).violations;
    try {
      explore_coupled_first(fam, be, opts(500, true));
    } catch (const InvariantViolation& e) {
      thrown = true;
      CHECK(e.pass() >= 0);
      CHECK(e.dump().find("pass") != std::string::npos);
      CHECK(e.dump().find("frontier") != std::string::npos);
    }
  }
  CHECK(counted > 0);
  CHECK(thrown);
}

TEST_CASE("lower cluster law against direct percolation") {
  const auto sub = lower_cluster_law_check(2, 0.5, 0.5, 15, 600, 4);
  CHECK(sub.pass);
  CHECK(within_sigma(sub.exploration_mean.mean, sub.exploration_mean.standard_error, sub.direct_mean.mean,
                     sub.direct_mean.standard_error));
  const auto none = lower_cluster_law_check(2, 0.5, 0.0, 10, 50, 4);
  CHECK(std::all_of(none.exploration_sizes.begin(), none.exploration_sizes.end(), [](auto n) { return n == 1; }));
}
