#include "dynperc/fields.hpp"

#include <stdexcept>

#include "dynperc/second_chance.hpp"

namespace dynperc {

bool xi_first(const VariableFamilies& fam, const OrientedEdge& e) {
  return fam.x_edge(e) < fam.x_site(e.from);
}

bool xi(const VariableFamilies& fam, const OrientedEdge& e) {
  const double attempt = fam.x_edge(e);
  return attempt < std::min(fam.x_site(e.from), fam.t_minus(UnorientedEdge::of(e)));
}

BinomialEstimate estimate_xi_marginal(const ModelParams& params, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("estimate_xi_marginal requires n >= 1");
  params.validate();
  const VariableFamilies fam(seed, params);
  constexpr std::int64_t width = 4096;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Site x = Site::of({static_cast<std::int32_t>(i % width), static_cast<std::int32_t>(i / width)});
    hits += xi(fam, {x, x.shifted(0, 1)}) ? 1 : 0;
  }
  return BinomialEstimate::from_counts(hits, n);
}

SecondChanceDraw SecondChanceDraw::from_families(const VariableFamilies& fam, const OrientedEdge& yz) {
  const auto e = UnorientedEdge::of(yz);
  return {fam.t_plus(e), fam.t_minus(e), fam.x_site(yz.from), fam.x_prime(yz.from), fam.x_edge(yz)};
}

HelperDraw HelperDraw::from_families(const VariableFamilies& fam, const OrientedEdge& xy) {
  return {fam.t_minus(UnorientedEdge::of(xy)), fam.x_edge(xy)};
}

void require_second_chance_args(const OrientedEdge& yz, const Site& helper) {
  if (!adjacent(yz.from, yz.to)) throw std::invalid_argument("not an edge: " + to_string(yz));
  if (!is_special(yz)) throw std::invalid_argument("second chance requires a special edge: " + to_string(yz));
  if (!adjacent(helper, yz.from) || helper == yz.to)
    throw std::invalid_argument("helper " + to_string(helper) + " is not in N(y)\\{z} for " + to_string(yz));
}

namespace {

bool assisted_for(const VariableFamilies& fam, const SecondChanceDraw& d, const OrientedEdge& yz,
                  const Site& helper) {
  const OrientedEdge xy{helper, yz.from};
  return second_chance_assisted(d, HelperDraw::from_families(fam, xy), [&](double t) {
    return two_site_contains_y(TwoSiteMarks::from_families(fam, xy), t);
  });
}

}  // namespace

int zeta_x(const VariableFamilies& fam, const OrientedEdge& yz, const Site& helper) {
  require_second_chance_args(yz, helper);
  const auto d = SecondChanceDraw::from_families(fam, yz);
  // The two terms have complementary first guards, so at most one is 1.
  if (second_chance_direct(d)) return 1;
  return assisted_for(fam, d, yz, helper) ? 1 : 0;
}

int zeta_bar(const VariableFamilies& fam, const OrientedEdge& yz) {
  if (!is_special(yz)) throw std::invalid_argument("zeta_bar requires a special edge: " + to_string(yz));
  const auto d = SecondChanceDraw::from_families(fam, yz);
  // The direct term does not involve the helper.
  if (d.t_plus < d.recovery) return second_chance_direct(d) ? 1 : 0;
  for (const Site& x : neighbors(yz.from)) {
    if (x == yz.to) continue;
    if (!assisted_for(fam, d, yz, x)) return 0;
  }
  return 1;
}

int epsilon(const VariableFamilies& fam, const OrientedEdge& yz, const Site& helper) {
  const bool omega = fam.omega(UnorientedEdge::of(yz));
  if (omega) return combine_epsilon(xi(fam, yz), true, false, false);
  if (!is_special(yz)) return 0;
  return combine_epsilon(false, false, true, zeta_x(fam, yz, helper) == 1);
}

}  // namespace dynperc
