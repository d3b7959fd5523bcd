#pragma once

#include <algorithm>

#include "dynperc/randomness.hpp"
#include "dynperc/stats.hpp"

namespace dynperc {

/// First-chance success with a static edge: 1{X_(y,z) < X_y}.
bool xi_first(const VariableFamilies& fam, const OrientedEdge& e);

/// First-chance success under a dynamic edge: 1{X_(y,z) < min(X_y, T-_{y,z})}.
bool xi(const VariableFamilies& fam, const OrientedEdge& e);

/// Fraction of xi = 1 over n edges (x, x + e1) with distinct x in one keyed
/// configuration; the draws are independent because no two share a site clock.
BinomialEstimate estimate_xi_marginal(const ModelParams& params, std::int64_t n, std::uint64_t seed);

/// Variables of a special edge (y,z) consulted by the second-chance field.
struct SecondChanceDraw {
  double t_plus = 0;          // T+_{y,z}
  double t_minus = 0;         // T-_{y,z}
  double recovery = 0;        // X_y
  double recovery_prime = 0;  // X'_y
  double infection = 0;       // X_(y,z)

  static SecondChanceDraw from_families(const VariableFamilies& fam, const OrientedEdge& yz);
};

/// Variables of the helper edge (x,y).
struct HelperDraw {
  double t_minus = 0;    // T-_{x,y}
  double infection = 0;  // X_(x,y)

  static HelperDraw from_families(const VariableFamilies& fam, const OrientedEdge& xy);
};

/// Edge opens before y recovers, then z is infected before y recovers and
/// before the edge closes again.
inline bool second_chance_direct(const SecondChanceDraw& d) {
  return d.t_plus < d.recovery && d.infection < std::min(d.recovery - d.t_plus, d.t_minus);
}

/// y recovers before the edge opens; it is held infected by the helper's
/// restricted process until the opening, then infects z before its fresh
/// recovery X'_y and before the edge closes. `y_held_at` is called last and
/// only when every other indicator is 1.
template <class YHeldAt>
bool second_chance_assisted(const SecondChanceDraw& d, const HelperDraw& h, YHeldAt&& y_held_at) {
  return d.recovery < d.t_plus && d.t_plus < h.t_minus - h.infection &&
         d.infection < std::min(d.recovery_prime, d.t_minus) && y_held_at(d.t_plus);
}

/// zeta^x_(y,z) in {0,1}. Requires (y,z) special and x in N(y) \ {z}.
int zeta_x(const VariableFamilies& fam, const OrientedEdge& yz, const Site& helper);

/// Product of zeta^x over the 2d-1 helpers x in N(y) \ {z}.
int zeta_bar(const VariableFamilies& fam, const OrientedEdge& yz);

/// first*omega + 2*special*(1-omega)*second, with values in {0,1,2}.
constexpr int combine_epsilon(bool first, bool omega, bool special, bool second) {
  return (first && omega ? 1 : 0) + (special && !omega && second ? 2 : 0);
}

/// epsilon^x_(y,z): 1 first-chance open, 2 second-chance open, 0 closed.
int epsilon(const VariableFamilies& fam, const OrientedEdge& yz, const Site& helper);

/// Throws std::invalid_argument unless yz is special and helper in N(y) \ {z}.
void require_second_chance_args(const OrientedEdge& yz, const Site& helper);

}  // namespace dynperc
