#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dynperc/environment.hpp"
#include "dynperc/randomness.hpp"
#include "dynperc/stats.hpp"

namespace dynperc {

struct OccupancyEvent {
  double time = 0;
  Site site;
  bool infected = false;  // + when true, - when false

  friend auto operator<=>(const OccupancyEvent&, const OccupancyEvent&) = default;
};

/// Infection marks of an edge at rate lambda_reference, each kept with
/// probability lambda / lambda_reference by a keyed uniform. Runs sharing a
/// seed and reference therefore see nested mark sets as lambda grows.
class InfectionMarks {
 public:
  InfectionMarks(const VariableFamilies& fam, const UnorientedEdge& e, double lambda, double lambda_reference);
  double next_after(double t) const;

 private:
  MarkStream stream_;
  std::uint64_t thin_key_;
  double keep_;
};

struct CpdeRun {
  ModelParams params;
  double lambda_reference = 0;
  Window window;
  double horizon = 0;
  std::uint64_t seed = 0;
  std::vector<Site> initial;
  std::vector<OccupancyEvent> events;  // time-ordered
  std::vector<Site> final_infected;
  std::uint64_t tied_events = 0;  // equal-time events, broken by key order

  bool alive_at_horizon() const { return !final_infected.empty(); }
  /// Infected set at time t (after all events at or before t).
  std::vector<Site> infected_at(double t) const;
};

/// Graphical construction of CPDE(p, v, lambda) inside `window` with an
/// absorbing exterior: recovery marks chi_x, infection marks chi_{x,y}
/// honoured only when the edge is available at the mark time and exactly one
/// endpoint is infected. `lambda_reference` = 0 means lambda itself.
CpdeRun simulate(const ModelParams& params, const Window& window, double horizon, std::uint64_t seed,
                 std::span<const Site> initial, double lambda_reference = 0.0);

/// Fraction of replicas (seeds seed + i) alive at the horizon, started from
/// the origin, with a Wilson 95% interval.
BinomialEstimate survival_estimate(const ModelParams& params, const Window& window, double horizon,
                                   std::int64_t replicas, std::uint64_t seed, double lambda_reference = 0.0);

}  // namespace dynperc
