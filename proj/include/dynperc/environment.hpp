#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynperc/randomness.hpp"

namespace dynperc {

/// Requested time lies beyond the materialized horizon of a trajectory.
class OutOfHorizon : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// One edge of the stationary dynamical percolation: starts at omega_e and
/// alternates, holding Exp(v(1-p)) in state 1 and Exp(vp) in state 0. The
/// first holding time is T-_e or T+_e; later ones come from a keyed chain.
struct EdgeTrajectory {
  UnorientedEdge edge;
  bool initial_state = false;
  std::vector<double> switch_times;  // strictly increasing, all <= horizon
  double horizon = 0;

  int switches_before_or_at(double t) const;
};

EdgeTrajectory trajectory(const VariableFamilies& fam, const UnorientedEdge& e, double horizon);

/// Appends switches up to `horizon`; earlier switches are untouched.
void extend(EdgeTrajectory& traj, const VariableFamilies& fam, double horizon);

/// State after every switch at or before t. Throws OutOfHorizon past the horizon.
bool state_at(const EdgeTrajectory& traj, double t);

/// Per-run cache of trajectories, extended on demand. Confine to one worker.
class EnvironmentCache {
 public:
  explicit EnvironmentCache(const VariableFamilies& fam, double initial_horizon = 1.0)
      : fam_(&fam), initial_horizon_(initial_horizon) {}

  bool state_at(const UnorientedEdge& e, double t);
  const EdgeTrajectory& trajectory(const UnorientedEdge& e, double horizon);
  std::size_t size() const { return cache_.size(); }

 private:
  const VariableFamilies* fam_;
  double initial_horizon_;
  std::unordered_map<UnorientedEdge, EdgeTrajectory, UnorientedEdgeHash> cache_;
};

/// P(state_at(t) = 1 | state_at(0) = s) for the two-state chain.
double transition_probability(double p, double v, double t, bool from_state);

struct StationarityRow {
  double t = 0;
  double empirical_p = 0;
  double standard_error = 0;
  // Among edges available at time 0: fraction available at t.
  double empirical_transition = 0;
  double transition_standard_error = 0;
  std::int64_t started_open = 0;
};

/// Empirical P(omega^t = 1) and P(omega^t = 1 | omega^0 = 1) over `edges`
/// distinct edges at each time.
std::vector<StationarityRow> stationarity_check(const ModelParams& params, std::span<const double> times,
                                                std::int64_t edges, std::uint64_t seed);

}  // namespace dynperc
