#include "dynperc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace dynperc {

namespace {

double holding_time(const VariableFamilies& fam, const UnorientedEdge& e, std::size_t k, bool state) {
  const auto& prm = fam.params();
  if (k == 0) return state ? fam.t_minus(e) : fam.t_plus(e);
  const double rate = state ? prm.v * (1.0 - prm.p) : prm.v * prm.p;
  return exponential_from_unit(VariableFamilies::uniform(fam.key(Family::EnvHold, e), k), rate);
}

}  // namespace

int EdgeTrajectory::switches_before_or_at(double t) const {
  return static_cast<int>(std::upper_bound(switch_times.begin(), switch_times.end(), t) - switch_times.begin());
}

EdgeTrajectory trajectory(const VariableFamilies& fam, const UnorientedEdge& e, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("trajectory horizon must be > 0");
  EdgeTrajectory traj;
  traj.edge = e;
  traj.initial_state = fam.omega(e);
  extend(traj, fam, horizon);
  return traj;
}

void extend(EdgeTrajectory& traj, const VariableFamilies& fam, double horizon) {
  if (horizon <= traj.horizon) return;
  std::size_t k = traj.switch_times.size();
  double t = traj.switch_times.empty() ? 0.0 : traj.switch_times.back();
  bool state = traj.initial_state != (k % 2 == 1);
  for (;;) {
    const double next = t + holding_time(fam, traj.edge, k, state);
    if (next > horizon) break;
    traj.switch_times.push_back(next);
    t = next;
    state = !state;
    ++k;
  }
  traj.horizon = horizon;
}

bool state_at(const EdgeTrajectory& traj, double t) {
  if (t < 0.0 || t > traj.horizon)
    throw OutOfHorizon("edge state requested at t=" + std::to_string(t) + " beyond horizon " +
                       std::to_string(traj.horizon));
  return traj.initial_state != (traj.switches_before_or_at(t) % 2 == 1);
}

const EdgeTrajectory& EnvironmentCache::trajectory(const UnorientedEdge& e, double horizon) {
  auto it = cache_.find(e);
  if (it == cache_.end())
    it = cache_.emplace(e, dynperc::trajectory(*fam_, e, std::max(horizon, initial_horizon_))).first;
  else if (horizon > it->second.horizon)
    extend(it->second, *fam_, std::max(horizon, 2.0 * it->second.horizon));
  return it->second;
}

bool EnvironmentCache::state_at(const UnorientedEdge& e, double t) {
  return dynperc::state_at(trajectory(e, t), t);
}

double transition_probability(double p, double v, double t, bool from_state) {
  const double decay = std::exp(-v * t);
  return from_state ? p + (1.0 - p) * decay : p * (1.0 - decay);
}

std::vector<StationarityRow> stationarity_check(const ModelParams& params, std::span<const double> times,
                                                std::int64_t edges, std::uint64_t seed) {
  if (edges < 1) throw std::invalid_argument("stationarity_check requires edges >= 1");
  const VariableFamilies fam(seed, params);
  const double horizon = std::max(1.0, *std::max_element(times.begin(), times.end()));
  std::vector<std::int64_t> hits(times.size(), 0), kept(times.size(), 0);
  std::int64_t started_open = 0;
  for (std::int64_t i = 0; i < edges; ++i) {
    const Site a = Site::of({static_cast<std::int32_t>(i % 1000), static_cast<std::int32_t>(i / 1000)});
    const auto traj = trajectory(fam, UnorientedEdge::of(a, a.shifted(0, 1)), horizon);
    started_open += traj.initial_state ? 1 : 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const bool on = state_at(traj, times[j]);
      hits[j] += on ? 1 : 0;
      kept[j] += (on && traj.initial_state) ? 1 : 0;
    }
  }
  auto se = [](double ph, std::int64_t n) { return n > 0 ? std::sqrt(ph * (1.0 - ph) / static_cast<double>(n)) : 0.0; };
  std::vector<StationarityRow> rows;
  for (std::size_t j = 0; j < times.size(); ++j) {
    StationarityRow r;
    r.t = times[j];
    r.empirical_p = static_cast<double>(hits[j]) / static_cast<double>(edges);
    r.standard_error = se(r.empirical_p, edges);
    r.started_open = started_open;
    r.empirical_transition =
        started_open > 0 ? static_cast<double>(kept[j]) / static_cast<double>(started_open) : 0.0;
    r.transition_standard_error = se(r.empirical_transition, started_open);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace dynperc
