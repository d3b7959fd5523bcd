#include "dynperc/cpde.hpp"

#include <algorithm>
#include <bit>
#include <queue>
#include <stdexcept>

#include "dynperc/parallel.hpp"

namespace dynperc {

InfectionMarks::InfectionMarks(const VariableFamilies& fam, const UnorientedEdge& e, double lambda,
                               double lambda_reference)
    : stream_(MarkStream::poisson(fam.key(Family::ChiEdge, e), lambda_reference)),
      thin_key_(fam.key(Family::MarkThin, e)),
      keep_(lambda_reference > 0.0 ? lambda / lambda_reference : 0.0) {
  if (lambda > lambda_reference) throw std::invalid_argument("lambda exceeds the reference rate");
}

double InfectionMarks::next_after(double t) const {
  if (keep_ <= 0.0) return kInfinity;
  double m = stream_.next_after(t);
  if (keep_ >= 1.0) return m;
  while (m < kInfinity) {
    if (VariableFamilies::uniform(thin_key_, std::bit_cast<std::uint64_t>(m)) <= keep_) return m;
    m = stream_.next_after(m);
  }
  return m;
}

std::vector<Site> CpdeRun::infected_at(double t) const {
  std::vector<Site> out;
  std::vector<std::uint8_t> state(window.size(), 0);
  for (const auto& x : initial) state[window.index(x)] = 1;
  for (const auto& ev : events) {
    if (ev.time > t) break;
    state[window.index(ev.site)] = ev.infected ? 1 : 0;
  }
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state[i]) out.push_back(window.site_at(i));
  return out;
}

namespace {

struct QueueEntry {
  double time;
  std::uint8_t kind;  // 0 recovery, 1 infection mark
  std::size_t index;  // site index or edge index
  bool operator>(const QueueEntry& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    return index > o.index;
  }
};

class Simulator {
 public:
  Simulator(const ModelParams& params, const Window& window, double horizon, std::uint64_t seed,
            double lambda_reference)
      : fam_(seed, params),
        env_(fam_, horizon),
        window_(window),
        horizon_(horizon),
        lambda_ref_(lambda_reference),
        infected_(window.size(), 0),
        scheduled_(window.size() * static_cast<std::size_t>(window.dim), 0) {}

  CpdeRun run(std::span<const Site> initial) {
    CpdeRun out;
    out.params = fam_.params();
    out.lambda_reference = lambda_ref_;
    out.window = window_;
    out.horizon = horizon_;
    out.seed = fam_.seed();
    out.initial.assign(initial.begin(), initial.end());
    events_ = &out.events;

    std::vector<std::size_t> start;
    for (const auto& x : initial) {
      if (!window_.contains(x)) throw std::invalid_argument("initial site outside window: " + to_string(x));
      start.push_back(window_.index(x));
    }
    std::sort(start.begin(), start.end());
    start.erase(std::unique(start.begin(), start.end()), start.end());
    for (auto i : start) infect(i, 0.0);

    while (!queue_.empty()) {
      const QueueEntry top = queue_.top();
      queue_.pop();
      if (!queue_.empty() && queue_.top().time == top.time) ++out.tied_events;
      if (top.kind == 0) {
        recover(top.index, top.time);
      } else {
        fire_edge(top.index, top.time);
      }
    }
    for (std::size_t i = 0; i < infected_.size(); ++i)
      if (infected_[i]) out.final_infected.push_back(window_.site_at(i));
    return out;
  }

 private:
  // Edge (x, x + e_axis) is indexed by x's site index and axis.
  std::size_t edge_index(std::size_t site, int axis) const {
    return site * static_cast<std::size_t>(window_.dim) + static_cast<std::size_t>(axis);
  }

  void infect(std::size_t i, double t) {
    infected_[i] = 1;
    const Site x = window_.site_at(i);
    events_->push_back({t, x, true});
    const double r = fam_.chi_site(x).next_after(t);
    if (r <= horizon_) queue_.push({r, 0, i});
    touch(x, t);
  }

  void recover(std::size_t i, double t) {
    infected_[i] = 0;
    const Site x = window_.site_at(i);
    events_->push_back({t, x, false});
    touch(x, t);
  }

  bool active(std::size_t a, std::size_t b) const { return infected_[a] != infected_[b]; }

  void schedule(std::size_t edge, const UnorientedEdge& e, double t) {
    const double m = InfectionMarks(fam_, e, fam_.params().lambda, lambda_ref_).next_after(t);
    if (m <= horizon_) {
      queue_.push({m, 1, edge});
      scheduled_[edge] = 1;
    }
  }

  void touch(const Site& x, double t) {
    const std::size_t ix = window_.index(x);
    for (int axis = 0; axis < window_.dim; ++axis) {
      for (int sign : {-1, +1}) {
        const Site y = x.shifted(axis, sign);
        if (!window_.contains(y)) continue;
        const std::size_t iy = window_.index(y);
        const std::size_t low = sign > 0 ? ix : iy;
        const std::size_t edge = edge_index(low, axis);
        if (!scheduled_[edge] && active(ix, iy)) schedule(edge, UnorientedEdge::of(x, y), t);
      }
    }
  }

  void fire_edge(std::size_t edge, double t) {
    scheduled_[edge] = 0;
    const std::size_t ia = edge / static_cast<std::size_t>(window_.dim);
    const int axis = static_cast<int>(edge % static_cast<std::size_t>(window_.dim));
    const Site a = window_.site_at(ia);
    const Site b = a.shifted(axis, +1);
    const std::size_t ib = window_.index(b);
    if (!active(ia, ib)) return;
    const auto e = UnorientedEdge::of(a, b);
    if (env_.state_at(e, t)) {
      infect(infected_[ia] ? ib : ia, t);
    } else {
      schedule(edge, e, t);
    }
  }

  VariableFamilies fam_;
  EnvironmentCache env_;
  Window window_;
  double horizon_;
  double lambda_ref_;
  std::vector<std::uint8_t> infected_;
  std::vector<std::uint8_t> scheduled_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue_;
  std::vector<OccupancyEvent>* events_ = nullptr;
};

}  // namespace

CpdeRun simulate(const ModelParams& params, const Window& window, double horizon, std::uint64_t seed,
                 std::span<const Site> initial, double lambda_reference) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  params.validate();
  const double reference = lambda_reference > 0.0 ? lambda_reference : params.lambda;
  return Simulator(params, window, horizon, seed, reference).run(initial);
}

BinomialEstimate survival_estimate(const ModelParams& params, const Window& window, double horizon,
                                   std::int64_t replicas, std::uint64_t seed, double lambda_reference) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  const Site origin = Site::origin(window.dim);
  const auto alive = count_replicas(replicas, [&](std::int64_t i) {
    return simulate(params, window, horizon, seed + static_cast<std::uint64_t>(i), std::span(&origin, 1),
                    lambda_reference)
        .alive_at_horizon();
  });
  return BinomialEstimate::from_counts(alive, replicas);
}

}  // namespace dynperc
