#include "dynperc/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "dynperc/environment.hpp"
#include "dynperc/fields.hpp"
#include "dynperc/parallel.hpp"

namespace dynperc {

const char* to_string(Status s) { return s == Status::Exhausted ? "exhausted" : "budget_reached"; }

const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Closed: return "closed";
    case EdgeKind::FirstChance: return "first";
    case EdgeKind::SecondChance: return "second";
  }
  return "?";
}

bool ExplorationState::is_treated(const Site& x) const {
  auto it = sites.find(x);
  return it != sites.end() && it->second.treated_pass >= 0;
}

std::vector<OrientedEdge> ExplorationState::edges(EdgeKind kind) const {
  std::vector<OrientedEdge> out;
  for (const auto& e : examined)
    if (e.kind == kind) out.push_back(e.edge);
  return out;
}

InfectionTree ExplorationState::tree() const {
  InfectionTree t;
  t.root = origin;
  t.vertices = treated;
  for (const auto& e : examined)
    if (e.kind != EdgeKind::Closed) t.edges.push_back({e.edge, e.kind});
  return t;
}

Verdict first_chance_verdict(const VariableFamilies& fam, const OrientedEdge& yz) {
  const double attempt = fam.x_edge(yz);
  if (attempt < fam.x_site(yz.from) && fam.omega(UnorientedEdge::of(yz))) return {EdgeKind::FirstChance, attempt};
  return {};
}

Verdict second_chance_verdict(const VariableFamilies& fam, const OrientedEdge& yz, const Site& parent) {
  const auto e = UnorientedEdge::of(yz);
  if (fam.omega(e)) {
    if (xi(fam, yz)) return {EdgeKind::FirstChance, fam.x_edge(yz)};
    return {};
  }
  if (is_special(yz) && zeta_x(fam, yz, parent) == 1) return {EdgeKind::SecondChance, fam.t_plus(e) + fam.x_edge(yz)};
  return {};
}

void start_exploration(ExplorationState& st, int dim) {
  if (st.window && st.window->dim != dim) throw std::invalid_argument("window dimension differs from dim");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension out of range");
  st.origin = Site::origin(dim);
  SiteRecord root;
  root.parent = st.origin;
  root.t_infect = st.timed ? 0.0 : kInfinity;
  root.discovered_pass = 0;
  st.sites.emplace(st.origin, root);
  if (st.timed) st.events.push_back({0.0, st.origin, true});
  st.frontier.push_back(st.origin);
}

namespace {

// Shared loop of the first- and second-chance explorations. `Oracle` supplies
// the recovery time of the treated site and the verdict for each
// undiscovered neighbor.
template <class Oracle>
ExplorationState run_exploration(Algorithm alg, const VariableFamilies& fam, const ExploreOptions& opt,
                                 Oracle&& oracle) {
  if (opt.budget < 1) throw std::invalid_argument("budget must be >= 1");
  ExplorationState st;
  st.algorithm = alg;
  st.seed = fam.seed();
  st.params = fam.params();
  st.window = opt.window;
  start_exploration(st, opt.dim);

  std::int64_t pass = 0;
  while (!st.frontier.empty()) {
    if (static_cast<std::int64_t>(st.treated.size()) >= opt.budget) break;
    Site y;
    if (opt.rule == TreatmentRule::Fifo) {
      y = st.frontier.front();
      st.frontier.pop_front();
    } else {
      y = st.frontier.back();
      st.frontier.pop_back();
    }
    const double t_recover = oracle.recovery_time(y, st.sites.at(y).t_infect);
    treat_site(st, y, ++pass, t_recover, [&](const OrientedEdge& yz, const Site& parent, double t, double r) {
      return oracle.examine(yz, parent, t, r);
    });
  }
  st.status = st.frontier.empty() ? Status::Exhausted : Status::BudgetReached;
  std::sort(st.events.begin(), st.events.end());
  return st;
}

TimedVerdict at(const Verdict& v, double t_infect) {
  if (v.kind == EdgeKind::Closed) return {};
  return {v.kind, t_infect + v.delay};
}

struct KeyedFirstChance {
  const VariableFamilies& fam;

  double recovery_time(const Site& y, double t_infect) const { return t_infect + fam.x_site(y); }

  TimedVerdict examine(const OrientedEdge& yz, const Site&, double t_infect, double) const {
    return at(first_chance_verdict(fam, yz), t_infect);
  }
};

struct GraphicalFirstChance {
  const VariableFamilies& fam;
  EnvironmentCache& env;
  double lambda_reference;

  double recovery_time(const Site& y, double t_infect) const { return fam.chi_site(y).next_after(t_infect); }

  TimedVerdict examine(const OrientedEdge& yz, const Site&, double t_infect, double t_recover) const {
    const auto e = UnorientedEdge::of(yz);
    const double mark = InfectionMarks(fam, e, fam.params().lambda, lambda_reference).next_after(t_infect);
    if (mark < t_recover && env.state_at(e, mark)) return {EdgeKind::FirstChance, mark};
    return {};
  }
};

struct SecondChanceOracle {
  const VariableFamilies& fam;

  double recovery_time(const Site& y, double t_infect) const { return t_infect + fam.x_site(y); }

  TimedVerdict examine(const OrientedEdge& yz, const Site& parent, double t_infect, double) const {
    return at(second_chance_verdict(fam, yz, parent), t_infect);
  }
};

}  // namespace

ExplorationState explore_first(const VariableFamilies& fam, const ExploreOptions& options) {
  return run_exploration(Algorithm::First, fam, options, KeyedFirstChance{fam});
}

ExplorationState explore_first_graphical(const VariableFamilies& fam, const Window& window, std::int64_t budget,
                                         double lambda_reference) {
  EnvironmentCache env(fam, 1.0);
  ExploreOptions opt;
  opt.budget = budget;
  opt.dim = window.dim;
  opt.window = window;
  const double reference = lambda_reference > 0.0 ? lambda_reference : fam.params().lambda;
  auto st = run_exploration(Algorithm::First, fam, opt, GraphicalFirstChance{fam, env, reference});
  st.graphical = true;
  return st;
}

ExplorationState explore_second(const VariableFamilies& fam, const ExploreOptions& options) {
  return run_exploration(Algorithm::Second, fam, options, SecondChanceOracle{fam});
}

std::vector<Site> reconstruct_eta(const ExplorationState& state, double t) {
  if (t < 0.0) throw std::invalid_argument("reconstruct_eta requires t >= 0");
  std::vector<Site> out;
  for (const auto& [x, rec] : state.sites)
    if (rec.t_infect <= t && t < rec.t_recover) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

PropertyReport check_properties(const ExplorationState& st) {
  PropertyReport r;
  auto fail = [&](bool& flag, std::string msg) {
    flag = false;
    if (r.failures.size() < 32) r.failures.push_back(std::move(msg));
  };

  // P1
  {
    std::unordered_set<Site, SiteHash> treated(st.treated.begin(), st.treated.end());
    if (treated.size() != st.treated.size()) fail(r.p1, "S_T lists a site twice");
    for (const auto& x : st.treated) {
      auto it = st.sites.find(x);
      if (it == st.sites.end() || it->second.treated_pass < 0) fail(r.p1, "treated site without record " + to_string(x));
    }
    for (const auto& x : st.frontier)
      if (treated.contains(x)) fail(r.p1, "site both in S and S_T " + to_string(x));
    if (st.treated.size() + st.frontier.size() != st.sites.size()) fail(r.p1, "S u S_T differs from discovered set");
    for (const auto& [x, rec] : st.sites) {
      if (st.timed && !std::isfinite(rec.t_infect)) fail(r.p1, "discovered site without t_I " + to_string(x));
      if ((rec.treated_pass >= 0) != treated.contains(x)) fail(r.p1, "treated flag mismatch at " + to_string(x));
    }
    if (st.status == Status::Exhausted && !st.frontier.empty()) fail(r.p1, "exhausted run with non-empty S");
  }

  // P2
  {
    std::unordered_set<UnorientedEdge, UnorientedEdgeHash> seen;
    for (const auto& e : st.examined)
      if (!seen.insert(UnorientedEdge::of(e.edge)).second) fail(r.p2, "edge examined twice " + to_string(e.edge));
  }

  // P3 / P3'
  for (const auto& e : st.examined) {
    const auto& [y, z] = e.edge;
    auto iy = st.sites.find(y);
    if (iy == st.sites.end() || iy->second.treated_pass != e.pass) {
      fail(r.p3, "edge examined outside its source's treatment " + to_string(e.edge));
      continue;
    }
    auto iz = st.sites.find(z);
    if (e.kind == EdgeKind::Closed) {
      if (iz != st.sites.end() && iz->second.discovered_pass <= e.pass)
        fail(r.p3, "closed edge to an already discovered site " + to_string(e.edge));
      continue;
    }
    if (iz == st.sites.end() || iz->second.discovered_pass != e.pass || iz->second.parent != y) {
      fail(r.p3, "open edge does not discover its target " + to_string(e.edge));
      continue;
    }
    if (st.timed) {
      const double ty = iy->second.t_infect, tz = iz->second.t_infect;
      if (!(tz > ty)) fail(r.p3, "infection not after source infection " + to_string(e.edge));
      if (e.kind == EdgeKind::FirstChance && !(tz < iy->second.t_recover))
        fail(r.p3, "first-chance infection after source recovery " + to_string(e.edge));
    }
  }

  // P4
  if (st.timed) {
    std::unordered_map<Site, std::pair<int, int>, SiteHash> counts;
    std::unordered_map<Site, std::pair<double, double>, SiteHash> times;
    for (const auto& ev : st.events) {
      auto& c = counts[ev.site];
      auto& t = times[ev.site];
      if (ev.infected) {
        ++c.first;
        t.first = ev.time;
      } else {
        ++c.second;
        t.second = ev.time;
      }
    }
    for (const auto& [x, c] : counts) {
      if (c.first > 1 || c.second > 1) fail(r.p4, "site infected or cured twice " + to_string(x));
      if (c.second == 1 && c.first != 1) fail(r.p4, "cure without infection " + to_string(x));
      if (c.first == 1 && c.second == 1 && !(times[x].first < times[x].second))
        fail(r.p4, "cure not after infection " + to_string(x));
    }
    if (counts.size() != st.sites.size()) fail(r.p4, "event sites differ from discovered sites");
  }

  // P5
  {
    std::unordered_map<Site, int, SiteHash> incoming;
    for (const auto& e : st.examined) {
      if (e.kind == EdgeKind::Closed) continue;
      ++incoming[e.edge.to];
      auto it = st.sites.find(e.edge.to);
      if (it != st.sites.end() && it->second.parent != e.edge.from)
        fail(r.p5, "tree edge not from the recorded parent " + to_string(e.edge));
    }
    for (const auto& [x, rec] : st.sites) {
      const int in = incoming.contains(x) ? incoming[x] : 0;
      if (x == st.origin) {
        if (in != 0) fail(r.p5, "tree edge into the root");
      } else if (in != 1) {
        fail(r.p5, "site with " + std::to_string(in) + " incoming tree edges " + to_string(x));
      }
    }
  }

  // P6
  {
    std::unordered_set<OrientedEdge, OrientedEdgeHash> closed;
    for (const auto& e : st.examined)
      if (e.kind == EdgeKind::Closed) closed.insert(e.edge);
    for (const auto& y : st.treated)
      for (const Site& z : neighbors(y))
        if (!st.sites.contains(z) && !closed.contains({y, z}))
          fail(r.p6, "unexamined or open edge leaving S_T " + to_string(OrientedEdge{y, z}));
  }

  // Tree: every discovered vertex reaches the root through parents without
  // cycles, and infection times increase along tree edges.
  for (const auto& [x, rec] : st.sites) {
    Site cur = x;
    std::size_t steps = 0;
    while (cur != st.origin && steps <= st.sites.size()) {
      auto it = st.sites.find(cur);
      if (it == st.sites.end()) break;
      if (st.timed && cur != st.origin) {
        auto ip = st.sites.find(it->second.parent);
        if (ip != st.sites.end() && !(ip->second.t_infect < it->second.t_infect))
          fail(r.tree, "infection time not increasing at " + to_string(cur));
      }
      cur = it->second.parent;
      ++steps;
    }
    if (cur != st.origin) fail(r.tree, "vertex not connected to the root " + to_string(x));
  }
  return r;
}

ExplorationState inject_duplicate_edge(ExplorationState st) {
  if (st.examined.empty()) throw std::invalid_argument("no examined edge to duplicate");
  st.examined.push_back(st.examined.front());
  return st;
}

ExplorationState inject_second_parent(ExplorationState st) {
  // Target: the head of the first open edge, or a fresh neighbor of the origin.
  Site z = st.origin.shifted(0, 1);
  std::int64_t pass = 1;
  auto open = std::find_if(st.examined.begin(), st.examined.end(),
                           [](const ExaminedEdge& e) { return e.kind != EdgeKind::Closed; });
  if (open != st.examined.end()) {
    z = open->edge.to;
    pass = open->pass;
  } else if (!st.sites.contains(z)) {
    SiteRecord r;
    r.parent = st.origin;
    r.discovered_pass = pass;
    r.t_infect = 0.5;
    r.via = EdgeKind::FirstChance;
    st.sites.emplace(z, r);
    st.examined.push_back({{st.origin, z}, EdgeKind::FirstChance, pass});
  }
  const Site& parent = st.sites.at(z).parent;
  for (const Site& w : neighbors(z)) {
    if (w == parent) continue;
    st.examined.push_back({{w, z}, EdgeKind::FirstChance, pass});
    break;
  }
  return st;
}

ExplorationState inject_infection(ExplorationState st, const Site& x, double t_infect, double t_recover) {
  SiteRecord r;
  r.parent = st.origin;
  r.t_infect = t_infect;
  r.t_recover = t_recover;
  r.discovered_pass = st.passes + 1;
  r.treated_pass = st.passes + 1;
  st.sites[x] = r;
  st.events.push_back({t_infect, x, true});
  st.events.push_back({t_recover, x, false});
  std::sort(st.events.begin(), st.events.end());
  return st;
}

bool check_time_coherence(const ExplorationState& st, const VariableFamilies& fam) {
  if (st.graphical) throw std::invalid_argument("time coherence is defined for keyed runs only");
  constexpr double tol = 1e-9;
  auto close = [](double a, double b) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
  for (const auto& x : st.treated) {
    const auto& rec = st.sites.at(x);
    if (!close(rec.t_recover, rec.t_infect + fam.x_site(x))) return false;
  }
  for (const auto& e : st.examined) {
    if (e.kind == EdgeKind::Closed) continue;
    const double parent_t = st.sites.at(e.edge.from).t_infect;
    double expected = parent_t + fam.x_edge(e.edge);
    if (e.kind == EdgeKind::SecondChance) expected += fam.t_plus(UnorientedEdge::of(e.edge));
    if (!close(st.sites.at(e.edge.to).t_infect, expected)) return false;
  }
  return true;
}

bool check_domination(const ExplorationState& st, const CpdeRun& run) {
  if (!st.graphical) throw std::invalid_argument("pathwise domination needs a graphical exploration");
  if (st.seed != run.seed) throw std::invalid_argument("seed mismatch between exploration and CPDE run");
  if (!st.window || !(*st.window == run.window))
    throw std::invalid_argument("window mismatch between exploration and CPDE run");
  if (!(st.params == run.params)) throw std::invalid_argument("parameter mismatch between exploration and CPDE run");

  std::vector<double> times;
  for (const auto& ev : st.events)
    if (ev.time <= run.horizon) times.push_back(ev.time);
  for (const auto& ev : run.events) times.push_back(ev.time);
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<std::pair<Site, SiteRecord>> dominated(st.sites.begin(), st.sites.end());
  std::vector<std::uint8_t> infected(run.window.size(), 0);
  for (const auto& x : run.initial) infected[run.window.index(x)] = 1;
  std::size_t next = 0;
  for (double t : times) {
    while (next < run.events.size() && run.events[next].time <= t) {
      infected[run.window.index(run.events[next].site)] = run.events[next].infected ? 1 : 0;
      ++next;
    }
    for (const auto& [x, rec] : dominated) {
      if (!(rec.t_infect <= t && t < rec.t_recover)) continue;
      if (!run.window.contains(x) || !infected[run.window.index(x)]) return false;
    }
  }
  return true;
}

std::vector<AliveComparison> compare_alive_in_law(const ModelParams& params, const Window& window,
                                                  std::span<const double> times, std::int64_t replicas,
                                                  std::uint64_t seed) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  const double horizon = *std::max_element(times.begin(), times.end());
  const Site origin = Site::origin(window.dim);
  const auto k = static_cast<std::size_t>(times.size());
  // Bit j of the result: alive at times[j]. Dominated replicas use seeds
  // seed + i, CPDE replicas seed + replicas + i, so the two samples are independent.
  const auto dominated = map_replicas<std::vector<std::uint8_t>>(replicas, [&](std::int64_t i) {
    const VariableFamilies fam(seed + static_cast<std::uint64_t>(i), params);
    ExploreOptions opt;
    opt.budget = static_cast<std::int64_t>(window.size());
    opt.dim = window.dim;
    opt.window = window;
    const auto st = explore_second(fam, opt);
    std::vector<std::uint8_t> alive(k, 0);
    for (std::size_t j = 0; j < k; ++j)
      for (const auto& [x, rec] : st.sites)
        if (rec.t_infect <= times[j] && times[j] < rec.t_recover) {
          alive[j] = 1;
          break;
        }
    return alive;
  });
  const auto full = map_replicas<std::vector<std::uint8_t>>(replicas, [&](std::int64_t i) {
    const auto run = simulate(params, window, horizon,
                              seed + static_cast<std::uint64_t>(replicas) + static_cast<std::uint64_t>(i),
                              std::span(&origin, 1));
    std::vector<std::uint8_t> alive(k, 0);
    for (std::size_t j = 0; j < k; ++j) alive[j] = run.infected_at(times[j]).empty() ? 0 : 1;
    return alive;
  });
  std::vector<AliveComparison> out;
  for (std::size_t j = 0; j < k; ++j) {
    std::int64_t a = 0, b = 0;
    for (const auto& v : dominated) a += v[j];
    for (const auto& v : full) b += v[j];
    out.push_back({times[j], BinomialEstimate::from_counts(a, replicas), BinomialEstimate::from_counts(b, replicas)});
  }
  return out;
}

}  // namespace dynperc
