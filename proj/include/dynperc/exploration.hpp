#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynperc/cpde.hpp"
#include "dynperc/randomness.hpp"

namespace dynperc {

enum class Algorithm { First, Second };
enum class Status { Exhausted, BudgetReached };
enum class EdgeKind : std::uint8_t { Closed = 0, FirstChance = 1, SecondChance = 2 };
enum class TreatmentRule { Fifo, Lifo };

const char* to_string(Status s);
const char* to_string(EdgeKind k);

struct SiteRecord {
  Site parent;
  double t_infect = kInfinity;
  double t_recover = kInfinity;  // stays infinite while untreated
  std::int64_t discovered_pass = -1;  // 0 for the origin
  std::int64_t treated_pass = -1;
  EdgeKind via = EdgeKind::Closed;  // kind of the incoming tree edge
};

struct ExaminedEdge {
  OrientedEdge edge;
  EdgeKind kind = EdgeKind::Closed;
  std::int64_t pass = 0;
};

struct TreeEdge {
  OrientedEdge edge;
  EdgeKind kind = EdgeKind::FirstChance;
};

/// Rooted tree (S_T, E1 u E2), oriented from the root.
struct InfectionTree {
  Site root;
  std::vector<Site> vertices;
  std::vector<TreeEdge> edges;
};

/// Full record of one exploration run. `examined` holds E0 u E1 u E2 in
/// examination order; `sites` holds every discovered site (S u S_T).
struct ExplorationState {
  Algorithm algorithm = Algorithm::First;
  Status status = Status::Exhausted;
  std::uint64_t seed = 0;
  ModelParams params;
  std::optional<Window> window;
  bool graphical = false;  // driven by the CPDE graphical construction
  bool timed = true;       // t_I / t_R are simulated
  Site origin;
  std::int64_t passes = 0;

  std::deque<Site> frontier;  // S
  std::vector<Site> treated;  // S_T in treatment order
  std::vector<ExaminedEdge> examined;
  std::unordered_map<Site, SiteRecord, SiteHash> sites;
  std::vector<OccupancyEvent> events;  // sorted by (time, site, sign) at the end
  std::vector<std::uint64_t> loop_audit;  // one digest per pass

  bool discovered(const Site& x) const { return sites.contains(x); }
  bool is_treated(const Site& x) const;
  std::vector<OrientedEdge> edges(EdgeKind kind) const;
  InfectionTree tree() const;
};

struct ExploreOptions {
  int dim = 2;
  std::int64_t budget = 10000;  // cap on |S_T|
  TreatmentRule rule = TreatmentRule::Fifo;
  std::optional<Window> window;  // edges leaving it are closed
};

/// Outcome of one infection attempt through an oriented edge.
struct Verdict {
  EdgeKind kind = EdgeKind::Closed;
  double delay = 0;  // t_I(z) - t_I(y) when open
};

/// Absolute infection time of the target; graphical runs use the mark time
/// itself so that no rounding separates the two constructions.
struct TimedVerdict {
  EdgeKind kind = EdgeKind::Closed;
  double time = kInfinity;
};

/// First-chance verdict: open iff X_(y,z) < X_y and omega = 1.
Verdict first_chance_verdict(const VariableFamilies& fam, const OrientedEdge& yz);

/// Second-chance verdict, i.e. epsilon^{parent}_(y,z) with its infection delay.
Verdict second_chance_verdict(const VariableFamilies& fam, const OrientedEdge& yz, const Site& parent);

/// Seeds `st` with the origin in S (t_I = 0 when timed).
void start_exploration(ExplorationState& st, int dim);

/// Treats y, which must be in S but already removed from the frontier
/// container: records t_R (when timed), asks
/// `examine(yz, parent(y), t_I(y), t_R(y))` -> TimedVerdict for every
/// undiscovered neighbor inside the window, and moves y to S_T. Returns the
/// number of sites discovered.
template <class Examine>
int treat_site(ExplorationState& st, const Site& y, std::int64_t pass, double t_recover, Examine&& examine) {
  const SiteRecord ry = st.sites.at(y);
  if (st.timed) st.events.push_back({t_recover, y, false});
  int found = 0;
  for (const Site& z : neighbors(y)) {
    if (st.sites.contains(z)) continue;
    const OrientedEdge yz{y, z};
    TimedVerdict v;
    if (!st.window || st.window->contains(z)) v = examine(yz, ry.parent, ry.t_infect, t_recover);
    st.examined.push_back({yz, v.kind, pass});
    if (v.kind == EdgeKind::Closed) continue;
    SiteRecord rz;
    rz.parent = y;
    rz.discovered_pass = pass;
    rz.via = v.kind;
    if (st.timed) {
      rz.t_infect = v.time;
      st.events.push_back({rz.t_infect, z, true});
    }
    st.sites.emplace(z, rz);
    st.frontier.push_back(z);
    ++found;
  }
  auto& rec = st.sites.at(y);
  if (st.timed) rec.t_recover = t_recover;
  rec.treated_pass = pass;
  st.treated.push_back(y);
  ++st.passes;

  std::uint64_t h = absorb(static_cast<std::uint64_t>(pass), SiteHash{}(y));
  h = absorb(h, st.frontier.size());
  h = absorb(h, st.treated.size());
  h = absorb(h, st.examined.size());
  st.loop_audit.push_back(h);
  return found;
}

/// First-chance exploration on keyed variables: y is infected through (x,y) iff
/// X_(x,y) < X_x and omega_{x,y} = 1.
ExplorationState explore_first(const VariableFamilies& fam, const ExploreOptions& options);

/// First-chance exploration driven by the same marks as `simulate`: X_x is the delay to
/// the first chi_x mark after t_I(x), X_(x,y) the delay to the first
/// infection mark of {x,y} after t_I(x), and omega the environment state at
/// that mark. This makes the dominated process pathwise below the CPDE.
ExplorationState explore_first_graphical(const VariableFamilies& fam, const Window& window, std::int64_t budget,
                                         double lambda_reference = 0.0);

/// Second-chance exploration: first chance when omega = 1 and xi = 1, second chance on
/// special edges with omega = 0 and zeta^{parent(y)} = 1.
ExplorationState explore_second(const VariableFamilies& fam, const ExploreOptions& options);

/// x in eta_t iff t_I(x) <= t < t_R(x).
std::vector<Site> reconstruct_eta(const ExplorationState& state, double t);

struct PropertyReport {
  bool p1 = true;  // S_T is exactly the set of once-infected treated sites
  bool p2 = true;  // one attempt per unoriented edge
  bool p3 = true;  // one simulated infection per undiscovered neighbor
  bool p4 = true;  // infected and cured at most once
  bool p5 = true;  // single incoming tree edge, from the parent
  bool p6 = true;  // edges from S_T to undiscovered sites are closed
  bool tree = true;
  std::vector<std::string> failures;

  bool all() const { return p1 && p2 && p3 && p4 && p5 && p6 && tree; }
};

PropertyReport check_properties(const ExplorationState& state);

/// Mutated copies used as negative controls for the checkers.
/// Repeats the first examined edge, so edge uniqueness must fail.
ExplorationState inject_duplicate_edge(ExplorationState state);
/// Gives one discovered site a second incoming open edge, so the
/// single-parent property must fail.
ExplorationState inject_second_parent(ExplorationState state);
/// Adds x to the dominated process on [t_infect, t_recover).
ExplorationState inject_infection(ExplorationState state, const Site& x, double t_infect, double t_recover);

/// Recomputes t_R and t_I of every treated site / tree edge from the keyed
/// variables; only meaningful for non-graphical runs.
bool check_time_coherence(const ExplorationState& state, const VariableFamilies& fam);

/// eta_t subset of CPDE eta_t at every event time of either process up to the
/// CPDE horizon. Throws std::invalid_argument if the runs do not share seed,
/// window and parameters or the state is not graphical.
bool check_domination(const ExplorationState& state, const CpdeRun& run);

struct AliveComparison {
  double t = 0;
  BinomialEstimate dominated;
  BinomialEstimate cpde;
};

/// Alive-at-t frequencies of the second-chance exploration (restricted to `window`) and of the
/// CPDE on the same window, over independent replicas.
std::vector<AliveComparison> compare_alive_in_law(const ModelParams& params, const Window& window,
                                                  std::span<const double> times, std::int64_t replicas,
                                                  std::uint64_t seed);

}  // namespace dynperc
