#include "dynperc/coupling.hpp"

#include <algorithm>
#include <sstream>

#include "dynperc/fields.hpp"
#include "dynperc/parallel.hpp"
#include "dynperc/perco.hpp"

namespace dynperc {

LowerBackend LowerBackend::thinned(double theta_xi, double theta_zeta) {
  LowerBackend b;
  b.kind = Kind::Thinned;
  b.theta_xi = theta_xi;
  b.theta_zeta = theta_zeta;
  b.validate();
  return b;
}

LowerBackend LowerBackend::independent(double q, double theta_zeta) {
  LowerBackend b;
  b.kind = Kind::Independent;
  b.q = q;
  b.theta_zeta = theta_zeta;
  b.validate();
  return b;
}

void LowerBackend::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(theta_xi) || !unit(theta_zeta) || !unit(q))
    throw std::invalid_argument("backend parameters must lie in [0,1]");
}

const char* to_string(LowerBackend::Kind k) { return k == LowerBackend::Kind::Thinned ? "thinned" : "independent"; }

namespace {

bool upper_chance(const VariableFamilies& fam, Algorithm alg, const OrientedEdge& e) {
  return alg == Algorithm::First ? xi_first(fam, e) : xi(fam, e);
}

int thinning_bit(const VariableFamilies& fam, Family f, const OrientedEdge& e, double theta) {
  return fam.uniform(f, e) <= theta ? 1 : 0;
}

}  // namespace

bool lower_xi(const VariableFamilies& fam, const LowerBackend& backend, Algorithm alg, const OrientedEdge& e) {
  if (backend.kind == LowerBackend::Kind::Independent) return fam.uniform(Family::IndependentXi, e) <= backend.q;
  return thinning_bit(fam, Family::BetaXi, e, backend.theta_xi) == 1 && upper_chance(fam, alg, e);
}

int lower_epsilon(const VariableFamilies& fam, const LowerBackend& backend, Algorithm alg, const OrientedEdge& e) {
  const bool omega = fam.omega(UnorientedEdge::of(e));
  if (omega) return lower_xi(fam, backend, alg, e) ? 1 : 0;
  if (alg == Algorithm::First || !is_special(e)) return 0;
  if (thinning_bit(fam, Family::BetaZeta, e, backend.theta_zeta) == 0) return 0;
  return zeta_bar(fam, e) == 1 ? 2 : 0;
}

namespace {

class CoupledRun {
 public:
  CoupledRun(const VariableFamilies& fam, const LowerBackend& backend, Algorithm alg, const CoupleOptions& opt)
      : fam_(fam), backend_(backend), alg_(alg), opt_(opt) {
    backend.validate();
    if (opt.budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (!opt.upper_enabled && !opt.lower_enabled) throw std::invalid_argument("both sides disabled");
    st_.algorithm = alg;
    st_.backend = backend;
    for (auto* side : {&st_.upper, &st_.lower}) {
      side->algorithm = alg;
      side->seed = fam.seed();
      side->params = fam.params();
      side->window = opt.window;
    }
    st_.lower.timed = false;
    if (opt.upper_enabled) start_exploration(st_.upper, opt.dim);
    if (opt.lower_enabled) start_exploration(st_.lower, opt.dim);
    if (opt.upper_enabled && opt.lower_enabled) {
      lower_in_upper_ = 1;  // the origin
    }
  }

  CoupledState run() {
    while (true) {
      drop_treated_upper_heads();
      const bool lower_ready = !st_.lower.frontier.empty();
      const bool upper_ready = !st_.upper.frontier.empty();
      if (!lower_ready && !upper_ready) break;
      const auto treated = std::max(st_.upper.treated.size(), st_.lower.treated.size());
      if (static_cast<std::int64_t>(treated) >= opt_.budget) break;

      const std::int64_t pass = ++st_.passes;
      consulted_.clear();
      pass_failed_ = false;
      Site y;
      if (lower_ready) {
        y = st_.lower.frontier.front();
        st_.lower.frontier.pop_front();
      } else {
        y = st_.upper.frontier.front();
        st_.upper.frontier.pop_front();
      }
      const bool in_upper = upper_pending(y);
      if (in_upper) treat_upper(y, pass);
      if (lower_ready) treat_lower(y, pass);
      check_counters(pass, y);
    }
    compact_upper_frontier();
    const bool open = !st_.upper.frontier.empty() || !st_.lower.frontier.empty();
    st_.status = open ? Status::BudgetReached : Status::Exhausted;
    st_.upper.status = st_.upper.frontier.empty() ? Status::Exhausted : Status::BudgetReached;
    st_.lower.status = st_.lower.frontier.empty() ? Status::Exhausted : Status::BudgetReached;
    std::sort(st_.upper.events.begin(), st_.upper.events.end());
    if (opt_.upper_enabled && opt_.lower_enabled && !check_inclusion(st_)) fail(st_.passes, Site(), "final recheck");
    return std::move(st_);
  }

 private:
  bool both() const { return opt_.upper_enabled && opt_.lower_enabled; }

  // y is in S: discovered by the upper side and not yet treated there.
  bool upper_pending(const Site& y) const {
    if (!opt_.upper_enabled) return false;
    auto it = st_.upper.sites.find(y);
    return it != st_.upper.sites.end() && it->second.treated_pass < 0;
  }

  // Sites taken through the lower frontier leave stale copies in the upper
  // deque; they are skipped here and compacted at the end.
  void drop_treated_upper_heads() {
    while (!st_.upper.frontier.empty() && !upper_pending(st_.upper.frontier.front())) st_.upper.frontier.pop_front();
  }

  void compact_upper_frontier() {
    auto& f = st_.upper.frontier;
    f.erase(std::remove_if(f.begin(), f.end(), [&](const Site& x) { return !upper_pending(x); }), f.end());
  }

  void treat_upper(const Site& y, std::int64_t pass) {
    const double t_recover = st_.upper.sites.at(y).t_infect + fam_.x_site(y);
    treat_site(st_.upper, y, pass, t_recover, [&](const OrientedEdge& yz, const Site& parent, double t_infect, double) {
      const Verdict v = alg_ == Algorithm::First ? first_chance_verdict(fam_, yz) : second_chance_verdict(fam_, yz, parent);
      FieldRecord rec{yz, false, fam_.omega(UnorientedEdge::of(yz)) ? 1 : 0, upper_chance(fam_, alg_, yz) ? 1 : 0, -1,
                      -1, static_cast<int>(v.kind)};
      if (v.kind == EdgeKind::SecondChance) rec.second = 1;
      consulted_.push_back(rec);
      if (v.kind != EdgeKind::Closed && both() && st_.lower.sites.contains(yz.to)) ++lower_in_upper_;
      if (v.kind == EdgeKind::Closed) return TimedVerdict{};
      return TimedVerdict{v.kind, t_infect + v.delay};
    });
    if (both() && st_.lower.is_treated(y)) ++lower_treated_in_upper_;
  }

  void treat_lower(const Site& y, std::int64_t pass) {
    treat_site(st_.lower, y, pass, 0.0, [&](const OrientedEdge& yz, const Site&, double, double) {
      const int eps = lower_epsilon(fam_, backend_, alg_, yz);
      FieldRecord rec{yz, true, fam_.omega(UnorientedEdge::of(yz)) ? 1 : 0, lower_xi(fam_, backend_, alg_, yz) ? 1 : 0,
                      -1, -1, eps};
      if (backend_.kind == LowerBackend::Kind::Thinned) rec.beta = thinning_bit(fam_, Family::BetaXi, yz, backend_.theta_xi);
      if (eps == 2) rec.second = 1;
      consulted_.push_back(rec);
      TimedVerdict v;
      v.kind = static_cast<EdgeKind>(eps);
      if (eps >= 1 && both()) {
        ++st_.invariant_checks;
        if (!st_.upper.sites.contains(yz.to)) {
          fail(pass, y, "lower discovered " + to_string(yz.to) + " outside S u S_T");
        } else {
          ++lower_in_upper_;
        }
      }
      return v;
    });
    if (both()) {
      ++st_.invariant_checks;
      if (!st_.upper.is_treated(y)) {
        fail(pass, y, "lower treated " + to_string(y) + " outside S_T");
      } else {
        ++lower_treated_in_upper_;
      }
    }
  }

  // O(1) per-pass form of the full inclusion check: the counters track exactly
  // how many lower sites are matched on the upper side.
  void check_counters(std::int64_t pass, const Site& y) {
    if (!both()) return;
    ++st_.invariant_checks;
    if (lower_in_upper_ != st_.lower.sites.size() || lower_treated_in_upper_ != st_.lower.treated.size())
      fail(pass, y, "inclusion counters disagree");
  }

  void fail(std::int64_t pass, const Site& y, const std::string& what) {
    if (!opt_.strict) {
      if (!pass_failed_) ++st_.violations;
      pass_failed_ = true;
      return;
    }
    throw InvariantViolation("coupling inclusion violated at pass " + std::to_string(pass) + ": " + what,
                             dump(pass, y), pass);
  }

  std::string dump(std::int64_t pass, const Site& y) const {
    std::ostringstream os;
    os << "pass " << pass << "\nsite " << to_string(y) << "\nseed " << fam_.seed() << "\nbackend "
       << to_string(backend_.kind) << " theta_xi=" << backend_.theta_xi << " theta_zeta=" << backend_.theta_zeta
       << " q=" << backend_.q << "\nupper frontier:";
    for (const auto& x : st_.upper.frontier)
      if (upper_pending(x)) os << ' ' << to_string(x);
    os << "\nlower frontier:";
    for (const auto& x : st_.lower.frontier) os << ' ' << to_string(x);
    os << "\nfields:";
    for (const auto& r : consulted_)
      os << "\n  " << (r.lower ? "lower " : "upper ") << to_string(r.edge) << " omega=" << r.omega
         << " chance=" << r.chance << " beta=" << r.beta << " second=" << r.second << " verdict=" << r.verdict;
    os << '\n';
    return os.str();
  }

  const VariableFamilies& fam_;
  LowerBackend backend_;
  Algorithm alg_;
  CoupleOptions opt_;
  CoupledState st_;
  std::vector<FieldRecord> consulted_;
  std::size_t lower_in_upper_ = 0;
  std::size_t lower_treated_in_upper_ = 0;
  bool pass_failed_ = false;
};

}  // namespace

CoupledState explore_coupled_first(const VariableFamilies& fam, const LowerBackend& backend,
                                   const CoupleOptions& options) {
  return CoupledRun(fam, backend, Algorithm::First, options).run();
}

CoupledState explore_coupled_second(const VariableFamilies& fam, const LowerBackend& backend,
                                    const CoupleOptions& options) {
  return CoupledRun(fam, backend, Algorithm::Second, options).run();
}

bool check_inclusion(const CoupledState& st) {
  for (const auto& x : st.lower.treated)
    if (!st.upper.is_treated(x)) return false;
  for (const auto& [x, rec] : st.lower.sites)
    if (!st.upper.discovered(x)) return false;
  return true;
}

ClusterLawReport lower_cluster_law_check(int d, double p, double q, int L, std::int64_t replicas,
                                         std::uint64_t seed) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  const Window window(d, L);
  const ModelParams params{p, 1.0, 1.0};
  params.validate();
  const auto backend = LowerBackend::independent(q);

  struct Sample {
    std::int64_t size = 0;
    bool reach = false;
  };
  const auto explored = map_replicas<Sample>(replicas, [&](std::int64_t i) {
    const VariableFamilies fam(seed + static_cast<std::uint64_t>(i), params);
    CoupleOptions opt;
    opt.dim = d;
    opt.window = window;
    opt.budget = static_cast<std::int64_t>(window.size());
    opt.upper_enabled = false;
    const auto st = explore_coupled_first(fam, backend, opt);
    Sample s{static_cast<std::int64_t>(st.lower.treated.size()), false};
    for (const auto& x : st.lower.treated)
      if (window.on_boundary(x)) s.reach = true;
    return s;
  });
  const PercoConfig cfg{d, p * q, 0.0, L};
  const auto direct = map_replicas<Sample>(replicas, [&](std::int64_t i) {
    const auto cl = sample_cluster(cfg, seed + static_cast<std::uint64_t>(replicas + i));
    return Sample{static_cast<std::int64_t>(cl.size()), cl.touched_boundary};
  });

  ClusterLawReport rep;
  std::vector<double> a, b;
  std::int64_t ra = 0, rb = 0;
  for (const auto& s : explored) {
    rep.exploration_sizes.push_back(s.size);
    a.push_back(static_cast<double>(s.size));
    ra += s.reach;
  }
  for (const auto& s : direct) {
    rep.direct_sizes.push_back(s.size);
    b.push_back(static_cast<double>(s.size));
    rb += s.reach;
  }
  rep.exploration_mean = mean_estimate(a);
  rep.direct_mean = mean_estimate(b);
  rep.exploration_reach = BinomialEstimate::from_counts(ra, replicas);
  rep.direct_reach = BinomialEstimate::from_counts(rb, replicas);
  rep.ks = ks_two_sample(a, b);
  rep.pass = rep.ks.p_value >= 0.01;
  return rep;
}

}  // namespace dynperc
