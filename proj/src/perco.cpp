#include "dynperc/perco.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_set>

#include "dynperc/parallel.hpp"
#include "dynperc/randomness.hpp"
#include "dynperc/second_chance.hpp"

namespace dynperc {

void PercoConfig::validate() const {
  if (d < 2 || d > kMaxDim) throw std::invalid_argument("perco: d must be in [2, 6]");
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("perco: a and b must be >= 0");
  if (a + b > 1.0 + 1e-12) throw std::invalid_argument("perco: a + b must be <= 1");
  if (L < 1) throw std::invalid_argument("perco: L must be >= 1");
}

double perco_uniform(std::uint64_t seed, const UnorientedEdge& e) {
  static const ModelParams unused{};
  return VariableFamilies(seed, unused).uniform(Family::PercoEdge, e);
}

bool perco_edge_open(const PercoConfig& cfg, std::uint64_t seed, const UnorientedEdge& e) {
  const double u = perco_uniform(seed, e);
  return u <= (is_special(e) ? cfg.a + cfg.b : cfg.a);
}

bool PercoCluster::contains(const Site& x) const { return std::find(sites.begin(), sites.end(), x) != sites.end(); }

PercoCluster sample_cluster(const PercoConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Window w = cfg.window();
  std::vector<std::uint8_t> seen(w.size(), 0);
  PercoCluster out;
  const Site origin = Site::origin(cfg.d);
  seen[w.index(origin)] = 1;
  std::deque<Site> queue{origin};
  while (!queue.empty()) {
    const Site x = queue.front();
    queue.pop_front();
    out.sites.push_back(x);
    if (w.on_boundary(x)) out.touched_boundary = true;
    for (const Site& y : neighbors(x)) {
      if (!w.contains(y)) continue;
      const auto e = UnorientedEdge::of(x, y);
      const std::size_t iy = w.index(y);
      // Each open edge inside the cluster is recorded once, from its first endpoint.
      if (seen[iy] == 2) continue;
      if (!perco_edge_open(cfg, seed, e)) continue;
      out.open_edges.push_back(e);
      if (!seen[iy]) {
        seen[iy] = 1;
        queue.push_back(y);
      }
    }
    seen[w.index(x)] = 2;
  }
  return out;
}

BinomialEstimate boundary_reach_probability(const PercoConfig& cfg, std::int64_t replicas, std::uint64_t seed) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  cfg.validate();
  const auto hits = count_replicas(replicas, [&](std::int64_t i) {
    return sample_cluster(cfg, seed + static_cast<std::uint64_t>(i)).touched_boundary;
  });
  return BinomialEstimate::from_counts(hits, replicas);
}

EnhancementReport enhancement_monotonicity(const PercoConfig& cfg, std::span<const double> b_values,
                                           std::int64_t replicas, std::uint64_t seed) {
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (b_values.empty()) throw std::invalid_argument("enhancement: no b values");
  if (!std::is_sorted(b_values.begin(), b_values.end()))
    throw std::invalid_argument("enhancement: b values must be non-decreasing");
  const std::size_t k = b_values.size();
  const auto reach = map_replicas<std::vector<std::uint8_t>>(replicas, [&](std::int64_t i) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
    std::vector<std::uint8_t> hit(k, 0);
    std::unordered_set<Site, SiteHash> previous;
    for (std::size_t j = 0; j < k; ++j) {
      PercoConfig c = cfg;
      c.b = b_values[j];
      const auto cl = sample_cluster(c, s);
      hit[j] = cl.touched_boundary ? 1 : 0;
      std::unordered_set<Site, SiteHash> current(cl.sites.begin(), cl.sites.end());
      for (const Site& x : previous)
        if (!current.contains(x))
          throw InvariantError("enhancement inclusion failed: seed " + std::to_string(s) + ", b " +
                               std::to_string(b_values[j]) + ", site " + to_string(x));
      previous = std::move(current);
    }
    return hit;
  });
  EnhancementReport rep;
  rep.b_values.assign(b_values.begin(), b_values.end());
  rep.replicas = replicas;
  rep.inclusion_checks = replicas * static_cast<std::int64_t>(k > 0 ? k - 1 : 0);
  for (std::size_t j = 0; j < k; ++j) {
    std::int64_t n = 0;
    for (const auto& h : reach) n += h[j];
    rep.reach.push_back(BinomialEstimate::from_counts(n, replicas));
  }
  rep.strictly_increasing = true;
  for (std::size_t j = 1; j < k; ++j)
    if (!(rep.reach[j].estimate > rep.reach[j - 1].estimate)) rep.strictly_increasing = false;
  return rep;
}

double pc_bond(int d) {
  switch (d) {
    case 2: return 0.5;
    case 3: return 0.2488126;
    case 4: return 0.1601314;
    case 5: return 0.118172;
    case 6: return 0.0942;
    default: throw std::invalid_argument("no bond threshold tabulated for d = " + std::to_string(d));
  }
}

bool evaluate_relation(double lhs, const std::string& relation, double rhs) {
  if (relation == "<") return lhs < rhs;
  if (relation == "<=") return lhs <= rhs;
  if (relation == ">") return lhs > rhs;
  if (relation == ">=") return lhs >= rhs;
  throw std::invalid_argument("unknown relation " + relation);
}

double schedule_b0(double pc, double r) { return std::min((1.0 - pc) / 2.0, r * (1.0 - pc)); }

Certificate survival_certificate(const ScheduleInputs& in) {
  Certificate c;
  c.inputs = in;
  c.b0 = schedule_b0(in.pc, in.r);
  c.a = in.p * in.q;
  c.b = in.zeta_estimate * (1.0 - in.p);
  auto line = [&](std::string name, double lhs, std::string rel, double rhs) {
    const bool ok = evaluate_relation(lhs, rel, rhs);
    c.lines.push_back({std::move(name), lhs, std::move(rel), rhs, ok});
  };
  line("r > 0", in.r, ">", 0.0);
  line("r < bound(d, pc)", in.r, "<", zeta_bound(in.d, in.pc));
  line("b0 < 1 - pc", c.b0, "<", 1.0 - in.pc);
  line("a0 < pc (feasibility)", in.a0_proxy, "<", in.pc);
  line("a0 < p", in.a0_proxy, "<", in.p);
  line("p < pc", in.p, "<", in.pc);
  line("r < bound(d, p)", in.r, "<", zeta_bound(in.d, in.p));
  line("P(zeta_=1) >= r", in.zeta_estimate, ">=", in.r);
  line("b = P(zeta_=1)(1-p) >= b0", c.b, ">=", c.b0);
  line("a = pq >= a0", c.a, ">=", in.a0_proxy);
  line("a + b <= 1", c.a + c.b, "<=", 1.0);
  c.feasible = in.a0_proxy < in.pc;
  c.pass = std::all_of(c.lines.begin(), c.lines.end(), [](const auto& l) { return l.holds; });
  return c;
}

bool recheck_certificate(const Certificate& c) {
  bool all = true;
  for (const auto& l : c.lines) {
    const bool ok = evaluate_relation(l.lhs, l.relation, l.rhs);
    if (ok != l.holds) return false;
    all = all && ok;
  }
  return all == c.pass;
}

A0Scan a0_proxy_scan(int d, double b, int L, std::span<const double> a_values, double threshold,
                     std::int64_t replicas, std::uint64_t seed) {
  A0Scan scan;
  scan.threshold = threshold;
  scan.a_values.assign(a_values.begin(), a_values.end());
  for (double a : a_values) {
    PercoConfig cfg{d, a, b, L};
    scan.reach.push_back(boundary_reach_probability(cfg, replicas, seed));
    if (scan.reach.back().estimate >= threshold && a < scan.a0) {
      scan.a0 = a;
      break;
    }
  }
  return scan;
}

}  // namespace dynperc
