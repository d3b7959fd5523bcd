#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "dynperc/perco.hpp"
#include "dynperc/second_chance.hpp"

using namespace dynperc;

namespace {

// Union-find over every open edge of the window.
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct Component {
  std::set<Site> sites;
  bool boundary = false;
};

Component origin_component(const PercoConfig& cfg, std::uint64_t seed) {
  const Window w = cfg.window();
  UnionFind uf(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Site x = w.site_at(i);
    for (int axis = 0; axis < cfg.d; ++axis) {
      const Site y = x.shifted(axis, +1);
      if (!w.contains(y)) continue;
      const auto e = UnorientedEdge::of(x, y);
      const double u = perco_uniform(seed, e);
      if (u <= cfg.a + (is_special(e) ? cfg.b : 0.0)) uf.unite(i, w.index(y));
    }
  }
  Component c;
  const std::size_t root = uf.find(w.index(Site::origin(cfg.d)));
  for (std::size_t i = 0; i < w.size(); ++i)
    if (uf.find(i) == root) {
      c.sites.insert(w.site_at(i));
      c.boundary = c.boundary || w.on_boundary(w.site_at(i));
    }
  return c;
}

}  // namespace

TEST_CASE("BFS cluster equals the union-find component") {
  for (const PercoConfig cfg : {PercoConfig{2, 0.5, 0.0, 12}, PercoConfig{2, 0.45, 0.4, 12},
                                PercoConfig{3, 0.25, 0.2, 5}, PercoConfig{2, 0.7, 0.0, 6}})
    for (std::uint64_t s = 0; s < 60; ++s) {
      const auto cl = sample_cluster(cfg, s);
      const auto uf = origin_component(cfg, s);
      CHECK(std::set<Site>(cl.sites.begin(), cl.sites.end()) == uf.sites);
      CHECK(cl.sites.size() == uf.sites.size());
      CHECK(cl.touched_boundary == uf.boundary);
      for (const auto& e : cl.open_edges) CHECK(perco_edge_open(cfg, s, e));
    }
}

TEST_CASE("degenerate configurations") {
  const PercoConfig all{2, 1.0, 0.0, 8};
  const auto cl = sample_cluster(all, 1);
  CHECK(cl.size() == all.window().size());
  CHECK(cl.touched_boundary);
  CHECK(boundary_reach_probability(all, 10, 1).estimate == 1.0);
  // The origin touches no special edge, so a = 0 keeps it isolated whatever b is.
  const auto lonely = sample_cluster(PercoConfig{2, 0.0, 1.0, 8}, 1);
  CHECK(lonely.size() == 1);
  CHECK_THROWS_AS(sample_cluster(PercoConfig{2, 0.7, 0.4, 8}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_cluster(PercoConfig{1, 0.5, 0.0, 8}, 1), std::invalid_argument);
}

TEST_CASE("coupled monotonicity in a and b") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto small = sample_cluster(PercoConfig{2, 0.45, 0.1, 16}, s);
    const auto more_a = sample_cluster(PercoConfig{2, 0.5, 0.1, 16}, s);
    const auto more_b = sample_cluster(PercoConfig{2, 0.45, 0.3, 16}, s);
    for (const Site& x : small.sites) {
      CHECK(more_a.contains(x));
      CHECK(more_b.contains(x));
    }
  }
  const std::vector<double> zero{0.0, 0.0};
  const auto eq = enhancement_monotonicity(PercoConfig{2, 0.49, 0.0, 16}, zero, 100, 2);
  CHECK(eq.reach[0].successes == eq.reach[1].successes);
  const std::vector<double> grid{0.0, 0.1, 0.2, 0.3};
  const auto rep = enhancement_monotonicity(PercoConfig{2, 0.49, 0.0, 32}, grid, 300, 2);
  CHECK(rep.inclusion_checks == 900);
  for (std::size_t j = 1; j < grid.size(); ++j) CHECK(rep.reach[j].successes >= rep.reach[j - 1].successes);
  const std::vector<double> unsorted{0.2, 0.1};
  CHECK_THROWS_AS(enhancement_monotonicity(PercoConfig{}, unsorted, 10, 1), std::invalid_argument);
}

TEST_CASE("b = 0 has the law of plain Bernoulli percolation") {
  // Special edges are only distinguished through b, so the reach estimates of
  // two independent seed ranges must agree in law.
  const auto a = boundary_reach_probability(PercoConfig{2, 0.5, 0.0, 16}, 2000, 0);
  const auto b = boundary_reach_probability(PercoConfig{2, 0.5, 0.0, 16}, 2000, 100000);
  CHECK(within_sigma(a.estimate, a.standard_error(), b.estimate, b.standard_error()));
}

TEST_CASE("critical window bands") {
  const auto crit = boundary_reach_probability(PercoConfig{2, 0.5, 0.0, 64}, 300, 5);
  CHECK(crit.estimate > 0.1);
  CHECK(crit.estimate < 0.9);
}

TEST_CASE("threshold table and schedule arithmetic") {
  CHECK(pc_bond(2) == 0.5);
  CHECK(pc_bond(3) == doctest::Approx(0.2488126));
  CHECK_THROWS_AS(pc_bond(7), std::invalid_argument);
  CHECK(schedule_b0(0.5, 0.02) == doctest::Approx(0.01));
  CHECK(schedule_b0(0.5, 0.9) == doctest::Approx(0.25));
  CHECK(zeta_bound(2, pc_bond(2)) == doctest::Approx(0.03125));
}

TEST_CASE("certificates") {
  ScheduleInputs in;
  in.d = 2;
  in.pc = 0.5;
  in.r = 0.02;
  in.p = 0.47;
  in.q = 1.0;
  in.zeta_estimate = 0.3;
  in.a0_proxy = 0.44;
  const auto ok = survival_certificate(in);
  CHECK(ok.b0 == doctest::Approx(0.01));
  CHECK(ok.feasible);
  CHECK(ok.pass);
  CHECK(ok.label == "numerical evidence");
  CHECK(recheck_certificate(ok));
  for (const auto& l : ok.lines) CHECK(l.holds == evaluate_relation(l.lhs, l.relation, l.rhs));

  // b = P(zeta_ = 1)(1 - p) = 0.005 < b0 = 0.01.
  in.p = 0.5;
  in.zeta_estimate = 0.01;
  const auto bad = survival_certificate(in);
  CHECK_FALSE(bad.pass);
  const auto it = std::find_if(bad.lines.begin(), bad.lines.end(), [](const auto& l) { return !l.holds; });
  REQUIRE(it != bad.lines.end());
  bool b_line_fails = false;
  for (const auto& l : bad.lines)
    if (l.name.find("b0") != std::string::npos && l.name.find(">=") != std::string::npos) b_line_fails = !l.holds;
  CHECK(b_line_fails);
  CHECK(recheck_certificate(bad));

  // Infeasible when the a0 proxy is not below pc.
  in.a0_proxy = 0.5;
  CHECK_FALSE(survival_certificate(in).feasible);

  // Tampering with a verdict is caught.
  auto forged = ok;
  forged.lines[0].holds = false;
  CHECK_FALSE(recheck_certificate(forged));
}

TEST_CASE("a0 scan stops at the first crossing") {
  const std::vector<double> grid{0.3, 0.45, 0.6, 0.7};
  const auto scan = a0_proxy_scan(2, 0.01, 32, grid, 0.5, 200, 3);
  CHECK(scan.a0 == 0.6);
  CHECK(scan.reach.size() == 3);
}
