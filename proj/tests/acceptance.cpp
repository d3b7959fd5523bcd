// Acceptance run: one line per criterion, exit status 1 if any fails.
// Usage: acceptance [CLI_BINARY GOLDEN_DIR]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dynperc/coupling.hpp"
#include "dynperc/cpde.hpp"
#include "dynperc/environment.hpp"
#include "dynperc/exploration.hpp"
#include "dynperc/fields.hpp"
#include "dynperc/parallel.hpp"
#include "dynperc/perco.hpp"
#include "dynperc/second_chance.hpp"

using namespace dynperc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// Criterion 1: xi marginal over the 27-cell grid, 10^6 keys per cell.
Outcome xi_marginal(double limit_per_cell) {
  int failed = 0;
  double worst_z = 0, slowest = 0;
  std::uint64_t cell = 0;
  for (double lambda : {1.0, 10.0, 100.0})
    for (double v : {0.1, 1.0, 10.0})
      for (double p : {0.2, 0.5, 0.8}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto est = estimate_xi_marginal(ModelParams{p, v, lambda}, 1000000, 1000 + cell++);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const double target = b_lambda(p, v, lambda);
        const double z = std::abs(est.estimate - target) / std::sqrt(target * (1 - target) / 1e6);
        worst_z = std::max(worst_z, z);
        failed += z > 3.0;
      }
  return {failed == 0 && slowest < limit_per_cell,
          "27 cells, worst |z| = " + fmt(worst_z) + ", failing cells " + std::to_string(failed) +
              ", slowest cell " + fmt(slowest, 2) + " s"};
}

// Criterion 2: stationarity and transition from state 1.
Outcome environment() {
  const double p = 0.5, v = 1.0;
  const std::vector<double> times{0.1, 1.0, 10.0};
  const auto rows = stationarity_check(ModelParams{p, v, 1.0}, times, 100000, 2);
  bool ok = true;
  double worst = 0;
  for (const auto& r : rows) {
    const double z1 = std::abs(r.empirical_p - p) / std::sqrt(p * (1 - p) / 1e5);
    const double target = transition_probability(p, v, r.t, true);
    const double z2 = std::abs(r.empirical_transition - target) /
                      std::sqrt(target * (1 - target) / static_cast<double>(r.started_open));
    worst = std::max({worst, z1, z2});
    ok = ok && z1 <= 3 && z2 <= 3;
  }
  return {ok, "t in {0.1, 1, 10}, 10^5 edges, worst |z| = " + fmt(worst)};
}

// Criterion 3: two-site extinction against the phase-type oracle.
Outcome extinction() {
  const double eps = 0.02;
  bool ok = true;
  std::string detail;
  for (double lambda : {3.0, 9.0, 50.0}) {
    const std::int64_t n = 100000;
    auto xs = sample_extinction_times(lambda, n, 3);
    std::sort(xs.begin(), xs.end());
    const PhaseTypeOracle oracle(lambda);
    double sup = 0, below_tail = 0, below_stated = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      // Empirical survival just before and at the i-th order statistic.
      const double before = 1.0 - static_cast<double>(i) / n;
      const double at = 1.0 - static_cast<double>(i + 1) / n;
      const double s = oracle.survival(xs[i]);
      sup = std::max({sup, std::abs(before - s), std::abs(at - s)});
      below_tail = std::max(below_tail, extinction_tail_oracle(lambda, xs[i]) - at);
      below_stated = std::max(below_stated, stated_extinction_tail(lambda, xs[i]) - at);
    }
    // The exact oracle itself dominates the tail on a fine grid.
    bool exact_dominates = true;
    for (double t = 0; t < 20 * (lambda + 1); t += 0.01 * (lambda + 1))
      exact_dominates = exact_dominates && oracle.survival(t) >= extinction_tail_oracle(lambda, t) - 1e-15;
    const bool cell = sup < eps && below_tail <= eps && exact_dominates;
    ok = ok && cell;
    detail += "lambda " + fmt(lambda) + ": sup " + fmt(sup, 3) + ", max deficit vs exp(-2t/(l+1)) " +
              fmt(std::max(below_tail, 0.0), 3) + ", vs stated exp(-t/(2(l+1))) " + fmt(below_stated, 3) + "; ";
  }
  return {ok, detail};
}

// Criterion 4: v-uniformity of P(zeta_ = 1) >= r.
Outcome zeta_uniformity() {
  const double r = 0.02, p = 0.45;
  bool ok = r < zeta_bound(2, p);
  std::string detail = "bound " + fmt(zeta_bound(2, p), 5) + "; ";
  std::uint64_t cell = 0;
  for (double v : {0.01, 1.0, 100.0}) {
    double witness = -1, best_low = 0;
    for (double lambda : {10.0, 100.0, 1000.0, 10000.0}) {
      const auto est = estimate_zeta_bar(2, ModelParams{p, v, lambda}, 100000, 4000000 * ++cell);
      best_low = std::max(best_low, est.ci.low);
      if (witness < 0 && est.estimate >= r && est.ci.low > r) witness = lambda;
    }
    ok = ok && witness > 0;
    detail += "v " + fmt(v) + ": " + (witness > 0 ? "lambda " + fmt(witness) : "none") + " (best ci_low " +
              fmt(best_low, 3) + "); ";
  }
  return {ok, detail};
}

// Criterion 5: P1-P6 on 10^3 runs of each exploration, plus negative controls.
Outcome structure() {
  struct Row {
    bool props = false, dup = false, parent = false, coherent = false;
  };
  std::string detail;
  bool ok = true;
  for (auto alg : {Algorithm::First, Algorithm::Second}) {
    const ModelParams mp = alg == Algorithm::First ? ModelParams{0.6, 1.0, 100.0} : ModelParams{0.47, 0.1, 1000.0};
    const auto rows = map_replicas<Row>(1000, [&](std::int64_t i) {
      const VariableFamilies fam(50000 + static_cast<std::uint64_t>(i), mp);
      ExploreOptions o;
      o.budget = 10000;
      const auto st = alg == Algorithm::First ? explore_first(fam, o) : explore_second(fam, o);
      Row r;
      r.props = check_properties(st).all();
      r.coherent = check_time_coherence(st, fam);
      r.dup = !st.examined.empty() && !check_properties(inject_duplicate_edge(st)).p2;
      r.parent = !check_properties(inject_second_parent(st)).p5;
      return r;
    });
    std::int64_t props = 0, dup = 0, parent = 0, coherent = 0;
    for (const auto& r : rows) {
      props += r.props;
      dup += r.dup;
      parent += r.parent;
      coherent += r.coherent;
    }
    ok = ok && props == 1000 && dup == 1000 && parent == 1000 && coherent == 1000;
    detail += std::string(alg == Algorithm::First ? "first" : "second") + ": P1-P6 " + std::to_string(props) +
              "/1000, controls caught " + std::to_string(dup) + "+" + std::to_string(parent) + "/2000; ";
  }
  return {ok, detail};
}

// Criterion 6: pathwise domination and the in-law check.
Outcome domination() {
  const ModelParams mp{0.6, 1.0, 5.0};
  const Window w(2, 10);
  const Site o = Site::origin(2);
  const auto held = count_replicas(100, [&](std::int64_t i) {
    const auto s = static_cast<std::uint64_t>(i);
    const auto st = explore_first_graphical(VariableFamilies(s, mp), w, static_cast<std::int64_t>(w.size()));
    return check_domination(st, simulate(mp, w, 30.0, s, std::span(&o, 1)));
  });
  const std::vector<double> times{1, 2, 5, 10};
  bool law = true;
  double worst = -1e9;
  for (const auto& row : compare_alive_in_law(mp, w, times, 1000, 60000)) {
    const double se = std::hypot(row.dominated.standard_error(), row.cpde.standard_error());
    const double gap = (row.dominated.estimate - row.cpde.estimate) / std::max(se, 1e-12);
    worst = std::max(worst, gap);
    law = law && row.dominated.estimate <= row.cpde.estimate + 3 * se;
  }
  return {held == 100 && law, "pathwise violations " + std::to_string(100 - held) +
                                  "/100; in law worst (dominated - cpde)/sigma = " + fmt(worst)};
}

// Criterion 7: coupling inclusions on every pass.
Outcome couplings() {
  std::string detail;
  bool ok = true;
  for (auto alg : {Algorithm::First, Algorithm::Second}) {
    const ModelParams mp = alg == Algorithm::First ? ModelParams{0.6, 1.0, 100.0} : ModelParams{0.47, 0.1, 1000.0};
    CoupleOptions o;
    o.budget = 10000;
    std::int64_t violations = 0, checks = 0, thrown = 0;
    const auto res = map_replicas<std::array<std::int64_t, 3>>(1000, [&](std::int64_t i) {
      const VariableFamilies fam(70000 + static_cast<std::uint64_t>(i), mp);
      try {
        const auto st = alg == Algorithm::First ? explore_coupled_first(fam, LowerBackend::thinned(0.9), o)
                                                : explore_coupled_second(fam, LowerBackend::thinned(0.9), o);
        return std::array<std::int64_t, 3>{st.violations + (check_inclusion(st) ? 0 : 1), st.invariant_checks, 0};
      } catch (const InvariantViolation&) {
        return std::array<std::int64_t, 3>{1, 0, 1};
      }
    });
    for (const auto& r : res) {
      violations += r[0];
      checks += r[1];
      thrown += r[2];
    }
    ok = ok && violations == 0;
    detail += std::string(alg == Algorithm::First ? "first" : "second") + ": " + std::to_string(violations) +
              " violations over " + std::to_string(checks) + " checks; ";
  }
  return {ok, detail};
}

// Criterion 8: standalone lower cluster law.
Outcome cluster_law() {
  const auto a = lower_cluster_law_check(2, 0.5, 0.5, 20, 2000, 8);
  const auto b = lower_cluster_law_check(2, 0.8, 0.75, 20, 2000, 8);
  return {a.ks.p_value >= 0.01 && b.ks.p_value >= 0.01,
          "pq 0.25: KS p " + fmt(a.ks.p_value, 3) + "; pq 0.6: KS p " + fmt(b.ks.p_value, 3)};
}

// Criterion 9: criticality proxy and enhancement.
Outcome criticality() {
  const auto sub = boundary_reach_probability(PercoConfig{2, 0.45, 0.0, 64}, 1000, 9);
  const auto sup = boundary_reach_probability(PercoConfig{2, 0.55, 0.0, 64}, 1000, 9);
  const std::vector<double> grid{0.0, 0.1, 0.2, 0.3};
  bool inclusion = true;
  EnhancementReport rep;
  try {
    rep = enhancement_monotonicity(PercoConfig{2, 0.49, 0.0, 64}, grid, 1000, 9);
  } catch (const InvariantError&) {
    inclusion = false;
  }
  std::string reach;
  for (const auto& r : rep.reach) reach += fmt(r.estimate, 3) + " ";
  return {sub.estimate < 0.1 && sup.estimate > 0.5 && inclusion && rep.strictly_increasing,
          "a 0.45: " + fmt(sub.estimate, 3) + ", a 0.55: " + fmt(sup.estimate, 3) + ", a 0.49 over b: " + reach +
              (inclusion ? "(inclusion on all replicas)" : "(inclusion failed)")};
}

// Criterion 10: survival evidence below pc.
Outcome headline() {
  const ModelParams mp{0.47, 0.1, 1000.0};
  const auto hits = count_replicas(200, [&](std::int64_t i) {
    ExploreOptions o;
    o.budget = 10000;
    return explore_second(VariableFamilies(static_cast<std::uint64_t>(i), mp), o).status == Status::BudgetReached;
  });
  const auto est = BinomialEstimate::from_counts(hits, 200);
  return {est.ci.low > 0.0, "numerical evidence, not proof: " + std::to_string(hits) +
                                "/200 reach the budget, Wilson CI [" + fmt(est.ci.low, 3) + ", " +
                                fmt(est.ci.high, 3) + "]"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Criterion 11: every golden CLI case reruns byte-identically.
Outcome determinism(const std::string& cli, const std::filesystem::path& golden) {
  if (cli.empty()) return {false, "no CLI binary given"};
  std::ifstream cases(golden / "cases.txt");
  if (!cases) return {false, "missing " + (golden / "cases.txt").string()};
  const auto tmp = std::filesystem::temp_directory_path() / "dynperc-acceptance";
  std::filesystem::create_directories(tmp);
  int total = 0, same = 0;
  std::string bad;
  for (std::string line; std::getline(cases, line);) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string name = line.substr(0, tab);
    std::string args = line.substr(tab + 1);
    for (auto at = args.find("@GOLDEN@"); at != std::string::npos; at = args.find("@GOLDEN@"))
      args.replace(at, 8, golden.string());
    ++total;
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const auto out = tmp / (name + "." + std::to_string(k));
      const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + out.string() + "\"";
      if (std::system(cmd.c_str()) != 0) outputs[k] = "<failed>";
      else outputs[k] = slurp(out);
    }
    const bool ok = outputs[0] == outputs[1] && outputs[0] == slurp(golden / name);
    same += ok;
    if (!ok) bad += name + " ";
  }
  return {total > 0 && same == total,
          std::to_string(same) + "/" + std::to_string(total) + " CLI cases byte-identical to golden" +
              (bad.empty() ? "" : " (differs: " + bad + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::filesystem::path golden = argc > 2 ? argv[2] : "tests/golden";

  struct Criterion {
    int id;
    std::string name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "xi marginal", 27 * 60.0, [] { return xi_marginal(60.0); }},
      {2, "environment", 60.0, environment},
      {3, "two-site extinction", 120.0, extinction},
      {4, "zeta v-uniformity", 600.0, zeta_uniformity},
      {5, "structural properties", 300.0, structure},
      {6, "domination", 600.0, domination},
      {7, "coupling inclusions", 600.0, couplings},
      {8, "lower cluster law", 300.0, cluster_law},
      {9, "perco criticality", 600.0, criticality},
      {10, "survival below pc", 900.0, headline},
      {11, "determinism", 600.0, [&] { return determinism(cli, golden); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit_s;
    failed += !pass;
    std::printf("criterion %2d %-22s %s  [%.1f s, limit %.0f s] %s\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                secs, c.limit_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
