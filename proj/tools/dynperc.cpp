// Command-line front end for the experiments. Every subcommand is
// deterministic given its flags: no wall-clock data or system entropy ever
// reaches an output file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynperc/coupling.hpp"
#include "dynperc/cpde.hpp"
#include "dynperc/environment.hpp"
#include "dynperc/exploration.hpp"
#include "dynperc/fields.hpp"
#include "dynperc/parallel.hpp"
#include "dynperc/perco.hpp"
#include "dynperc/records.hpp"
#include "dynperc/second_chance.hpp"

namespace {

using nlohmann::json;
using namespace dynperc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- output --

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json interval_json(const BinomialEstimate& b) {
  return json{{"estimate", b.estimate}, {"ci_low", b.ci.low}, {"ci_high", b.ci.high}, {"successes", b.successes},
              {"n", b.n}};
}

json site_json(const Site& x) {
  json a = json::array();
  for (int i = 0; i < x.dimension(); ++i) a.push_back(x[i]);
  return a;
}

json size_histogram(const std::vector<std::int64_t>& sizes) {
  std::map<int, std::int64_t> bins;
  for (auto s : sizes) {
    int k = 0;
    while ((std::int64_t{2} << k) <= s) ++k;
    bins[k] += 1;
  }
  json out = json::array();
  for (const auto& [k, c] : bins)
    out.push_back({{"min", std::int64_t{1} << k}, {"max", (std::int64_t{2} << k) - 1}, {"count", c}});
  return out;
}

// ---------------------------------------------------------------- config --

struct ConfigEntry {
  std::string key;
  std::vector<std::string> values;
  int line = 0;
};

std::vector<ConfigEntry> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::vector<ConfigEntry> out;
  std::string raw;
  int line = 0;
  while (std::getline(f, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const auto eq = raw.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(raw).empty()) continue;
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line) + ": expected 'key = value'");
    ConfigEntry e{trim(raw.substr(0, eq)), {}, line};
    if (e.key.empty()) throw ConfigError(path + ":" + std::to_string(line) + ": empty key");
    std::istringstream vs(raw.substr(eq + 1));
    for (std::string v; vs >> v;) e.values.push_back(v);
    if (e.values.empty()) throw ConfigError(path + ":" + std::to_string(line) + ": missing value for '" + e.key + "'");
    out.push_back(std::move(e));
  }
  return out;
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == name || a.rfind(name + "=", 0) == 0; });
}

// ----------------------------------------------------------- subcommands --

struct Common {
  std::uint64_t seed = 0;
  std::string out = "-";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed; replica i uses seed + i")->required();
  sub->add_option("--out", c.out, "Output file ('-' for stdout)");
  sub->add_option("--config", "Flat key = value file; flags given on the command line win");
}

ModelParams model(double p, double v, double lambda) {
  ModelParams mp{p, v, lambda};
  try {
    mp.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return mp;
}

struct XiCheck {
  Common c;
  std::vector<double> lambdas{1, 10, 100}, vs{0.1, 1, 10}, ps{0.2, 0.5, 0.8};
  std::int64_t n = 1000000;

  std::string run() const {
    json cells = json::array();
    bool all = true;
    std::uint64_t cell = 0;
    for (double lambda : lambdas)
      for (double v : vs)
        for (double p : ps) {
          const auto mp = model(p, v, lambda);
          const auto est = estimate_xi_marginal(mp, n, c.seed + cell++);
          const double target = b_lambda(p, v, lambda);
          const double se = std::sqrt(target * (1 - target) / static_cast<double>(n));
          const bool ok = std::abs(est.estimate - target) <= 3 * se;
          all = all && ok;
          cells.push_back({{"lambda", lambda}, {"v", v}, {"p", p}, {"estimate", est.estimate}, {"target", target},
                           {"stderr", se}, {"pass", ok}});
        }
    return json_text({{"cells", cells}, {"n", n}, {"seed", c.seed}, {"pass", all}});
  }
};

struct EnvCheck {
  Common c;
  double p = 0.5, v = 1.0;
  std::vector<double> times{0.1, 1, 10};
  std::int64_t edges = 100000;

  std::string run() const {
    const auto mp = model(p, v, 1.0);
    const auto rows = stationarity_check(mp, times, edges, c.seed);
    std::ostringstream os;
    os << "t,empirical_p,stderr,target_p,empirical_transition,transition_stderr,target_transition\n";
    for (const auto& r : rows)
      os << format_double(r.t) << ',' << format_double(r.empirical_p) << ',' << format_double(r.standard_error) << ','
         << format_double(p) << ',' << format_double(r.empirical_transition) << ','
         << format_double(r.transition_standard_error) << ',' << format_double(transition_probability(p, v, r.t, true))
         << '\n';
    return os.str();
  }
};

struct CpdeSurvival {
  Common c;
  int d = 2, L = 10;
  double p = 0.5, v = 1.0, lambda = 1.0, horizon = 10.0;
  std::int64_t replicas = 100;

  std::string run() const {
    const auto mp = model(p, v, lambda);
    const auto est = survival_estimate(mp, Window(d, L), horizon, replicas, c.seed);
    const json params{{"d", d}, {"p", p}, {"v", v}, {"lambda", lambda}, {"L", L}, {"horizon", horizon}};
    return json_text({{"estimate", est.estimate},
                      {"ci_low", est.ci.low},
                      {"ci_high", est.ci.high},
                      {"replicas", replicas},
                      {"record", EstimateRecord::from_binomial("cpde-survival", params, est, c.seed)}});
  }
};

json tree_json(const ExplorationState& st) {
  std::vector<Site> order(st.treated.begin(), st.treated.end());
  order.insert(order.end(), st.frontier.begin(), st.frontier.end());
  json vertices = json::array();
  for (const auto& x : order) {
    const auto& r = st.sites.at(x);
    json v{{"site", site_json(x)},
           {"t_I", r.t_infect},
           {"treated", r.treated_pass >= 0},
           {"parent", site_json(r.parent)},
           {"edge_type", x == st.origin ? "root" : to_string(r.via)}};
    v["t_R"] = std::isfinite(r.t_recover) ? json(r.t_recover) : json(nullptr);
    vertices.push_back(std::move(v));
  }
  return {{"vertices", vertices}, {"status", to_string(st.status)}, {"seed", st.seed}};
}

struct Explore {
  Common c;
  std::string alg = "first", rule = "fifo", emit_tree;
  int d = 2;
  double p = 0.5, v = 1.0, lambda = 1.0;
  std::int64_t budget = 10000, replicas = 1;

  std::string run() const {
    const auto mp = model(p, v, lambda);
    ExploreOptions opt;
    opt.dim = d;
    opt.budget = budget;
    opt.rule = rule == "lifo" ? TreatmentRule::Lifo : TreatmentRule::Fifo;
    auto explore_one = [&](std::uint64_t seed) {
      const VariableFamilies fam(seed, mp);
      return alg == "second" ? explore_second(fam, opt) : explore_first(fam, opt);
    };
    struct Summary {
      std::int64_t treated = 0, e0 = 0, e1 = 0, e2 = 0;
      bool reached = false;
      std::array<bool, 7> props{};
    };
    const auto runs = map_replicas<Summary>(replicas, [&](std::int64_t i) {
      const auto st = explore_one(c.seed + static_cast<std::uint64_t>(i));
      const auto rep = check_properties(st);
      Summary s;
      s.treated = static_cast<std::int64_t>(st.treated.size());
      s.e0 = static_cast<std::int64_t>(st.edges(EdgeKind::Closed).size());
      s.e1 = static_cast<std::int64_t>(st.edges(EdgeKind::FirstChance).size());
      s.e2 = static_cast<std::int64_t>(st.edges(EdgeKind::SecondChance).size());
      s.reached = st.status == Status::BudgetReached;
      s.props = {rep.p1, rep.p2, rep.p3, rep.p4, rep.p5, rep.p6, rep.tree};
      return s;
    });
    const auto first = explore_one(c.seed);
    if (!emit_tree.empty()) write_output(emit_tree, json_text(tree_json(first)));

    std::int64_t reached = 0;
    std::array<std::int64_t, 7> passes{};
    std::vector<double> sizes;
    std::int64_t e0 = 0, e1 = 0, e2 = 0;
    for (const auto& s : runs) {
      reached += s.reached;
      for (std::size_t k = 0; k < passes.size(); ++k) passes[k] += s.props[k];
      sizes.push_back(static_cast<double>(s.treated));
      e0 += s.e0;
      e1 += s.e1;
      e2 += s.e2;
    }
    const auto reach = BinomialEstimate::from_counts(reached, replicas);
    const auto mean = mean_estimate(sizes);
    const char* names[] = {"p1", "p2", "p3", "p4", "p5", "p6", "tree"};
    json props;
    bool all = true;
    for (std::size_t k = 0; k < passes.size(); ++k) {
      props[names[k]] = passes[k];
      all = all && passes[k] == replicas;
    }
    json controls{{"duplicate_edge_detected", !check_properties(inject_duplicate_edge(first)).p2},
                  {"second_parent_detected", !check_properties(inject_second_parent(first)).p5}};
    const json params{{"alg", alg}, {"d", d}, {"p", p}, {"v", v}, {"lambda", lambda}, {"budget", budget}};
    return json_text({{"alg", alg},
                      {"budget", budget},
                      {"replicas", replicas},
                      {"budget_reached", interval_json(reach)},
                      {"mean_treated", mean.mean},
                      {"mean_treated_stderr", mean.standard_error},
                      {"edges", {{"E0", e0}, {"E1", e1}, {"E2", e2}}},
                      {"first_run", {{"status", to_string(first.status)}, {"treated", first.treated.size()}}},
                      {"properties_passed", props},
                      {"properties_all_pass", all},
                      {"negative_controls", controls},
                      {"record", EstimateRecord::from_binomial("explore-budget-reached", params, reach, c.seed)}});
  }
};

struct Domination {
  Common c;
  double p = 0.6, v = 1.0, lambda = 5.0, horizon = 30.0;
  int L = 10;
  std::int64_t replicas = 100, law_replicas = 1000;
  std::vector<double> times{1, 2, 5, 10};

  std::string run() const {
    const auto mp = model(p, v, lambda);
    const Window w(2, L);
    const Site origin = Site::origin(2);
    const auto ok = count_replicas(replicas, [&](std::int64_t i) {
      const std::uint64_t s = c.seed + static_cast<std::uint64_t>(i);
      const auto st = explore_first_graphical(VariableFamilies(s, mp), w, static_cast<std::int64_t>(w.size()));
      return check_domination(st, simulate(mp, w, horizon, s, std::span(&origin, 1)));
    });
    // Negative control: a site that the CPDE never infects, placed in the dominated process.
    const auto st0 = explore_first_graphical(VariableFamilies(c.seed, mp), w, static_cast<std::int64_t>(w.size()));
    const auto run0 = simulate(mp, w, horizon, c.seed, std::span(&origin, 1));
    Site never = w.site_at(0);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Site x = w.site_at(i);
      if (std::none_of(run0.events.begin(), run0.events.end(), [&](const auto& e) { return e.site == x; })) {
        never = x;
        break;
      }
    }
    const bool control = !check_domination(inject_infection(st0, never, 0.5, 1.0), run0);

    json law = json::array();
    bool law_ok = true;
    for (const auto& row : compare_alive_in_law(mp, w, times, law_replicas, c.seed)) {
      const double se = std::hypot(row.dominated.standard_error(), row.cpde.standard_error());
      const bool pass = row.dominated.estimate <= row.cpde.estimate + 3 * se;
      law_ok = law_ok && pass;
      law.push_back({{"t", row.t},
                     {"dominated", row.dominated.estimate},
                     {"cpde", row.cpde.estimate},
                     {"sigma", se},
                     {"pass", pass}});
    }
    return json_text({{"pathwise",
                       {{"replicas", replicas}, {"violations", replicas - ok}, {"negative_control_detected", control}}},
                      {"law", law},
                      {"law_replicas", law_replicas},
                      {"pass", ok == replicas && control && law_ok}});
  }
};

struct Couple {
  Common c;
  std::string alg = "first", backend = "thinned";
  int d = 2;
  double p = 0.6, v = 1.0, lambda = 100.0, theta_xi = 0.9, theta_zeta = 1.0, q = 0.5;
  std::int64_t budget = 10000, replicas = 1;
  std::string forensic;
  bool force_strict = false;

  std::string run() const {
    const auto mp = model(p, v, lambda);
    const LowerBackend be =
        backend == "independent" ? LowerBackend::independent(q, theta_zeta) : LowerBackend::thinned(theta_xi, theta_zeta);
    CoupleOptions opt;
    opt.dim = d;
    opt.budget = budget;
    opt.strict = force_strict || be.kind == LowerBackend::Kind::Thinned;
    struct Summary {
      std::int64_t upper = 0, lower = 0, violations = 0, checks = 0;
    };
    std::vector<Summary> runs;
    try {
      runs = map_replicas<Summary>(replicas, [&](std::int64_t i) {
        const VariableFamilies fam(c.seed + static_cast<std::uint64_t>(i), mp);
        const auto st = alg == "second" ? explore_coupled_second(fam, be, opt) : explore_coupled_first(fam, be, opt);
        return Summary{static_cast<std::int64_t>(st.upper.treated.size()),
                       static_cast<std::int64_t>(st.lower.treated.size()), st.violations, st.invariant_checks};
      });
    } catch (const InvariantViolation& e) {
      const std::string path = forensic.empty() ? "forensic-" + std::to_string(c.seed) + ".txt" : forensic;
      write_output(path, std::string(e.what()) + "\n" + e.dump());
      throw InvariantError(std::string(e.what()) + " (forensic dump: " + path + ")");
    }
    std::vector<std::int64_t> up, lo;
    std::int64_t violations = 0, checks = 0;
    for (const auto& s : runs) {
      up.push_back(s.upper);
      lo.push_back(s.lower);
      violations += s.violations;
      checks += s.checks;
    }
    return json_text({{"alg", alg},
                      {"backend", backend},
                      {"replicas", replicas},
                      {"violations", violations},
                      {"invariant_checks", checks},
                      {"upper_size_hist", size_histogram(up)},
                      {"lower_size_hist", size_histogram(lo)}});
  }
};

struct ClusterLaw {
  Common c;
  int d = 2, L = 20;
  double p = 0.5, q = 0.5;
  std::int64_t replicas = 2000;

  std::string run() const {
    const auto rep = lower_cluster_law_check(d, p, q, L, replicas, c.seed);
    return json_text({{"pq", p * q},
                      {"ks_statistic", rep.ks.statistic},
                      {"p_value", rep.ks.p_value},
                      {"exploration_mean", rep.exploration_mean.mean},
                      {"direct_mean", rep.direct_mean.mean},
                      {"exploration_reach", rep.exploration_reach.estimate},
                      {"direct_reach", rep.direct_reach.estimate},
                      {"replicas", replicas},
                      {"pass", rep.pass}});
  }
};

struct ZetaEstimate {
  Common c;
  int d = 2;
  double p = 0.45, r = 0.02;
  std::vector<double> vs{1.0}, lambdas{1000.0};
  std::int64_t n = 100000;
  bool with_a = false;

  std::string run() const {
    json rows = json::array();
    std::map<double, bool> per_v;
    std::uint64_t cell = 0;
    for (double v : vs)
      for (double lambda : lambdas) {
        const auto mp = model(p, v, lambda);
        const auto est = estimate_zeta_bar(d, mp, n, c.seed + cell * static_cast<std::uint64_t>(n));
        const bool ok = est.ci.low > r;
        per_v[v] = per_v[v] || ok;
        json row{{"v", v}, {"lambda", lambda}, {"estimate", est.estimate}, {"ci", {est.ci.low, est.ci.high}},
                 {"b_lambda", b_lambda(p, v, lambda)}, {"pass", ok}};
        if (with_a) {
          const auto a = estimate_a_lambda(d, mp, n, c.seed + cell * static_cast<std::uint64_t>(n));
          row["a_lambda"] = a.estimate;
          row["a_times_b"] = a.estimate * b_lambda(p, v, lambda);
        }
        rows.push_back(std::move(row));
        ++cell;
      }
    bool all = true;
    for (const auto& [v, ok] : per_v) all = all && ok;
    json out{{"d", d}, {"p", p}, {"r", r}, {"n", n}, {"lemma1_bound", zeta_bound(d, p)}, {"rows", rows}, {"pass", all}};
    if (rows.size() == 1) {
      out["estimate"] = rows[0]["estimate"];
      out["ci"] = rows[0]["ci"];
    }
    return json_text(out);
  }
};

struct ExtinctionCheck {
  Common c;
  double lambda = 9.0;
  std::int64_t n = 100000;
  int points = 40;

  std::string run() const {
    if (!(lambda > 0)) throw ConfigError("--lambda must be > 0");
    auto samples = sample_extinction_times(lambda, n, c.seed);
    std::sort(samples.begin(), samples.end());
    const PhaseTypeOracle oracle(lambda);
    // Grid up to the time where the derived tail falls to 1e-3.
    const double t_max = std::log(1000.0) * (lambda + 1.0) / 2.0;
    std::ostringstream os;
    os << "t,empirical_survival,phase_type,exp_derived,exp_stated\n";
    for (int k = 0; k <= points; ++k) {
      const double t = t_max * k / points;
      const auto above = samples.end() - std::upper_bound(samples.begin(), samples.end(), t);
      const double emp = static_cast<double>(above) / static_cast<double>(n);
      os << format_double(t) << ',' << format_double(emp) << ',' << format_double(oracle.survival(t)) << ','
         << format_double(extinction_tail_oracle(lambda, t)) << ',' << format_double(stated_extinction_tail(lambda, t))
         << '\n';
    }
    return os.str();
  }
};

struct Perco {
  Common c;
  int d = 2, L = 64;
  std::vector<double> as{0.5}, bs{0.0};
  std::int64_t replicas = 1000;

  std::string run() const {
    json rows = json::array();
    bool increasing = true;
    for (double a : as) {
      PercoConfig cfg{d, a, 0.0, L};
      std::vector<double> sorted_b = bs;
      std::sort(sorted_b.begin(), sorted_b.end());
      for (double b : sorted_b) {
        PercoConfig check = cfg;
        check.b = b;
        try {
          check.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
      const auto rep = enhancement_monotonicity(cfg, sorted_b, replicas, c.seed);
      if (sorted_b.size() > 1) increasing = increasing && rep.strictly_increasing;
      for (std::size_t j = 0; j < sorted_b.size(); ++j)
        rows.push_back({{"a", a}, {"b", sorted_b[j]}, {"reach_estimate", rep.reach[j].estimate},
                        {"ci", {rep.reach[j].ci.low, rep.reach[j].ci.high}}});
    }
    json out{{"d", d}, {"L", L}, {"replicas", replicas}, {"rows", rows}};
    if (bs.size() > 1) {
      out["inclusion_violations"] = 0;  // any violation aborts with exit status 3
      out["strictly_increasing_in_b"] = increasing;
    }
    if (rows.size() == 1) {
      out["reach_estimate"] = rows[0]["reach_estimate"];
      out["ci"] = rows[0]["ci"];
      const json params{{"d", d}, {"a", as[0]}, {"b", bs[0]}, {"L", L}};
      const auto est = boundary_reach_probability(PercoConfig{d, as[0], bs[0], L}, replicas, c.seed);
      out["record"] = EstimateRecord::from_binomial("perco-reach", params, est, c.seed);
    }
    return json_text(out);
  }
};

struct Certify {
  Common c;
  int d = 2, L = 128;
  double p = 0.47, v = 1.0, lambda = 1000.0, q = 1.0, r = 0.02, threshold = 0.5;
  std::int64_t n = 100000, replicas = 200;
  std::vector<double> a_grid;

  std::string run() const {
    const auto mp = model(p, v, lambda);
    const double pc = pc_bond(d);
    const double b0 = schedule_b0(pc, r);
    const auto zeta = estimate_zeta_bar(d, mp, n, c.seed);
    std::vector<double> grid = a_grid;
    if (grid.empty())
      for (int k = 40; k <= 60; ++k) grid.push_back(k / 100.0);
    std::sort(grid.begin(), grid.end());
    const auto scan = a0_proxy_scan(d, b0, L, grid, threshold, replicas, c.seed);
    ScheduleInputs in{d, pc, r, p, q, v, lambda, zeta.estimate, scan.a0};
    const auto cert = survival_certificate(in);
    json lines = json::array();
    for (const auto& l : cert.lines)
      lines.push_back({{"name", l.name}, {"lhs", l.lhs}, {"relation", l.relation}, {"rhs", l.rhs}, {"holds", l.holds}});
    json scan_rows = json::array();
    for (std::size_t k = 0; k < scan.reach.size(); ++k)
      scan_rows.push_back({{"a", scan.a_values[k]}, {"reach", scan.reach[k].estimate}});
    return json_text({{"label", cert.label},
                      {"pc", pc},
                      {"pc_source", d == 2 ? "exact" : "tabulated numerical estimate"},
                      {"b0", cert.b0},
                      {"a", cert.a},
                      {"b", cert.b},
                      {"zeta_estimate", zeta.estimate},
                      {"zeta_ci", {zeta.ci.low, zeta.ci.high}},
                      {"a0_proxy", scan.a0},
                      {"a0_threshold", threshold},
                      {"a0_scan", scan_rows},
                      {"feasible", cert.feasible},
                      {"lines", lines},
                      {"pass", cert.pass}});
  }
};

struct Merge {
  std::vector<std::string> inputs;
  std::string out = "-";

  std::string run() const {
    std::vector<EstimateRecord> records;
    for (const auto& path : inputs) {
      std::ifstream f(path);
      if (!f) throw ConfigError("cannot read '" + path + "'");
      json j;
      try {
        f >> j;
      } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
      }
      const json& rec = j.contains("record") ? j.at("record") : j;
      try {
        records.push_back(rec.get<EstimateRecord>());
      } catch (const json::exception& e) {
        throw ConfigError(path + ": not an estimate record: " + e.what());
      }
    }
    try {
      return json_text({{"record", merge(records)}});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact process on dynamical percolation: simulations, explorations and couplings"};
  app.require_subcommand(1);

  const auto prob = CLI::Range(0.0, 1.0);
  const auto positive = CLI::PositiveNumber;

  XiCheck xi_check;
  auto* s_xi = app.add_subcommand("xi-check", "Marginal law of the first-chance field");
  add_common(s_xi, xi_check.c);
  s_xi->add_option("--lambda", xi_check.lambdas)->check(positive);
  s_xi->add_option("--v", xi_check.vs)->check(positive);
  s_xi->add_option("--p", xi_check.ps)->check(prob);
  s_xi->add_option("--n", xi_check.n)->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 40));

  EnvCheck env;
  auto* s_env = app.add_subcommand("env-check", "Stationarity and transitions of the edge environment (CSV)");
  add_common(s_env, env.c);
  s_env->add_option("--p", env.p)->check(prob);
  s_env->add_option("--v", env.v)->check(positive);
  s_env->add_option("--times", env.times)->check(CLI::NonNegativeNumber);
  s_env->add_option("--edges", env.edges)->check(CLI::PositiveNumber);

  CpdeSurvival cpde;
  auto* s_cpde = app.add_subcommand("cpde-survival", "Survival of the CPDE in a window up to a horizon");
  add_common(s_cpde, cpde.c);
  s_cpde->add_option("--d", cpde.d)->check(CLI::Range(1, kMaxDim));
  s_cpde->add_option("--p", cpde.p)->check(prob);
  s_cpde->add_option("--v", cpde.v)->check(positive);
  s_cpde->add_option("--lambda", cpde.lambda)->check(positive);
  s_cpde->add_option("--L", cpde.L)->check(CLI::PositiveNumber);
  s_cpde->add_option("--horizon", cpde.horizon)->check(positive);
  s_cpde->add_option("--replicas", cpde.replicas)->check(CLI::PositiveNumber);

  Explore ex;
  auto* s_ex = app.add_subcommand("explore", "First- or second-chance exploration of the dominated process");
  add_common(s_ex, ex.c);
  s_ex->add_option("--alg", ex.alg)->check(CLI::IsMember({"first", "second"}));
  s_ex->add_option("--rule", ex.rule)->check(CLI::IsMember({"fifo", "lifo"}));
  s_ex->add_option("--d", ex.d)->check(CLI::Range(2, kMaxDim));
  s_ex->add_option("--p", ex.p)->check(prob);
  s_ex->add_option("--v", ex.v)->check(positive);
  s_ex->add_option("--lambda", ex.lambda)->check(positive);
  s_ex->add_option("--budget", ex.budget)->check(CLI::PositiveNumber);
  s_ex->add_option("--replicas", ex.replicas)->check(CLI::PositiveNumber);
  s_ex->add_option("--emit-tree", ex.emit_tree, "Write the infection tree of the first replica as JSON");

  Domination dom;
  auto* s_dom = app.add_subcommand("domination-check", "Dominated process below the CPDE, pathwise and in law");
  add_common(s_dom, dom.c);
  s_dom->add_option("--p", dom.p)->check(prob);
  s_dom->add_option("--v", dom.v)->check(positive);
  s_dom->add_option("--lambda", dom.lambda)->check(positive);
  s_dom->add_option("--L", dom.L)->check(CLI::PositiveNumber);
  s_dom->add_option("--horizon", dom.horizon)->check(positive);
  s_dom->add_option("--replicas", dom.replicas)->check(CLI::PositiveNumber);
  s_dom->add_option("--law-replicas", dom.law_replicas)->check(CLI::PositiveNumber);
  s_dom->add_option("--times", dom.times)->check(CLI::NonNegativeNumber);

  Couple cp;
  auto* s_cp = app.add_subcommand("couple", "Coupled exploration of the infection cluster and a percolation cluster");
  add_common(s_cp, cp.c);
  s_cp->add_option("--alg", cp.alg)->check(CLI::IsMember({"first", "second"}));
  s_cp->add_option("--backend", cp.backend)->check(CLI::IsMember({"thinned", "independent"}));
  s_cp->add_option("--d", cp.d)->check(CLI::Range(2, kMaxDim));
  s_cp->add_option("--p", cp.p)->check(prob);
  s_cp->add_option("--v", cp.v)->check(positive);
  s_cp->add_option("--lambda", cp.lambda)->check(positive);
  s_cp->add_option("--theta-xi", cp.theta_xi)->check(prob);
  s_cp->add_option("--theta-zeta", cp.theta_zeta)->check(prob);
  s_cp->add_option("--q", cp.q)->check(prob);
  s_cp->add_option("--budget", cp.budget)->check(CLI::PositiveNumber);
  s_cp->add_option("--replicas", cp.replicas)->check(CLI::PositiveNumber);
  s_cp->add_option("--forensic", cp.forensic, "Where to write the dump on an invariant violation");
  s_cp->add_flag("--strict", cp.force_strict, "Abort on the first inclusion failure even for the independent backend");

  ClusterLaw law;
  auto* s_law = app.add_subcommand("cluster-law", "Lower exploration against a direct bond percolation sampler");
  add_common(s_law, law.c);
  s_law->add_option("--d", law.d)->check(CLI::Range(2, kMaxDim));
  s_law->add_option("--p", law.p)->check(prob);
  s_law->add_option("--q", law.q)->check(prob);
  s_law->add_option("--L", law.L)->check(CLI::PositiveNumber);
  s_law->add_option("--replicas", law.replicas)->check(CLI::PositiveNumber);

  ZetaEstimate zeta;
  auto* s_zeta = app.add_subcommand("zeta-estimate", "Monte Carlo of P(zeta_ = 1) on a special edge");
  add_common(s_zeta, zeta.c);
  s_zeta->add_option("--d", zeta.d)->check(CLI::Range(2, kMaxDim));
  s_zeta->add_option("--p", zeta.p)->check(CLI::Range(0.0, 1.0));
  s_zeta->add_option("--v", zeta.vs)->check(positive);
  s_zeta->add_option("--lambda", zeta.lambdas)->check(positive);
  s_zeta->add_option("--n", zeta.n)->check(CLI::PositiveNumber);
  s_zeta->add_option("--r", zeta.r)->check(prob);
  s_zeta->add_flag("--with-a", zeta.with_a, "Also estimate the A_lambda factor");

  ExtinctionCheck ext;
  auto* s_ext = app.add_subcommand("extinction-check", "Extinction time of the two-site process (CSV)");
  add_common(s_ext, ext.c);
  s_ext->add_option("--lambda", ext.lambda)->check(positive);
  s_ext->add_option("--n", ext.n)->check(CLI::PositiveNumber);
  s_ext->add_option("--points", ext.points)->check(CLI::PositiveNumber);

  Perco pc;
  auto* s_pc = app.add_subcommand("perco", "Boundary reach in Perco(d, a, b); several b values are coupled");
  add_common(s_pc, pc.c);
  s_pc->add_option("--d", pc.d)->check(CLI::Range(2, kMaxDim));
  s_pc->add_option("--a", pc.as)->check(prob);
  s_pc->add_option("--b", pc.bs)->check(prob);
  s_pc->add_option("--L", pc.L)->check(CLI::PositiveNumber);
  s_pc->add_option("--replicas", pc.replicas)->check(CLI::PositiveNumber);

  Certify cert;
  auto* s_cert = app.add_subcommand("certify", "Evaluate the parameter schedule with numerical witnesses");
  add_common(s_cert, cert.c);
  s_cert->add_option("--d", cert.d)->check(CLI::Range(2, kMaxDim));
  s_cert->add_option("--p", cert.p)->check(prob);
  s_cert->add_option("--v", cert.v)->check(positive);
  s_cert->add_option("--lambda", cert.lambda)->check(positive);
  s_cert->add_option("--q", cert.q)->check(prob);
  s_cert->add_option("--r", cert.r)->check(prob);
  s_cert->add_option("--n", cert.n)->check(CLI::PositiveNumber);
  s_cert->add_option("--L", cert.L)->check(CLI::PositiveNumber);
  s_cert->add_option("--replicas", cert.replicas)->check(CLI::PositiveNumber);
  s_cert->add_option("--threshold", cert.threshold)->check(prob);
  s_cert->add_option("--a-grid", cert.a_grid)->check(prob);

  Merge mg;
  auto* s_mg = app.add_subcommand("merge", "Pool estimate records of one experiment");
  s_mg->add_option("inputs", mg.inputs, "JSON outputs holding a record")->required();
  s_mg->add_option("--out", mg.out, "Output file ('-' for stdout)");

  std::vector<std::string> args(argv + 1, argv + argc);
  // Config file entries become flags appended after the command line, skipping
  // any flag the user already gave.
  std::map<std::string, int> config_lines;
  std::string config_path;
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty()) {
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands({})) if (s->get_name() == args[0]) sub = s;
      if (sub == nullptr) throw ConfigError("--config needs a subcommand first");
      std::vector<std::string> extra;
      for (const auto& e : read_config(config_path)) {
        const std::string flag = "--" + e.key;
        if (e.key == "config" || sub->get_option_no_throw(flag) == nullptr)
          throw ConfigError(config_path + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "' for " +
                            args[0]);
        if (flag_given(args, flag)) continue;
        config_lines[flag] = e.line;
        const auto* opt = sub->get_option(flag);
        if (opt->get_expected_min() == 0) {
          if (e.values.size() != 1 || (e.values[0] != "true" && e.values[0] != "false"))
            throw ConfigError(config_path + ":" + std::to_string(e.line) + ": '" + e.key + "' expects true or false");
          if (e.values[0] == "true") extra.push_back(flag);
          continue;
        }
        extra.push_back(flag);
        extra.insert(extra.end(), e.values.begin(), e.values.end());
      }
      args.insert(args.end(), extra.begin(), extra.end());
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string where;
    const std::string msg = e.what();
    for (const auto& [flag, line] : config_lines)
      if (msg.find(flag) != std::string::npos) where = config_path + ":" + std::to_string(line) + ": ";
    std::cerr << "config error: " << where << msg << "\n";
    return kExitConfig;
  }

  try {
    std::string text, out;
    if (s_xi->parsed()) std::tie(text, out) = std::pair{xi_check.run(), xi_check.c.out};
    else if (s_env->parsed()) std::tie(text, out) = std::pair{env.run(), env.c.out};
    else if (s_cpde->parsed()) std::tie(text, out) = std::pair{cpde.run(), cpde.c.out};
    else if (s_ex->parsed()) std::tie(text, out) = std::pair{ex.run(), ex.c.out};
    else if (s_dom->parsed()) std::tie(text, out) = std::pair{dom.run(), dom.c.out};
    else if (s_cp->parsed()) std::tie(text, out) = std::pair{cp.run(), cp.c.out};
    else if (s_law->parsed()) std::tie(text, out) = std::pair{law.run(), law.c.out};
    else if (s_zeta->parsed()) std::tie(text, out) = std::pair{zeta.run(), zeta.c.out};
    else if (s_ext->parsed()) std::tie(text, out) = std::pair{ext.run(), ext.c.out};
    else if (s_pc->parsed()) std::tie(text, out) = std::pair{pc.run(), pc.c.out};
    else if (s_cert->parsed()) std::tie(text, out) = std::pair{cert.run(), cert.c.out};
    else if (s_mg->parsed()) std::tie(text, out) = std::pair{mg.run(), mg.out};
    write_output(out, text);
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
