#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dynperc/errors.hpp"
#include "dynperc/lattice.hpp"
#include "dynperc/stats.hpp"

namespace dynperc {

/// Perco(d, a, b): independent bond percolation where normal edges open with
/// probability a and special edges with a + b, observed in the window of
/// half-width L with free boundary.
struct PercoConfig {
  int d = 2;
  double a = 0.5;
  double b = 0.0;
  int L = 64;

  /// Throws std::invalid_argument unless a, b >= 0, a + b <= 1, d >= 2, L >= 1.
  void validate() const;
  Window window() const { return Window(d, L); }
};

/// Keyed per-edge uniform in (0,1]. An edge is open iff U <= a, or U <= a + b
/// when special, so configurations sharing a seed are nested in a and b.
double perco_uniform(std::uint64_t seed, const UnorientedEdge& e);
bool perco_edge_open(const PercoConfig& cfg, std::uint64_t seed, const UnorientedEdge& e);

struct PercoCluster {
  std::vector<Site> sites;  // BFS order from the origin
  std::vector<UnorientedEdge> open_edges;  // open edges with an endpoint in the cluster
  bool touched_boundary = false;

  std::size_t size() const { return sites.size(); }
  bool contains(const Site& x) const;
};

PercoCluster sample_cluster(const PercoConfig& cfg, std::uint64_t seed);

/// Fraction of seeds seed + i, i < replicas, whose cluster reaches the window boundary.
BinomialEstimate boundary_reach_probability(const PercoConfig& cfg, std::int64_t replicas, std::uint64_t seed);

struct EnhancementReport {
  std::vector<double> b_values;
  std::vector<BinomialEstimate> reach;  // one per b value
  std::int64_t replicas = 0;
  std::int64_t inclusion_checks = 0;
  bool strictly_increasing = false;
};

/// Clusters for increasing b on shared uniforms; every replica must satisfy
/// cluster(b_k) subset of cluster(b_{k+1}), otherwise InvariantError is thrown.
/// `b_values` must be non-decreasing.
EnhancementReport enhancement_monotonicity(const PercoConfig& cfg, std::span<const double> b_values,
                                           std::int64_t replicas, std::uint64_t seed);

/// Accepted numerical estimates of the bond percolation threshold (exact for d = 2).
double pc_bond(int d);

struct CertificateLine {
  std::string name;
  double lhs = 0;
  std::string relation;  // "<", "<=", ">", ">="
  double rhs = 0;
  bool holds = false;
};

struct ScheduleInputs {
  int d = 2;
  double pc = 0.5;
  double r = 0.02;
  double p = 0.47;
  double q = 1.0;
  double v = 1.0;
  double lambda = 1000.0;
  double zeta_estimate = 0.0;  // empirical P(zeta_ = 1) at (p, v, lambda)
  double a0_proxy = 0.0;       // empirical smallest a reaching the boundary at bonus b0
};

struct Certificate {
  ScheduleInputs inputs;
  double b0 = 0;
  double a = 0;  // p q
  double b = 0;  // P(zeta_ = 1)(1 - p)
  bool feasible = false;  // some p lies in (a0, pc)
  bool pass = false;
  std::vector<CertificateLine> lines;
  std::string label = "numerical evidence";
};

bool evaluate_relation(double lhs, const std::string& relation, double rhs);

/// Evaluates every inequality of the parameter schedule.
Certificate survival_certificate(const ScheduleInputs& in);

/// Re-evaluates the lines of `c` from their numbers; true iff every stored
/// verdict agrees and `pass` equals the conjunction.
bool recheck_certificate(const Certificate& c);

/// b0 = min((1 - pc)/2, r (1 - pc)).
double schedule_b0(double pc, double r);

struct A0Scan {
  std::vector<double> a_values;
  std::vector<BinomialEstimate> reach;
  double a0 = 1.0;  // smallest scanned a with reach >= threshold (1 when none)
  double threshold = 0.5;
};

/// Scans a over `a_values` (ascending) at bonus b and records the first a
/// whose boundary-reach estimate is at least `threshold`.
A0Scan a0_proxy_scan(int d, double b, int L, std::span<const double> a_values, double threshold,
                     std::int64_t replicas, std::uint64_t seed);

}  // namespace dynperc
