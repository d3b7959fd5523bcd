#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynperc/errors.hpp"
#include "dynperc/exploration.hpp"

namespace dynperc {

/// Source of the lower fields xi_ and zeta_.
///  * thinned: xi_ = xi * beta, beta ~ B(theta_xi) keyed per oriented edge, so
///    xi_ <= xi pointwise; the lower second-chance bit is zeta_bar * beta'
///    with beta' ~ B(theta_zeta) keyed per oriented special edge.
///  * independent: xi_ ~ B(q) from its own keys, with no pointwise relation
///    to xi; the second-chance bit is the same zeta_bar * beta'.
struct LowerBackend {
  enum class Kind { Thinned, Independent };
  Kind kind = Kind::Thinned;
  double theta_xi = 1.0;
  double theta_zeta = 1.0;
  double q = 0.0;

  static LowerBackend thinned(double theta_xi, double theta_zeta = 1.0);
  static LowerBackend independent(double q, double theta_zeta = 1.0);
  void validate() const;
};

const char* to_string(LowerBackend::Kind k);

struct CoupleOptions {
  int dim = 2;
  std::int64_t budget = 10000;  // cap on max(|S_T|, |S_T lower|)
  std::optional<Window> window;
  bool upper_enabled = true;
  bool lower_enabled = true;
  /// When false, inclusion failures are counted instead of thrown.
  bool strict = true;
};

/// One field lookup made while treating a site, kept for the forensic dump.
struct FieldRecord {
  OrientedEdge edge;
  bool lower = false;
  int omega = 0;
  int chance = 0;  // xi (upper) or xi_ (lower)
  int beta = -1;   // thinning bit, -1 when not consulted
  int second = -1;  // zeta^x (upper) or zeta_bar * beta' (lower), -1 when not consulted
  int verdict = 0;  // 0, 1 or 2
};

struct CoupledState {
  Algorithm algorithm = Algorithm::First;
  LowerBackend backend;
  Status status = Status::Exhausted;
  ExplorationState upper;  // timed, same bookkeeping as explore_first / explore_second
  ExplorationState lower;  // untimed percolation exploration
  std::int64_t passes = 0;
  std::int64_t invariant_checks = 0;
  std::int64_t violations = 0;  // only grows when options.strict is false
};

/// A cluster inclusion broke during a pass. `dump` lists the pass, the treated
/// site, both frontiers and every field consulted in that pass.
class InvariantViolation : public InvariantError {
 public:
  InvariantViolation(const std::string& what, std::string dump, std::int64_t pass)
      : InvariantError(what), dump_(std::move(dump)), pass_(pass) {}
  const std::string& dump() const { return dump_; }
  std::int64_t pass() const { return pass_; }

 private:
  std::string dump_;
  std::int64_t pass_;
};

/// Coupled first-chance exploration: upper opens on xi * omega (xi = 1{X_(x,y) < X_x}), lower on
/// xi_ * omega with shared omega. Sites are taken from the lower frontier
/// first (FIFO), then from the upper one, so the lower exploration order
/// never depends on the upper state.
CoupledState explore_coupled_first(const VariableFamilies& fam, const LowerBackend& backend,
                                   const CoupleOptions& options);

/// Coupled second-chance exploration: upper uses epsilon^{parent(y)}, lower uses epsilon_ built
/// from the product of zeta^x over all helpers.
CoupledState explore_coupled_second(const VariableFamilies& fam, const LowerBackend& backend,
                                    const CoupleOptions& options);

/// Full re-evaluation of S_T lower subset of S_T and
/// (S u S_T) lower subset of S u S_T.
bool check_inclusion(const CoupledState& state);

/// Lower bits as used by the coupled runs; exposed for tests.
bool lower_xi(const VariableFamilies& fam, const LowerBackend& backend, Algorithm alg, const OrientedEdge& e);
int lower_epsilon(const VariableFamilies& fam, const LowerBackend& backend, Algorithm alg, const OrientedEdge& e);

struct ClusterLawReport {
  std::vector<std::int64_t> exploration_sizes;
  std::vector<std::int64_t> direct_sizes;
  KsResult ks;
  MeanEstimate exploration_mean;
  MeanEstimate direct_mean;
  BinomialEstimate exploration_reach;  // cluster touches the window boundary
  BinomialEstimate direct_reach;
  bool pass = false;  // KS p-value >= 0.01
};

/// Standalone lower first-chance exploration with the independent backend
/// B(q) inside the window of half-width L against a direct Bernoulli(pq) bond
/// percolation sampler; replica i uses seed + i for the exploration and
/// seed + replicas + i for the direct sampler.
ClusterLawReport lower_cluster_law_check(int d, double p, double q, int L, std::int64_t replicas,
                                         std::uint64_t seed);

}  // namespace dynperc
