#include "dynperc/randomness.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace dynperc {

namespace {

constexpr int kMaxMarksPerBlock = 24;

// Inverse CDF of Poisson(1), truncated far in the tail (P(N > 24) < 1e-25).
int poisson_one(double u) {
  double term = std::exp(-1.0);
  double cdf = term;
  int k = 0;
  while (u > cdf && k < kMaxMarksPerBlock) {
    ++k;
    term /= k;
    cdf += term;
  }
  return k;
}

}  // namespace

void ModelParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1], got " + std::to_string(p));
  if (!(v >= 0.0)) throw std::invalid_argument("v must be >= 0, got " + std::to_string(v));
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0, got " + std::to_string(lambda));
}

MarkStream MarkStream::poisson(std::uint64_t key, double rate) {
  MarkStream s;
  s.key_ = key;
  s.rate_ = rate;
  return s;
}

MarkStream MarkStream::fixed(std::vector<double> sorted_marks) {
  MarkStream s;
  s.fixed_ = true;
  std::sort(sorted_marks.begin(), sorted_marks.end());
  s.marks_ = std::move(sorted_marks);
  s.horizon_ = kInfinity;
  return s;
}

int MarkStream::block_marks(std::int64_t j, double* out) const {
  const std::uint64_t block_key = absorb(key_, static_cast<std::uint64_t>(j));
  const int n = poisson_one(to_unit_open_closed(absorb(block_key, 0)));
  for (int i = 0; i < n; ++i) {
    const double u = to_unit_open_closed(absorb(block_key, static_cast<std::uint64_t>(i) + 1));
    out[i] = (static_cast<double>(j) + u) / rate_;
  }
  std::sort(out, out + n);
  return n;
}

double MarkStream::next_after(double t) const {
  if (fixed_) {
    auto it = std::upper_bound(marks_.begin(), marks_.end(), t);
    return it == marks_.end() ? kInfinity : *it;
  }
  if (rate_ <= 0.0 || t == kInfinity) return kInfinity;
  std::array<double, kMaxMarksPerBlock> buf{};
  std::int64_t j = t <= 0.0 ? 0 : static_cast<std::int64_t>(std::floor(t * rate_));
  for (;; ++j) {
    const int n = block_marks(j, buf.data());
    for (int i = 0; i < n; ++i)
      if (buf[static_cast<std::size_t>(i)] > t) return buf[static_cast<std::size_t>(i)];
  }
}

const std::vector<double>& MarkStream::materialize(double horizon) {
  if (fixed_ || horizon <= horizon_) return marks_;
  horizon_ = horizon;
  if (rate_ <= 0.0) return marks_;
  std::array<double, kMaxMarksPerBlock> buf{};
  const auto last_block = static_cast<std::int64_t>(std::floor(horizon * rate_));
  for (; next_block_ <= last_block; ++next_block_) {
    const int n = block_marks(next_block_, buf.data());
    pending_.insert(pending_.end(), buf.begin(), buf.begin() + n);
  }
  std::size_t moved = 0;
  while (moved < pending_.size() && pending_[moved] <= horizon) marks_.push_back(pending_[moved++]);
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(moved));
  return marks_;
}

VariableFamilies::VariableFamilies(std::uint64_t master_seed, ModelParams params)
    : seed_(master_seed), params_(params) {
  params_.validate();
}

std::uint64_t VariableFamilies::key(Family f, const Site& x) const {
  std::uint64_t h = absorb(mix64(seed_), static_cast<std::uint64_t>(f));
  for (int i = 0; i < x.dim; ++i) h = absorb(h, static_cast<std::uint32_t>(x[i]));
  return h;
}

std::uint64_t VariableFamilies::key(Family f, const OrientedEdge& e) const {
  return absorb(key(f, e.from), 0x100 + static_cast<std::uint64_t>(e.direction()));
}

std::uint64_t VariableFamilies::key(Family f, const UnorientedEdge& e) const {
  return absorb(key(f, e.a), 0x200 + static_cast<std::uint64_t>(e.axis()));
}

bool VariableFamilies::omega(const UnorientedEdge& e) const {
  // u is in (0,1]; u <= p gives probability exactly p and omega = 1 when p = 1.
  return uniform(Family::Omega, e) <= params_.p;
}

double VariableFamilies::t_plus(const UnorientedEdge& e) const {
  return exponential_from_unit(uniform(Family::TPlus, e), params_.v * params_.p);
}

double VariableFamilies::t_minus(const UnorientedEdge& e) const {
  return exponential_from_unit(uniform(Family::TMinus, e), params_.v * (1.0 - params_.p));
}

double VariableFamilies::x_site(const Site& x) const {
  return exponential_from_unit(uniform(Family::XSite, x), 1.0);
}

double VariableFamilies::x_prime(const Site& x) const {
  return exponential_from_unit(uniform(Family::XPrime, x), 1.0);
}

double VariableFamilies::x_edge(const OrientedEdge& e) const {
  return exponential_from_unit(uniform(Family::XEdge, e), params_.lambda);
}

MarkStream VariableFamilies::chi_site(const Site& x) const {
  return MarkStream::poisson(key(Family::ChiSite, x), 1.0);
}

MarkStream VariableFamilies::chi_edge(const UnorientedEdge& e) const {
  return MarkStream::poisson(key(Family::ChiEdge, e), params_.lambda);
}

}  // namespace dynperc
