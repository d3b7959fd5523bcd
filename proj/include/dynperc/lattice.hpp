#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace dynperc {

inline constexpr int kMaxDim = 6;
inline constexpr std::int32_t kCoordLimit = 1 << 20;

/// A vertex of Z^d. Coordinates beyond `dim` are kept at zero so that
/// defaulted comparison and hashing are exact.
struct Site {
  std::array<std::int32_t, kMaxDim> c{};
  std::uint8_t dim = 2;

  static Site origin(int d);
  static Site of(std::initializer_list<std::int32_t> coords);

  std::int32_t operator[](int axis) const { return c[static_cast<std::size_t>(axis)]; }
  std::int32_t& operator[](int axis) { return c[static_cast<std::size_t>(axis)]; }
  int dimension() const { return dim; }

  /// Neighbor along `axis`, `sign` in {-1,+1}.
  Site shifted(int axis, int sign) const;
  bool is_origin() const;

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;
};

std::string to_string(const Site& x);

/// Fixed-capacity list of the 2d neighbors, axis ascending, minus before plus.
class Neighbors {
 public:
  explicit Neighbors(const Site& x);
  const Site* begin() const { return items_.data(); }
  const Site* end() const { return items_.data() + count_; }
  std::size_t size() const { return count_; }
  const Site& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::array<Site, 2 * kMaxDim> items_{};
  std::size_t count_ = 0;
};

Neighbors neighbors(const Site& x);
bool adjacent(const Site& a, const Site& b);

struct OrientedEdge {
  Site from;
  Site to;

  /// Throws std::invalid_argument unless the endpoints are at distance 1.
  static OrientedEdge make(const Site& from, const Site& to);
  OrientedEdge reversed() const { return {to, from}; }
  int axis() const;
  /// Direction index 2*axis + (to is the plus neighbor ? 1 : 0).
  int direction() const;

  friend auto operator<=>(const OrientedEdge&, const OrientedEdge&) = default;
  friend bool operator==(const OrientedEdge&, const OrientedEdge&) = default;
};

/// Unoriented edge stored lexicographically-smaller endpoint first.
struct UnorientedEdge {
  Site a;
  Site b;

  static UnorientedEdge of(const Site& x, const Site& y);
  static UnorientedEdge of(const OrientedEdge& e) { return of(e.from, e.to); }
  int axis() const;

  friend auto operator<=>(const UnorientedEdge&, const UnorientedEdge&) = default;
  friend bool operator==(const UnorientedEdge&, const UnorientedEdge&) = default;
};

std::string to_string(const OrientedEdge& e);

/// Second-chance edges: (x, x+e1) and (x+e1, x) with every coordinate of x
/// congruent to 1 mod 4.
bool is_special(const OrientedEdge& e);
bool is_special(const UnorientedEdge& e);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Fraction of unoriented edges of Z^d that are special: 1 / (d 4^d).
Rational special_edge_density(int d);

/// Sites with every |coordinate| <= half_width.
struct Window {
  int dim = 2;
  int half_width = 1;

  Window() = default;
  Window(int d, int L);

  bool contains(const Site& x) const;
  bool on_boundary(const Site& x) const;
  std::size_t side() const { return static_cast<std::size_t>(2 * half_width + 1); }
  std::size_t size() const;
  std::size_t index(const Site& x) const;
  Site site_at(std::size_t index) const;

  friend bool operator==(const Window&, const Window&) = default;
};

struct SiteHash {
  std::size_t operator()(const Site& x) const noexcept;
};
struct OrientedEdgeHash {
  std::size_t operator()(const OrientedEdge& e) const noexcept;
};
struct UnorientedEdgeHash {
  std::size_t operator()(const UnorientedEdge& e) const noexcept;
};

}  // namespace dynperc
