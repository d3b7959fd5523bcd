#include "dynperc/lattice.hpp"

#include <cstdlib>
#include <stdexcept>

#include "dynperc/hashing.hpp"

namespace dynperc {

namespace {

constexpr bool congruent_one_mod4(std::int32_t v) {
  return ((v % 4) + 4) % 4 == 1;
}

// True iff (x, x+e1) is a special oriented edge.
bool special_base(const Site& x) {
  for (int i = 0; i < x.dim; ++i)
    if (!congruent_one_mod4(x[i])) return false;
  return true;
}

}  // namespace

Site Site::origin(int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
  Site x;
  x.dim = static_cast<std::uint8_t>(d);
  return x;
}

Site Site::of(std::initializer_list<std::int32_t> coords) {
  Site x = origin(static_cast<int>(coords.size()));
  int i = 0;
  for (auto v : coords) x[i++] = v;
  return x;
}

Site Site::shifted(int axis, int sign) const {
  Site y = *this;
  y[axis] += sign;
  return y;
}

bool Site::is_origin() const {
  for (int i = 0; i < dim; ++i)
    if (c[static_cast<std::size_t>(i)] != 0) return false;
  return true;
}

std::string to_string(const Site& x) {
  std::string s = "(";
  for (int i = 0; i < x.dim; ++i) {
    if (i) s += ',';
    s += std::to_string(x[i]);
  }
  return s + ")";
}

Neighbors::Neighbors(const Site& x) {
  for (int axis = 0; axis < x.dim; ++axis) {
    items_[count_++] = x.shifted(axis, -1);
    items_[count_++] = x.shifted(axis, +1);
  }
}

Neighbors neighbors(const Site& x) { return Neighbors(x); }

bool adjacent(const Site& a, const Site& b) {
  if (a.dim != b.dim) return false;
  int total = 0;
  for (int i = 0; i < a.dim; ++i) total += std::abs(a[i] - b[i]);
  return total == 1;
}

OrientedEdge OrientedEdge::make(const Site& from, const Site& to) {
  if (!adjacent(from, to))
    throw std::invalid_argument("edge endpoints must be nearest neighbors: " + to_string(from) +
                                " -> " + to_string(to));
  return {from, to};
}

int OrientedEdge::axis() const {
  for (int i = 0; i < from.dim; ++i)
    if (from[i] != to[i]) return i;
  return -1;
}

int OrientedEdge::direction() const {
  const int a = axis();
  return 2 * a + (to[a] > from[a] ? 1 : 0);
}

UnorientedEdge UnorientedEdge::of(const Site& x, const Site& y) {
  if (!adjacent(x, y))
    throw std::invalid_argument("edge endpoints must be nearest neighbors: " + to_string(x) +
                                " - " + to_string(y));
  return x < y ? UnorientedEdge{x, y} : UnorientedEdge{y, x};
}

int UnorientedEdge::axis() const {
  for (int i = 0; i < a.dim; ++i)
    if (a[i] != b[i]) return i;
  return -1;
}

std::string to_string(const OrientedEdge& e) {
  return to_string(e.from) + "->" + to_string(e.to);
}

bool is_special(const UnorientedEdge& e) {
  // Canonical order puts the smaller first coordinate first along axis 0.
  return e.axis() == 0 && special_base(e.a);
}

bool is_special(const OrientedEdge& e) { return is_special(UnorientedEdge::of(e)); }

Rational special_edge_density(int d) {
  if (d < 2) throw std::invalid_argument("special_edge_density requires d >= 2");
  std::int64_t cell = 1;
  for (int i = 0; i < d; ++i) cell *= 4;
  return {1, static_cast<std::int64_t>(d) * cell};
}

Window::Window(int d, int L) : dim(d), half_width(L) {
  if (L < 1) throw std::invalid_argument("window half-width must be >= 1");
  if (L >= kCoordLimit) throw std::invalid_argument("window half-width exceeds coordinate limit");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
}

bool Window::contains(const Site& x) const {
  for (int i = 0; i < dim; ++i)
    if (x[i] < -half_width || x[i] > half_width) return false;
  return true;
}

bool Window::on_boundary(const Site& x) const {
  for (int i = 0; i < dim; ++i)
    if (std::abs(x[i]) == half_width) return true;
  return false;
}

std::size_t Window::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= side();
  return n;
}

std::size_t Window::index(const Site& x) const {
  std::size_t idx = 0;
  for (int i = dim - 1; i >= 0; --i)
    idx = idx * side() + static_cast<std::size_t>(x[i] + half_width);
  return idx;
}

Site Window::site_at(std::size_t index) const {
  Site x = Site::origin(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = static_cast<std::int32_t>(index % side()) - half_width;
    index /= side();
  }
  return x;
}

std::size_t SiteHash::operator()(const Site& x) const noexcept {
  std::uint64_t h = x.dim;
  for (int i = 0; i < x.dim; ++i) h = absorb(h, static_cast<std::uint32_t>(x[i]));
  return static_cast<std::size_t>(h);
}

std::size_t OrientedEdgeHash::operator()(const OrientedEdge& e) const noexcept {
  return static_cast<std::size_t>(absorb(SiteHash{}(e.from), static_cast<std::uint64_t>(e.direction())));
}

std::size_t UnorientedEdgeHash::operator()(const UnorientedEdge& e) const noexcept {
  return static_cast<std::size_t>(absorb(SiteHash{}(e.a), static_cast<std::uint64_t>(e.axis()) + 97));
}

}  // namespace dynperc
