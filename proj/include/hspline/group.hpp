#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>

namespace hspline {

// Point of the Heisenberg group in (x, y, t) coordinates.
struct HPoint {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;

  friend bool operator==(const HPoint&, const HPoint&) = default;
};

// Lattice index (k, l, m) addressing the element (2k, l, m).
struct LatticeIndex {
  int k = 0;
  int l = 0;
  int m = 0;

  friend bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
  friend bool operator<(const LatticeIndex& a, const LatticeIndex& b) {
    if (a.k != b.k) return a.k < b.k;
    if (a.l != b.l) return a.l < b.l;
    return a.m < b.m;
  }
};

inline HPoint embed(const LatticeIndex& g) {
  return {2.0 * g.k, static_cast<double>(g.l), static_cast<double>(g.m)};
}

inline HPoint group_mul(const HPoint& p, const HPoint& q) {
  return {p.x + q.x, p.y + q.y, p.t + q.t + 0.5 * (q.x * p.y - q.y * p.x)};
}

inline HPoint group_inv(const HPoint& p) { return {-p.x, -p.y, -p.t}; }

inline HPoint identity() { return {}; }

// Product of two lattice elements stays in the lattice; the t offset is
// m + m' + (k' l - l' k).
inline LatticeIndex lattice_mul(const LatticeIndex& a, const LatticeIndex& b) {
  return {a.k + b.k, a.l + b.l, a.m + b.m + (b.k * a.l - b.l * a.k)};
}

inline LatticeIndex lattice_inv(const LatticeIndex& a) { return {-a.k, -a.l, -a.m}; }

using HFunction = std::function<double(const HPoint&)>;

// (L_g f)(p) = f(g^{-1} p)
inline HFunction left_translate(const HPoint& g, HFunction f) {
  const HPoint gi = group_inv(g);
  return [gi, f = std::move(f)](const HPoint& p) { return f(group_mul(gi, p)); };
}

// (R_g f)(p) = f(p g)
inline HFunction right_translate(const HPoint& g, HFunction f) {
  return [g, f = std::move(f)](const HPoint& p) { return f(group_mul(p, g)); };
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

using Box3 = std::array<Interval, 3>;

// Q = [0,2] x [0,1] x [0,1], fundamental domain of the lattice.
struct FundamentalDomain {
  static constexpr double x_hi = 2.0;
  static constexpr double y_hi = 1.0;
  static constexpr double t_hi = 1.0;

  static Box3 box() { return {Interval{0, x_hi}, Interval{0, y_hi}, Interval{0, t_hi}}; }
  static double volume() { return x_hi * y_hi * t_hi; }
  static bool contains(const HPoint& p) {
    return p.x >= 0 && p.x <= x_hi && p.y >= 0 && p.y <= y_hi && p.t >= 0 && p.t <= t_hi;
  }
};

}  // namespace hspline
