#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "hspline/group.hpp"
#include "hspline/quadrature.hpp"
#include "hspline/specfun.hpp"

namespace hspline {

inline constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

// [0,2n] x [0,n] x [-(n+2)(n-1)/2, (n+1)(n+2)/2 - 2]
inline Box3 support_box(int n) {
  if (n < 1) throw std::invalid_argument("support_box: order must be positive");
  return {Interval{0.0, 2.0 * n}, Interval{0.0, 1.0 * n},
          Interval{-0.5 * (n + 2) * (n - 1), 0.5 * (n + 1) * (n + 2) - 2.0}};
}

inline bool in_box(const Box3& b, const HPoint& p) {
  return b[0].contains(p.x) && b[1].contains(p.y) && b[2].contains(p.t);
}

inline double phi1_eval(const HPoint& p) { return FundamentalDomain::contains(p) ? inv_sqrt2 : 0.0; }

// ---------------------------------------------------------------------------
// phi_2^lambda(x, y) = e^{2 pi i lambda} sinc^2(lambda) R(lambda, x, y).
// R is the four-region closed form with the cosine differences rewritten as
// sine products, which removes the 0/0 on the region boundaries.

inline double phi2_profile(double a, double x, double y) {
  if (x < 0.0 || x > 4.0 || y < 0.0 || y > 2.0) return 0.0;
  const double h = 0.5 * a;
  if (x <= 2.0) {
    if (y <= 1.0) {
      const double s = sinc(h * x * y);
      return 0.5 * x * y * s * s;
    }
    return 0.5 * x * (2.0 - y) * sinc(h * x * y) * sinc(h * x * (2.0 - y));
  }
  if (y <= 1.0) return 0.5 * (4.0 - x) * y * sinc(h * x * y) * sinc(h * (4.0 - x) * y);
  return 0.5 * (4.0 - x) * (2.0 - y) * sinc(h * x * (2.0 - y)) * sinc(h * (4.0 - x) * y);
}

inline cplx phi2_lambda(double lambda, double x, double y) {
  if (lambda == 0.0) throw std::domain_error("phi2_lambda: lambda must be nonzero");
  const double s = sinc(lambda);
  return expi_pi(2.0 * lambda) * (s * s * phi2_profile(lambda, x, y));
}

// Analytic continuation to lambda = 0; equals the t-marginal of phi_2.
inline double phi2_lambda_limit(double x, double y) { return phi2_profile(0.0, x, y); }

// ---------------------------------------------------------------------------
// Direct convolution: phi_2(x,y,t) = 1/2 int_{R(x,y)} B_2(t + (v x - u y)/2) du dv,
// R(x,y) = ([0,2] cap [x-2,x]) x ([0,1] cap [y-1,y]). The v-integral uses the
// antiderivative of B_2; the u-integrand is then piecewise quadratic.

namespace detail {
inline double b2(double tau) {
  if (tau <= 0.0 || tau >= 2.0) return 0.0;
  return tau <= 1.0 ? tau : 2.0 - tau;
}
inline double b2_antideriv(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau <= 1.0) return 0.5 * tau * tau;
  if (tau <= 2.0) return 1.0 - 0.5 * (2.0 - tau) * (2.0 - tau);
  return 1.0;
}
}  // namespace detail

inline double phi2_direct(const HPoint& p) {
  const double x = p.x, y = p.y, t = p.t;
  if (!in_box(support_box(2), p)) return 0.0;
  const double ua = std::max(0.0, x - 2.0), ub = std::min(2.0, x);
  const double va = std::max(0.0, y - 1.0), vb = std::min(1.0, y);
  if (!(ub > ua) || !(vb > va)) return 0.0;
  const double beta = 0.5 * x;
  auto inner = [&](double u) {
    const double alpha = t - 0.5 * u * y;
    if (beta * (vb - va) < 1e-9) return (vb - va) * detail::b2(alpha + beta * 0.5 * (va + vb));
    return (detail::b2_antideriv(alpha + beta * vb) - detail::b2_antideriv(alpha + beta * va)) / beta;
  };
  std::vector<double> breaks;
  if (y > 0.0)
    for (int k = 0; k <= 2; ++k)
      for (double vl : {va, vb}) breaks.push_back(2.0 * (t + beta * vl - k) / y);
  return 0.5 * integrate_fixed(inner, ua, ub, 1, 4, breaks);
}

// t-values where phi_2(x, y, .) changes polynomial piece.
inline std::vector<double> phi2_t_breaks(double x, double y) {
  std::vector<double> out;
  const double ua = std::max(0.0, x - 2.0), ub = std::min(2.0, x);
  const double va = std::max(0.0, y - 1.0), vb = std::min(1.0, y);
  for (double u : {ua, ub})
    for (double v : {va, vb})
      for (int k = 0; k <= 2; ++k) out.push_back(k - 0.5 * (v * x - u * y));
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// phi_2 by inverting the t-transform: phi_2 = int e^{-2 pi i lambda t} phi_2^lambda dlambda.

struct InversionOptions {
  double Lambda = 200.0;
  double tail_tol = 1e-6;
  double imag_tol = 1e-6;
  int order = 8;
};

struct InversionResult {
  double value = 0.0;
  double imag = 0.0;
  TailBound tail;
};

inline double phi2_inversion_tail(double x, double y, double Lambda) {
  const double A = phi2_lambda_limit(x, y);
  double bound = 2.0 * A / (pi * pi * Lambda);
  if (x * y > 0.0) bound = std::min(bound, 4.0 / (3.0 * std::pow(pi, 4) * x * y * std::pow(Lambda, 3)));
  return bound;
}

inline InversionResult phi2_invert(const HPoint& p, const InversionOptions& o = {}) {
  InversionResult r;
  r.tail.radius = static_cast<int>(o.Lambda);
  if (p.x < 0.0 || p.x > 4.0 || p.y < 0.0 || p.y > 2.0) return r;
  r.tail.bound = phi2_inversion_tail(p.x, p.y, o.Lambda);
  if (r.tail.bound > o.tail_tol) throw ConvergenceError("phi2_eval: lambda tail not certifiable");
  const double freq = std::abs(p.t) + 6.0;
  const int panels = static_cast<int>(std::ceil(2.0 * freq * o.Lambda));
  auto f = [&](double lam) { return expi_pi(-2.0 * lam * p.t) * phi2_lambda(lam, p.x, p.y); };
  const cplx pos = integrate_fixed(f, 0.0, o.Lambda, panels, o.order);
  const cplx neg = integrate_fixed(f, -o.Lambda, 0.0, panels, o.order);
  const cplx v = pos + neg;
  r.value = v.real();
  r.imag = v.imag();
  if (std::abs(r.imag) > o.imag_tol) throw ConvergenceError("phi2_eval: imaginary residue too large");
  return r;
}

inline double phi2_eval(const HPoint& p, const InversionOptions& o = {}) { return phi2_invert(p, o).value; }

// ---------------------------------------------------------------------------

struct Grid3D {
  Box3 box{};
  std::array<int, 3> shape{0, 0, 0};
  std::vector<double> samples;  // row-major, t fastest

  size_t size() const { return static_cast<size_t>(shape[0]) * shape[1] * shape[2]; }
  double step(int axis) const { return (box[axis].hi - box[axis].lo) / (shape[axis] - 1); }
  double coord(int axis, int i) const { return box[axis].lo + i * step(axis); }
  size_t index(int i, int j, int k) const { return (static_cast<size_t>(i) * shape[1] + j) * shape[2] + k; }
  double at(int i, int j, int k) const { return samples[index(i, j, k)]; }
  bool valid() const {
    return shape[0] > 1 && shape[1] > 1 && shape[2] > 1 && samples.size() == size();
  }

  // 0 outside the box.
  double trilinear(double x, double y, double t) const {
    const double q[3] = {x, y, t};
    int i0[3];
    double w[3];
    for (int a = 0; a < 3; ++a) {
      if (q[a] < box[a].lo || q[a] > box[a].hi) return 0.0;
      const double s = (q[a] - box[a].lo) / step(a);
      int i = std::min(static_cast<int>(s), shape[a] - 2);
      i0[a] = i;
      w[a] = s - i;
    }
    double v = 0.0;
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy)
        for (int dt = 0; dt < 2; ++dt)
          v += (dx ? w[0] : 1 - w[0]) * (dy ? w[1] : 1 - w[1]) * (dt ? w[2] : 1 - w[2]) *
               at(i0[0] + dx, i0[1] + dy, i0[2] + dt);
    return v;
  }
};

template <class F>
Grid3D fill_grid(F&& f, const Box3& box, std::array<int, 3> shape) {
  Grid3D g{box, shape, {}};
  g.samples.resize(g.size());
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) g.samples[g.index(i, j, k)] = f(HPoint{g.coord(0, i), g.coord(1, j), g.coord(2, k)});
  return g;
}

// phi_2 samples and their running t-integral on a common grid over supp phi_2.
struct Phi2Tables {
  Grid3D values;
  Grid3D cumulative;
};

inline Phi2Tables build_phi2_tables(int per_unit = 16) {
  const Box3 box = support_box(2);
  const std::array<int, 3> shape{static_cast<int>(box[0].width() * per_unit) + 1,
                                 static_cast<int>(box[1].width() * per_unit) + 1,
                                 static_cast<int>(box[2].width() * per_unit) + 1};
  Phi2Tables tb;
  tb.values = Grid3D{box, shape, std::vector<double>(static_cast<size_t>(shape[0]) * shape[1] * shape[2])};
  tb.cumulative = tb.values;
  for (int i = 0; i < shape[0]; ++i) {
    const double x = tb.values.coord(0, i);
    for (int j = 0; j < shape[1]; ++j) {
      const double y = tb.values.coord(1, j);
      const auto breaks = phi2_t_breaks(x, y);
      double acc = 0.0;
      for (int k = 0; k < shape[2]; ++k) {
        const double t = tb.values.coord(2, k);
        if (k > 0) {
          const double t0 = tb.values.coord(2, k - 1);
          acc += integrate_fixed([&](double s) { return phi2_direct({x, y, s}); }, t0, t, 1, 4, breaks);
        }
        tb.values.samples[tb.values.index(i, j, k)] = phi2_direct({x, y, t});
        tb.cumulative.samples[tb.cumulative.index(i, j, k)] = acc;
      }
    }
  }
  return tb;
}

// phi_3 by nesting the recursion over phi_2. The s-integral of phi_2 along t is
// read off the cumulative table (cubic Hermite in t, bilinear in x, y).
class Phi3Evaluator {
 public:
  explicit Phi3Evaluator(Phi2Tables tables) : tb_(std::move(tables)) {
    if (!tb_.values.valid() || !tb_.cumulative.valid() || tb_.values.shape != tb_.cumulative.shape)
      throw std::invalid_argument("Phi3Evaluator: inconsistent tables");
  }
  explicit Phi3Evaluator(int per_unit = 16) : Phi3Evaluator(build_phi2_tables(per_unit)) {}

  const Phi2Tables& tables() const { return tb_; }

  // int_{-inf}^{T} phi_2(X, Y, tau) dtau
  double cumulative(double X, double Y, double T) const {
    const Grid3D& g = tb_.cumulative;
    if (X < g.box[0].lo || X > g.box[0].hi || Y < g.box[1].lo || Y > g.box[1].hi) return 0.0;
    if (T <= g.box[2].lo) return 0.0;
    const double sx = (X - g.box[0].lo) / g.step(0), sy = (Y - g.box[1].lo) / g.step(1);
    const int i = std::min(static_cast<int>(sx), g.shape[0] - 2);
    const int j = std::min(static_cast<int>(sy), g.shape[1] - 2);
    const double wx = sx - i, wy = sy - j;
    double v = 0.0;
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy) {
        const double w = (dx ? wx : 1 - wx) * (dy ? wy : 1 - wy);
        if (w != 0.0) v += w * hermite_t(i + dx, j + dy, T);
      }
    return v;
  }

  double operator()(const HPoint& p) const {
    if (!in_box(support_box(3), p)) return 0.0;
    const double x = p.x, y = p.y, t = p.t;
    const double ua = std::max(0.0, x - 4.0), ub = std::min(2.0, x);
    const double va = std::max(0.0, y - 2.0), vb = std::min(1.0, y);
    if (!(ub > ua) || !(vb > va)) return 0.0;
    const std::vector<double> ubr{x - 2.0}, vbr{y - 1.0};
    auto inner_u = [&](double u) {
      return integrate_fixed(
          [&](double v) {
            const double T0 = t + 0.5 * (v * x - u * y);
            return cumulative(x - u, y - v, T0) - cumulative(x - u, y - v, T0 - 1.0);
          },
          va, vb, 2, 4, vbr);
    };
    return inv_sqrt2 * integrate_fixed(inner_u, ua, ub, 2, 4, ubr);
  }

 private:
  double hermite_t(int i, int j, double T) const {
    const Grid3D& c = tb_.cumulative;
    const Grid3D& f = tb_.values;
    const int nt = c.shape[2];
    if (T >= c.box[2].hi) return c.at(i, j, nt - 1);
    const double h = c.step(2);
    const double s = (T - c.box[2].lo) / h;
    const int k = std::min(static_cast<int>(s), nt - 2);
    const double u = s - k;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * c.at(i, j, k) + h10 * h * f.at(i, j, k) + h01 * c.at(i, j, k + 1) + h11 * h * f.at(i, j, k + 1);
  }

  Phi2Tables tb_;
};

// ---------------------------------------------------------------------------

enum class Strategy { closed_form, slice_transform, nested_quadrature };

inline constexpr int default_max_order = 3;

// phi_n through the recursion: closed form for n = 1, direct convolution for
// n = 2, nesting over phi_2 for n = 3. The phi_3 evaluator is built on first use.
inline double phi_n_eval(int n, const HPoint& p, int max_order = default_max_order) {
  if (n < 1 || n > max_order || n > 3) throw std::invalid_argument("phi_n_eval: order above configured max");
  if (n == 1) return phi1_eval(p);
  if (n == 2) return phi2_direct(p);
  static const Phi3Evaluator phi3;
  return phi3(p);
}

class SplineModel {
 public:
  explicit SplineModel(int n, Strategy s = Strategy::nested_quadrature, std::shared_ptr<const Phi3Evaluator> phi3 = {})
      : n_(n), strategy_(s), phi3_(std::move(phi3)) {
    if (n < 1 || n > 3) throw std::invalid_argument("SplineModel: order must be 1, 2 or 3");
    if (n == 1) strategy_ = Strategy::closed_form;
    if (s == Strategy::slice_transform && n != 2)
      throw std::invalid_argument("SplineModel: slice transform is only available for n = 2");
    if (n == 3 && !phi3_) phi3_ = std::make_shared<Phi3Evaluator>();
  }

  int order() const { return n_; }
  Strategy strategy() const { return strategy_; }
  Box3 support() const { return support_box(n_); }

  double operator()(const HPoint& p) const {
    switch (n_) {
      case 1:
        return phi1_eval(p);
      case 2:
        return strategy_ == Strategy::slice_transform ? phi2_eval(p) : phi2_direct(p);
      default:
        return (*phi3_)(p);
    }
  }

 private:
  int n_;
  Strategy strategy_;
  std::shared_ptr<const Phi3Evaluator> phi3_;
};

// int phi_n over its support. n = 2 is exact up to rounding (polynomial pieces in t,
// piecewise smooth in x, y); n = 3 integrates the nested evaluator.
inline double spline_integral(int n, const Phi3Evaluator* phi3 = nullptr) {
  if (n == 1) return FundamentalDomain::volume() * inv_sqrt2;
  if (n == 2) {
    const Box3 b = support_box(2);
    return integrate_fixed(
        [&](double x) {
          return integrate_fixed(
              [&](double y) {
                return integrate_fixed([&](double t) { return phi2_direct({x, y, t}); }, b[2].lo, b[2].hi, 1, 4,
                                       phi2_t_breaks(x, y));
              },
              b[1].lo, b[1].hi, 4, 4, {1.0});
        },
        b[0].lo, b[0].hi, 4, 4, {2.0});
  }
  if (n == 3) {
    std::unique_ptr<Phi3Evaluator> own;
    if (!phi3) phi3 = (own = std::make_unique<Phi3Evaluator>()).get();
    const Box3 b = support_box(3);
    return integrate_fixed(
        [&](double x) {
          return integrate_fixed(
              [&](double y) {
                return integrate_fixed([&](double t) { return (*phi3)({x, y, t}); }, b[2].lo, b[2].hi, 26, 4);
              },
              b[1].lo, b[1].hi, 4, 4, {1.0, 2.0});
        },
        b[0].lo, b[0].hi, 4, 4, {2.0, 4.0});
  }
  throw std::invalid_argument("spline_integral: supported orders are 1, 2 and 3");
}

// ---------------------------------------------------------------------------
// int_0^1 sum_{k,l,m} (L_{(2k,l,m)} phi_n)(x, y, t) dt over the finite window of
// translates whose support meets the line over (x, y).

inline double periodization_check(int n, double x, double y) {
  if (n < 1 || n > 2) throw std::invalid_argument("periodization_check: supported orders are 1 and 2");
  const Box3 sb = support_box(n);
  double total = 0.0;
  const int kmin = static_cast<int>(std::ceil((x - sb[0].hi) / 2.0)), kmax = static_cast<int>(std::floor(x / 2.0));
  const int lmin = static_cast<int>(std::ceil(y - sb[1].hi)), lmax = static_cast<int>(std::floor(y));
  QuadSpec spec;
  spec.abs_tol = 1e-13;
  for (int k = kmin; k <= kmax; ++k)
    for (int l = lmin; l <= lmax; ++l) {
      const double X = x - 2.0 * k, Y = y - l;
      const double c = 0.5 * (2.0 * k * y - l * x);
      const int mmin = static_cast<int>(std::ceil(c - sb[2].hi)) - 1;
      const int mmax = static_cast<int>(std::floor(1.0 + c - sb[2].lo)) + 1;
      std::vector<double> tb0 = n == 1 ? std::vector<double>{0.0, 1.0} : phi2_t_breaks(X, Y);
      for (int m = mmin; m <= mmax; ++m) {
        std::vector<double> tb;
        for (double b : tb0) tb.push_back(b + m - c);
        auto f = [&](double t) {
          const HPoint q{X, Y, t - m + c};
          return n == 1 ? phi1_eval(q) : phi2_direct(q);
        };
        total += integrate_1d(f, 0.0, 1.0, spec, tb).value;
      }
    }
  return total;
}

// ---------------------------------------------------------------------------
// Vector-field identities for phi_2 written through right translates of phi_1.

enum class Field { X, Y, T };

// printed: the right-hand sides with weights (v - y) and (x - u);
// corrected: weights (v - 2y) and (2x - u), which follow from differentiating
// the recursion under the integral sign.
enum class FieldForm { printed, corrected };

struct FieldCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

namespace detail {

struct Affine2 {
  double c0 = 0, co = 0, ci = 0;
  double at(double o, double i) const { return c0 + co * o + ci * i; }
};

// phi_1 evaluated at a point whose coordinates are affine in (o, i).
struct IndicatorTerm {
  double sign = 1.0;
  std::array<Affine2, 3> coord;
};

// int_O int_I w(o, i) sum_j sign_j phi_1(coords_j(o, i)) di do, exact up to
// rounding: all kinks of the inner integral are located from the face lines.
template <class W>
double affine_indicator_integral(const std::vector<IndicatorTerm>& terms, Interval O, Interval I, W&& w) {
  const double faces[3] = {2.0, 1.0, 1.0};
  struct Line {
    double a, b, c;  // a o + b i = c
  };
  std::vector<Line> lines{{0, 1, I.lo}, {0, 1, I.hi}};
  for (const auto& tm : terms)
    for (int d = 0; d < 3; ++d)
      for (double f : {0.0, faces[d]}) lines.push_back({tm.coord[d].co, tm.coord[d].ci, f - tm.coord[d].c0});
  std::vector<double> obreaks;
  for (size_t p = 0; p < lines.size(); ++p) {
    if (lines[p].b == 0.0 && lines[p].a != 0.0) obreaks.push_back(lines[p].c / lines[p].a);
    for (size_t q = p + 1; q < lines.size(); ++q) {
      const double det = lines[p].a * lines[q].b - lines[q].a * lines[p].b;
      if (std::abs(det) < 1e-14) continue;
      obreaks.push_back((lines[p].c * lines[q].b - lines[q].c * lines[p].b) / det);
    }
  }
  auto value = [&](double o, double i) {
    double s = 0.0;
    for (const auto& tm : terms)
      s += tm.sign * phi1_eval({tm.coord[0].at(o, i), tm.coord[1].at(o, i), tm.coord[2].at(o, i)});
    return w(o, i) * s;
  };
  auto inner = [&](double o) {
    std::vector<double> ib;
    for (const auto& tm : terms)
      for (int d = 0; d < 3; ++d)
        if (tm.coord[d].ci != 0.0)
          for (double f : {0.0, faces[d]}) ib.push_back((f - tm.coord[d].c0 - tm.coord[d].co * o) / tm.coord[d].ci);
    return integrate_fixed([&](double i) { return value(o, i); }, I.lo, I.hi, 1, 2, ib);
  };
  return integrate_fixed(inner, O.lo, O.hi, 1, 3, obreaks);
}

// Terms of (grad_3 R_{(-u,-v,0)}) phi_1 at p, with o = u in [0,2], i = v in [0,1].
inline std::vector<IndicatorTerm> grad3_terms(const HPoint& p) {
  std::vector<IndicatorTerm> out;
  for (double c : {0.0, -1.0}) {
    IndicatorTerm tm;
    tm.sign = c == 0.0 ? 1.0 : -1.0;
    tm.coord[0] = {p.x, -1.0, 0.0};
    tm.coord[1] = {p.y, 0.0, -1.0};
    tm.coord[2] = {p.t + c, -0.5 * p.y, 0.5 * p.x};
    out.push_back(tm);
  }
  return out;
}

}  // namespace detail

inline double vector_field_rhs(Field field, const HPoint& p, FieldForm form = FieldForm::printed) {
  using detail::Affine2;
  using detail::IndicatorTerm;
  const auto g3 = detail::grad3_terms(p);
  const Interval U{0.0, 2.0}, V{0.0, 1.0}, S{0.0, 1.0};
  const double x = p.x, y = p.y;
  switch (field) {
    case Field::T:
      return inv_sqrt2 * detail::affine_indicator_integral(g3, U, V, [](double, double) { return 1.0; });
    case Field::X: {
      // o = v, i = s: phi_1(p (a, -v, -s)) for a = 0 and a = -2
      std::vector<IndicatorTerm> g1;
      for (double a : {0.0, -2.0}) {
        IndicatorTerm tm;
        tm.sign = a == 0.0 ? 1.0 : -1.0;
        tm.coord[0] = {x + a, 0.0, 0.0};
        tm.coord[1] = {y, -1.0, 0.0};
        tm.coord[2] = {p.t + 0.5 * a * y, 0.5 * x, -1.0};
        g1.push_back(tm);
      }
      const double ky = form == FieldForm::printed ? y : 2.0 * y;
      const double first = detail::affine_indicator_integral(g1, V, S, [](double, double) { return 1.0; });
      const double second = detail::affine_indicator_integral(g3, U, V, [&](double, double v) { return v - ky; });
      return inv_sqrt2 * first + 0.5 * inv_sqrt2 * second;
    }
    case Field::Y: {
      // o = u, i = s: phi_1(p (-u, b, -s)) for b = 0 and b = -1
      std::vector<IndicatorTerm> g2;
      for (double b : {0.0, -1.0}) {
        IndicatorTerm tm;
        tm.sign = b == 0.0 ? 1.0 : -1.0;
        tm.coord[0] = {x, -1.0, 0.0};
        tm.coord[1] = {y + b, 0.0, 0.0};
        tm.coord[2] = {p.t - 0.5 * b * x, -0.5 * y, -1.0};
        g2.push_back(tm);
      }
      const double kx = form == FieldForm::printed ? x : 2.0 * x;
      const double first = detail::affine_indicator_integral(g2, U, S, [](double, double) { return 1.0; });
      const double second = detail::affine_indicator_integral(g3, U, V, [&](double u, double) { return kx - u; });
      return inv_sqrt2 * first + 0.5 * inv_sqrt2 * second;
    }
  }
  return 0.0;
}

inline double vector_field_lhs(Field field, const HPoint& p, double h) {
  auto f = [](double x, double y, double t) { return phi2_direct({x, y, t}); };
  const double dt = (f(p.x, p.y, p.t + h) - f(p.x, p.y, p.t - h)) / (2 * h);
  switch (field) {
    case Field::T:
      return dt;
    case Field::X:
      return (f(p.x + h, p.y, p.t) - f(p.x - h, p.y, p.t)) / (2 * h) - 0.5 * p.y * dt;
    case Field::Y:
      return (f(p.x, p.y + h, p.t) - f(p.x, p.y - h, p.t)) / (2 * h) + 0.5 * p.x * dt;
  }
  return 0.0;
}

// Points where phi_2 is smooth on the stencil of step h.
inline bool vector_field_admissible(const HPoint& p, double h) {
  const double margin = 2.0 * h;
  for (double c : {0.0, 2.0, 4.0})
    if (std::abs(p.x - c) < margin) return false;
  for (double c : {0.0, 1.0, 2.0})
    if (std::abs(p.y - c) < margin) return false;
  const double scale = 1.0 + std::abs(p.x) + std::abs(p.y);
  for (double tb : phi2_t_breaks(p.x, p.y))
    if (std::abs(p.t - tb) < margin * scale) return false;
  for (double u : {0.0, 2.0, p.x - 2.0, p.x})
    for (double v : {0.0, 1.0, p.y - 1.0, p.y})
      for (int k = 0; k <= 2; ++k)
        if (std::abs(p.t - k + 0.5 * (v * p.x - u * p.y)) < margin * scale) return false;
  return true;
}

inline FieldCheck vector_field_check(int n, Field field, const HPoint& p, double h,
                                     FieldForm form = FieldForm::printed) {
  if (n != 1) throw std::invalid_argument("vector_field_check: implemented for n = 1");
  if (!(h >= 1e-6 && h <= 1e-2)) throw std::invalid_argument("vector_field_check: step out of range");
  FieldCheck r;
  r.lhs = vector_field_lhs(field, p, h);
  r.rhs = vector_field_rhs(field, p, form);
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

// Uniform points of supp phi_2 with phi_2 > floor that pass the admissibility test.
inline std::vector<HPoint> admissible_points(int count, double h, std::mt19937_64& rng, double floor = 1e-2) {
  const Box3 b = support_box(2);
  std::uniform_real_distribution<double> X(b[0].lo, b[0].hi), Y(b[1].lo, b[1].hi), T(b[2].lo, b[2].hi);
  std::vector<HPoint> out;
  for (long tries = 0; static_cast<int>(out.size()) < count; ++tries) {
    if (tries > 1000000) throw std::runtime_error("admissible_points: sampling budget exhausted");
    const HPoint p{X(rng), Y(rng), T(rng)};
    if (phi2_direct(p) > floor && vector_field_admissible(p, h)) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residual of the reflection symmetry of L_{(-n,-n/2,-alpha)} phi_n about the origin.

inline double nonsymmetry_residual(int n, double alpha, int points = 21) {
  if (n < 1 || n > 2) throw std::invalid_argument("nonsymmetry_residual: n must be 1 or 2");
  const Box3 sb = support_box(n);
  const HPoint gi{1.0 * n, 0.5 * n, alpha};  // inverse of (-n, -n/2, -alpha)
  const double half = 0.5 * n * n;
  const double tm = std::max(std::abs(sb[2].lo - alpha - half), std::abs(sb[2].hi - alpha + half));
  const Box3 grid{Interval{-1.0 * n, 1.0 * n}, Interval{-0.5 * n, 0.5 * n}, Interval{-tm, tm}};
  auto near_face = [](const HPoint& q) {
    const double eps = 1e-9;
    for (double c : {0.0, 2.0})
      if (std::abs(q.x - c) < eps) return true;
    for (double c : {0.0, 1.0}) {
      if (std::abs(q.y - c) < eps) return true;
      if (std::abs(q.t - c) < eps) return true;
    }
    return false;
  };
  double worst = 0.0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j)
      for (int k = 0; k < points; ++k) {
        const HPoint p{grid[0].lo + i * grid[0].width() / (points - 1), grid[1].lo + j * grid[1].width() / (points - 1),
                       grid[2].lo + k * grid[2].width() / (points - 1)};
        const HPoint a = group_mul(gi, p), b = group_mul(gi, group_inv(p));
        double va, vb;
        if (n == 1) {
          if (near_face(a) || near_face(b)) continue;
          va = phi1_eval(a);
          vb = phi1_eval(b);
        } else {
          va = phi2_direct(a);
          vb = phi2_direct(b);
        }
        worst = std::max(worst, std::abs(va - vb));
      }
  return worst;
}

struct NonsymmetryMin {
  double alpha = 0.0;
  double residual = 0.0;
};

// Grid search over [lo, hi] followed by golden-section refinement.
inline NonsymmetryMin nonsymmetry_minimize(int n, double lo = -5.0, double hi = 5.0, int grid = 41,
                                           int refine_iters = 30) {
  NonsymmetryMin best{lo, INFINITY};
  const double step = (hi - lo) / (grid - 1);
  for (int i = 0; i < grid; ++i) {
    const double a = lo + i * step;
    const double r = nonsymmetry_residual(n, a);
    if (r < best.residual) best = {a, r};
  }
  double a = std::max(lo, best.alpha - step), b = std::min(hi, best.alpha + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = nonsymmetry_residual(n, c), fd = nonsymmetry_residual(n, d);
  for (int it = 0; it < refine_iters; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = nonsymmetry_residual(n, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = nonsymmetry_residual(n, d);
    }
  }
  if (fc < best.residual) best = {c, fc};
  if (fd < best.residual) best = {d, fd};
  return best;
}

}  // namespace hspline
