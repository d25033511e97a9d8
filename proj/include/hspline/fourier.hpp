#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hspline/group.hpp"
#include "hspline/quadrature.hpp"
#include "hspline/specfun.hpp"
#include "hspline/splines.hpp"

namespace hspline {

// f^lambda(x, y) = int f(x, y, t) e^{2 pi i lambda t} dt, represented by a
// callback on a rectangular support. Knots mark lines across which the slice
// is not smooth; quadratures split there.
struct Slice2D {
  double lambda = 1.0;
  std::function<cplx(double, double)> fn;
  Interval x_support{0.0, 0.0};
  Interval y_support{0.0, 0.0};
  std::vector<double> x_knots;
  std::vector<double> y_knots;

  bool is_zero() const { return !fn; }
  cplx operator()(double x, double y) const {
    if (!fn || !x_support.contains(x) || !y_support.contains(y)) return 0.0;
    return fn(x, y);
  }
};

inline Slice2D zero_slice(double lambda) { return Slice2D{lambda, {}, {}, {}, {}, {}}; }

inline Slice2D slice(HFunction f, double lambda, const Box3& support, BreakFn2 tbreaks = {},
                     std::vector<double> x_knots = {}, std::vector<double> y_knots = {}, QuadSpec spec = {}) {
  if (lambda == 0.0) throw std::domain_error("slice: lambda must be nonzero");
  spec.abs_tol = std::min(spec.abs_tol, 1e-12);
  const Interval T = support[2];
  auto fn = [f = std::move(f), lambda, T, tbreaks = std::move(tbreaks), spec](double x, double y) {
    std::vector<double> tb;
    if (tbreaks) tb = tbreaks(x, y);
    return integrate_1d([&](double t) { return f({x, y, t}) * expi_pi(2.0 * lambda * t); }, T.lo, T.hi, spec, tb)
        .value;
  };
  return Slice2D{lambda, fn, support[0], support[1], std::move(x_knots), std::move(y_knots)};
}

// Slice of phi_n computed by t-quadrature of the spatial evaluator.
inline Slice2D spline_slice(const SplineModel& model, double lambda) {
  const int n = model.order();
  BreakFn2 tb;
  if (n == 1) tb = [](double, double) { return std::vector<double>{0.0, 1.0}; };
  if (n == 2) tb = [](double x, double y) { return phi2_t_breaks(x, y); };
  std::vector<double> xk, yk;
  for (int j = 1; j < n; ++j) {
    xk.push_back(2.0 * j);
    yk.push_back(j);
  }
  return slice([model](const HPoint& p) { return model(p); }, lambda, model.support(), tb, xk, yk);
}

// (1/sqrt2) e^{pi i lambda} sinc(lambda) on [0,2] x [0,1].
inline Slice2D phi1_slice(double lambda) {
  const cplx c = inv_sqrt2 * expi_pi(lambda) * sinc(lambda);
  return Slice2D{lambda, [c](double, double) { return c; }, Interval{0, 2}, Interval{0, 1}, {}, {}};
}

// Closed-form phi_2^lambda; at lambda = 0 this is the analytic limit.
inline Slice2D phi2_slice(double lambda) {
  const double s = sinc(lambda);
  const cplx pre = expi_pi(2.0 * lambda) * (s * s);
  auto fn = [lambda, pre](double x, double y) { return pre * phi2_profile(lambda, x, y); };
  return Slice2D{lambda, fn, Interval{0, 4}, Interval{0, 2}, {2.0}, {1.0}};
}

// g(x, y, t) = chi_[0,2](x) chi_[0,height](y) h(t): the slice is the constant hhat(-lambda).
inline Slice2D separable_slice(const std::function<cplx(double)>& h_hat, double lambda, double height = 1.0) {
  const cplx c = h_hat(-lambda);
  return Slice2D{lambda, [c](double, double) { return c; }, Interval{0, 2}, Interval{0, height}, {}, {}};
}

inline std::vector<double> pieces(Interval I, const std::vector<double>& knots) { return make_cuts(I.lo, I.hi, knots); }

inline double slice_norm_sq(const Slice2D& s, QuadSpec spec = {}) {
  if (s.is_zero()) return 0.0;
  spec.abs_tol = std::min(spec.abs_tol, 1e-13);
  spec.rel_tol = std::min(spec.rel_tol, 1e-12);
  auto f = [&](double x, double y) { return std::norm(s(x, y)); };
  return integrate_2d(f, s.x_support, s.y_support, spec, s.x_knots, [&](double) { return s.y_knots; }).value;
}

// ---------------------------------------------------------------------------
// Kernel K(xi, eta) = int f^lambda(x, eta - xi) e^{pi i lambda x (xi + eta)} dx.
// It depends on xi only through d = eta - xi (support and smoothness) and the
// oscillation in w = xi + eta.

struct Kernel2D {
  double lambda = 1.0;
  std::function<cplx(double, double)> fn;
  Interval d_support{0.0, 0.0};
  std::vector<double> d_knots;

  bool is_zero() const { return !fn; }
  cplx operator()(double xi, double eta) const {
    if (!fn || !d_support.contains(eta - xi)) return 0.0;
    return fn(xi, eta);
  }
};

inline Kernel2D kernel_from_slice(const Slice2D& s, QuadSpec spec = {}) {
  if (s.is_zero()) return Kernel2D{s.lambda, {}, {}, {}};
  spec.abs_tol = std::min(spec.abs_tol, 1e-12);
  auto fn = [s, spec](double xi, double eta) {
    const double d = eta - xi, w = xi + eta;
    return integrate_1d([&](double x) { return s(x, d) * expi_pi(s.lambda * x * w); }, s.x_support.lo,
                        s.x_support.hi, spec, s.x_knots)
        .value;
  };
  std::vector<double> dk = pieces(s.y_support, s.y_knots);
  return Kernel2D{s.lambda, fn, s.y_support, dk};
}

inline cplx kernel_phi1(double lambda, double xi, double eta) {
  if (lambda == 0.0) throw std::domain_error("kernel_phi1: lambda must be nonzero");
  const double d = eta - xi;
  if (d < 0.0 || d > 1.0) return 0.0;
  const double w = xi + eta;
  return std::numbers::sqrt2 * sinc(lambda) * sinc(lambda * w) * expi_pi(lambda * (1.0 + w));
}

inline Kernel2D kernel_phi1(double lambda) {
  if (lambda == 0.0) throw std::domain_error("kernel_phi1: lambda must be nonzero");
  return Kernel2D{lambda, [lambda](double xi, double eta) { return kernel_phi1(lambda, xi, eta); }, Interval{0, 1},
                  {0.0, 1.0}};
}

// K_n(xi, eta) = sqrt2 e^{pi i lambda} sinc(lambda) e^{2 pi i lambda eta}
//                int_0^1 e^{-pi i lambda y} sinc(lambda(2 eta - y)) K_{n-1}(xi, eta - y) dy
inline Kernel2D kernel_recursion(const Kernel2D& prev, double lambda, QuadSpec spec = {}) {
  if (lambda == 0.0) throw std::domain_error("kernel_recursion: lambda must be nonzero");
  if (prev.is_zero()) return Kernel2D{lambda, {}, {}, {}};
  spec.abs_tol = std::min(spec.abs_tol, 1e-12);
  const cplx pre = std::numbers::sqrt2 * sinc(lambda) * expi_pi(lambda);
  auto fn = [prev, lambda, pre, spec](double xi, double eta) {
    std::vector<double> yb;
    for (double dk : prev.d_knots) yb.push_back(eta - xi - dk);
    auto g = [&](double y) { return expi_pi(-lambda * y) * sinc(lambda * (2.0 * eta - y)) * prev(xi, eta - y); };
    return pre * expi_pi(2.0 * lambda * eta) * integrate_1d(g, 0.0, 1.0, spec, yb).value;
  };
  std::set<double> dk;
  for (double a : prev.d_knots)
    for (double b : {0.0, 1.0}) dk.insert(a + b);
  return Kernel2D{lambda, fn, Interval{prev.d_support.lo, prev.d_support.hi + 1.0},
                  std::vector<double>(dk.begin(), dk.end())};
}

// ---------------------------------------------------------------------------
// ||f^lambda||^2 against |lambda| int int |K|^2 dxi deta.
//
// In (d, w) coordinates dxi deta = dd dw / 2. For fixed d the kernel is the
// Fourier transform of x -> f^lambda(x, d), decaying like 1/w, so the w-range is
// truncated at W, 2W, 4W (W = N/|lambda|) and the three partial integrals are
// extrapolated.

struct WeylOptions {
  int N = 8;
  int order = 16;
  int d_panels = 2;
};

struct WeylCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double extrapolation_change = 0.0;
};

inline WeylCheck weyl_norm_check(const Slice2D& s, const WeylOptions& opt = {}) {
  WeylCheck out;
  if (s.is_zero()) return out;
  const double lam = std::abs(s.lambda);
  if (lam == 0.0) throw std::domain_error("weyl_norm_check: lambda must be nonzero");
  out.lhs = slice_norm_sq(s);

  const auto& gl = gauss_legendre(opt.order);
  auto nodes_on = [&](const std::vector<double>& cuts, auto panels_for, std::vector<double>& z, std::vector<double>& wt) {
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const int np = panels_for(cuts[i + 1] - cuts[i]);
      const double h = (cuts[i + 1] - cuts[i]) / np;
      for (int j = 0; j < np; ++j) {
        const double c = cuts[i] + (j + 0.5) * h;
        for (int q = 0; q < opt.order; ++q) {
          z.push_back(c + 0.5 * h * gl.nodes[q]);
          wt.push_back(0.5 * h * gl.weights[q]);
        }
      }
    }
  };

  const double W1 = opt.N / lam;
  const double xmax = std::max(std::abs(s.x_support.lo), std::abs(s.x_support.hi));
  const int per_W = std::max(1, static_cast<int>(std::ceil(W1 * lam * xmax)));
  const double wpanel = W1 / per_W;
  const double cycles = 2.0 * opt.N;  // oscillations per unit x at |w| = 4W

  std::vector<double> xs, wx, ds, wd;
  nodes_on(pieces(s.x_support, s.x_knots), [&](double len) { return static_cast<int>(std::ceil(cycles * len)) + 1; },
           xs, wx);
  nodes_on(pieces(s.y_support, s.y_knots), [&](double) { return opt.d_panels; }, ds, wd);

  const size_t nx = xs.size(), nd = ds.size();
  std::vector<cplx> F(nd * nx);
  for (size_t j = 0; j < nd; ++j)
    for (size_t i = 0; i < nx; ++i) F[j * nx + i] = s(xs[i], ds[j]) * wx[i];

  double level[3] = {0.0, 0.0, 0.0};
  std::vector<cplx> ex(nx);
  for (int side : {-1, 1})
    for (int p = 0; p < 4 * per_W; ++p) {
      const int lvl = p < per_W ? 0 : (p < 2 * per_W ? 1 : 2);
      double band = 0.0;
      for (int q = 0; q < opt.order; ++q) {
        const double w = side * (p + 0.5 + 0.5 * gl.nodes[q]) * wpanel;
        for (size_t i = 0; i < nx; ++i) ex[i] = expi_pi(s.lambda * xs[i] * w);
        double acc = 0.0;
        for (size_t j = 0; j < nd; ++j) {
          const cplx* row = &F[j * nx];
          cplx k = 0.0;
          for (size_t i = 0; i < nx; ++i) k += row[i] * ex[i];
          acc += wd[j] * std::norm(k);
        }
        band += 0.5 * wpanel * gl.weights[q] * acc;
      }
      level[lvl] += 0.5 * band;
    }
  const double P1 = level[0], P2 = P1 + level[1], P4 = P2 + level[2];
  const double R1 = 2.0 * P2 - P1, R2 = 2.0 * P4 - P2;
  const double Fx = (8.0 * R2 - R1) / 7.0;
  out.rhs = lam * Fx;
  out.extrapolation_change = lam * std::abs(Fx - R2);
  return out;
}

// ---------------------------------------------------------------------------
// Families r -> g^{lambda - r} used by the r-sums of the Gramian.

struct SliceFamily {
  std::string name;
  std::function<Slice2D(double)> at;  // slice at mu = lambda - r
  Decay decay;                        // decay in r of the per-slice squared norms
  bool separable = false;
  std::function<cplx(double)> h_hat;  // separable families only
};

inline SliceFamily phi1_family() {
  Decay d;
  d.power = 2.0;
  d.constant = 1.0 / (pi * pi);
  d.pure_power = true;
  return SliceFamily{"phi1", [](double mu) { return phi1_slice(mu); }, d, false, {}};
}

inline SliceFamily phi2_family() {
  Decay d;
  d.power = 4.0;
  d.constant = 8.0 / (9.0 * std::pow(pi, 4));
  return SliceFamily{"phi2", [](double mu) { return phi2_slice(mu); }, d, false, {}};
}

// Same slices; the r-decay of products of two slices is at least sixth order,
// with the constant estimated from the computed terms.
inline SliceFamily phi2_gram_family() {
  Decay d;
  d.power = 6.0;
  return SliceFamily{"phi2", [](double mu) { return phi2_slice(mu); }, d, false, {}};
}

inline SliceFamily separable_family(std::function<cplx(double)> h_hat, Decay decay, std::string name = "separable",
                                    double height = 1.0) {
  auto hh = h_hat;
  return SliceFamily{std::move(name), [hh, height](double mu) { return separable_slice(hh, mu, height); }, decay,
                     true, std::move(h_hat)};
}

// sum_r ||g^{lambda - r}||^2
inline RSum<double> tau_norm_sq(const SliceFamily& fam, double lambda, double tol = 1e-10) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("tau_norm_sq: lambda must lie in (0,1]");
  auto term = [&](int r) { return slice_norm_sq(fam.at(lambda - r)); };
  return sum_over_r(term, lambda, tol, fam.decay);
}

}  // namespace hspline
