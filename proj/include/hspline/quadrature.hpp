#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "hspline/group.hpp"
#include "hspline/specfun.hpp"

namespace hspline {

struct QuadSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 12;
  int base_order = 16;

  void validate() const {
    if (!(abs_tol > 0) || rel_tol < 0 || base_order < 4 || max_depth < 0)
      throw std::invalid_argument("QuadSpec: invalid tolerances or order");
  }
  static QuadSpec default_3d() { return QuadSpec{1e-8, 1e-10, 12, 16}; }
};

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  bool converged = true;
  long evaluations = 0;
};

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

inline GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return g;
}

inline const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

// Fixed-order rule on one panel.
template <class F>
auto gl_panel(F&& f, double a, double b, int order) {
  const auto& g = gauss_legendre(order);
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  using T = std::decay_t<decltype(f(a))>;
  T s{};
  for (int i = 0; i < order; ++i) s += g.weights[i] * f(c + h * g.nodes[i]);
  return T(s * h);
}

// Sorted unique cut points strictly inside (a, b), with a and b at the ends.
inline std::vector<double> make_cuts(double a, double b, const std::vector<double>& breaks) {
  std::vector<double> cuts{a};
  std::vector<double> inner;
  for (double v : breaks)
    if (v > a && v < b) inner.push_back(v);
  std::sort(inner.begin(), inner.end());
  for (double v : inner)
    if (v - cuts.back() > 1e-14 * (1.0 + std::abs(v))) cuts.push_back(v);
  if (b - cuts.back() <= 1e-14 * (1.0 + std::abs(b)) && cuts.size() > 1) cuts.back() = b;
  else cuts.push_back(b);
  return cuts;
}

// Globally adaptive Gauss-Legendre with bisection; the panel error estimate
// compares one panel with its two halves.
template <class F>
auto integrate_1d(F&& f, double a, double b, const QuadSpec& spec = {},
                  const std::vector<double>& breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  QuadResult<T> res;
  if (!(b > a)) return res;
  struct Panel {
    double a, b;
    T fine;
    double err;
    int depth;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  const int n = spec.base_order;
  auto eval_panel = [&](double pa, double pb, int depth, const T& coarse) {
    const double m = 0.5 * (pa + pb);
    const T l = gl_panel(f, pa, m, n), r = gl_panel(f, m, pb, n);
    res.evaluations += 2 * n;
    const T fine = l + r;
    return Panel{pa, pb, fine, std::abs(fine - coarse), depth};
  };
  std::priority_queue<Panel> open;
  std::vector<Panel> done;
  const auto cuts = make_cuts(a, b, breaks);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const T coarse = gl_panel(f, cuts[i], cuts[i + 1], n);
    res.evaluations += n;
    open.push(eval_panel(cuts[i], cuts[i + 1], 0, coarse));
  }
  T value{};
  double err = 0.0;
  {
    auto q = open;
    while (!q.empty()) {
      value += q.top().fine;
      err += q.top().err;
      q.pop();
    }
  }
  while (!open.empty() && err > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
    Panel p = open.top();
    open.pop();
    if (p.depth >= spec.max_depth) {
      done.push_back(p);
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    const T cl = gl_panel(f, p.a, m, n), cr = gl_panel(f, m, p.b, n);
    res.evaluations += 2 * n;
    Panel pl = eval_panel(p.a, m, p.depth + 1, cl);
    Panel pr = eval_panel(m, p.b, p.depth + 1, cr);
    value += pl.fine + pr.fine - p.fine;
    err += pl.err + pr.err - p.err;
    open.push(pl);
    open.push(pr);
  }
  value = T{};
  err = 0.0;
  while (!open.empty()) {
    value += open.top().fine;
    err += open.top().err;
    open.pop();
  }
  for (const auto& p : done) {
    value += p.fine;
    err += p.err;
  }
  res.value = value;
  res.error = err;
  res.converged = err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
  return res;
}

// Composite fixed rule: `panels` equal panels on each piece between cuts.
template <class F>
auto integrate_fixed(F&& f, double a, double b, int panels, int order,
                     const std::vector<double>& breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  T s{};
  if (!(b > a)) return s;
  const auto cuts = make_cuts(a, b, breaks);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double h = (cuts[i + 1] - cuts[i]) / panels;
    for (int j = 0; j < panels; ++j) s += gl_panel(f, cuts[i] + j * h, cuts[i] + (j + 1) * h, order);
  }
  return s;
}

using BreakFn1 = std::function<std::vector<double>(double)>;
using BreakFn2 = std::function<std::vector<double>(double, double)>;

// Iterated adaptive quadrature over a rectangle; inner breakpoints may depend
// on the outer coordinate.
template <class F>
auto integrate_2d(F&& f, Interval X, Interval Y, const QuadSpec& spec = {},
                  const std::vector<double>& xbreaks = {}, const BreakFn1& ybreaks = {}) {
  using T = std::decay_t<decltype(f(0.0, 0.0))>;
  bool inner_ok = true;
  long evals = 0;
  QuadSpec inner = spec;
  inner.abs_tol = spec.abs_tol / std::max(1.0, 2.0 * X.width());
  auto outer = [&](double x) {
    std::vector<double> yb;
    if (ybreaks) yb = ybreaks(x);
    auto r = integrate_1d([&](double y) { return f(x, y); }, Y.lo, Y.hi, inner, yb);
    inner_ok = inner_ok && r.converged;
    evals += r.evaluations;
    return r.value;
  };
  QuadResult<T> res = integrate_1d(outer, X.lo, X.hi, spec, xbreaks);
  res.converged = res.converged && inner_ok;
  res.evaluations = evals;
  return res;
}

template <class F>
auto integrate_3d(F&& f, const Box3& box, const QuadSpec& spec = QuadSpec::default_3d(),
                  const std::vector<double>& xbreaks = {}, const BreakFn1& ybreaks = {},
                  const BreakFn2& tbreaks = {}) {
  using T = std::decay_t<decltype(f(0.0, 0.0, 0.0))>;
  bool inner_ok = true;
  long evals = 0;
  QuadSpec mid = spec;
  mid.abs_tol = spec.abs_tol / std::max(1.0, 2.0 * box[0].width());
  QuadSpec inner = mid;
  inner.abs_tol = mid.abs_tol / std::max(1.0, 2.0 * box[1].width());
  auto outer = [&](double x) {
    std::vector<double> yb;
    if (ybreaks) yb = ybreaks(x);
    auto middle = [&](double y) {
      std::vector<double> tb;
      if (tbreaks) tb = tbreaks(x, y);
      auto r = integrate_1d([&](double t) { return f(x, y, t); }, box[2].lo, box[2].hi, inner, tb);
      inner_ok = inner_ok && r.converged;
      evals += r.evaluations;
      return r.value;
    };
    auto r = integrate_1d(middle, box[1].lo, box[1].hi, mid, yb);
    inner_ok = inner_ok && r.converged;
    return r.value;
  };
  QuadResult<T> res = integrate_1d(outer, box[0].lo, box[0].hi, spec, xbreaks);
  res.converged = res.converged && inner_ok;
  res.evaluations = evals;
  return res;
}

namespace detail {
template <size_t N, size_t D, class F>
auto integrate_nd_rec(F& f, const std::array<Interval, N>& box, std::array<double, N>& pt,
                      const QuadSpec& spec, bool& ok) {
  auto g = [&](double v) {
    pt[D] = v;
    if constexpr (D + 1 == N) {
      return f(pt);
    } else {
      QuadSpec inner = spec;
      inner.abs_tol = spec.abs_tol / std::max(1.0, 2.0 * box[D].width());
      return integrate_nd_rec<N, D + 1>(f, box, pt, inner, ok);
    }
  };
  auto r = integrate_1d(g, box[D].lo, box[D].hi, spec);
  ok = ok && r.converged;
  return r.value;
}
}  // namespace detail

// Iterated adaptive Gauss-Legendre over a box in N dimensions.
template <size_t N, class F>
auto integrate_nd(F&& f, const std::array<Interval, N>& box, const QuadSpec& spec = {}) {
  using T = std::decay_t<decltype(f(std::array<double, N>{}))>;
  std::array<double, N> pt{};
  bool ok = true;
  QuadResult<T> res;
  res.value = detail::integrate_nd_rec<N, 0>(f, box, pt, spec, ok);
  res.converged = ok;
  return res;
}

// ---------------------------------------------------------------------------
// Sums over r in Z of terms decaying like |r - lambda|^{-p}.

struct TailBound {
  int radius = 0;
  double bound = 0.0;
};

template <class T>
struct RSum {
  T value{};
  TailBound tail;
  int terms = 0;
};

struct Decay {
  double power = 4.0;
  // |term(r)| <= constant / |r - lambda|^power; estimated from samples if absent.
  std::optional<double> constant;
  // term(r) == C / |r - lambda|^power exactly for large |r| (real, nonnegative);
  // enables the integral tail correction.
  bool pure_power = false;
  // term(r) == 0 for |r| > compact_radius: the sum is finite and exact.
  std::optional<int> compact_radius;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecayError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

// Certified two-sided tail bound for sum_{|r|>R} C/|r-lambda|^p, lambda in (0,1].
inline double power_tail_bound(double C, double p, int R) {
  if (R < 1) return INFINITY;
  const double Rd = R;
  return 2.0 * C * (std::pow(Rd, -p) + std::pow(Rd, 1.0 - p) / (p - 1.0));
}

// Order of summation: 0, -1, 1, -2, 2, ...
template <class F>
auto sum_over_r(F&& term, double lambda, double tol, const Decay& decay = {},
                int max_radius = 1 << 16) {
  using T = std::decay_t<decltype(term(0))>;
  if (!(decay.power > 1.0)) throw std::invalid_argument("sum_over_r: decay power must exceed 1");
  RSum<T> out;
  if (decay.compact_radius) {
    T acc = term(0);
    for (int R = 1; R <= *decay.compact_radius; ++R) {
      acc += term(-R);
      acc += term(R);
    }
    out.value = acc;
    out.terms = 2 * *decay.compact_radius + 1;
    out.tail = {*decay.compact_radius, 0.0};
    return out;
  }
  T acc = term(0);
  out.terms = 1;
  const double p = decay.power;
  std::vector<double> shell_c;  // |term(r)| |r-lambda|^p, per radius (max of +-r)
  shell_c.push_back(0.0);
  auto scaled = [&](int r, const T& v) { return std::abs(v) * std::pow(std::abs(r - lambda), p); };
  const int min_radius = decay.constant ? 1 : 4;
  for (int R = 1; R <= max_radius; ++R) {
    const T tm = term(-R), tp = term(R);
    acc += tm;
    acc += tp;
    out.terms += 2;
    shell_c.push_back(std::max(scaled(-R, tm), scaled(R, tp)));
    if (R < min_radius) continue;

    double C;
    if (decay.constant) {
      C = *decay.constant;
    } else {
      C = 0.0;
      for (int s = R / 2; s <= R; ++s) C = std::max(C, shell_c[s]);
      C *= 2.0;
    }
    if (decay.pure_power) {
      // Midpoint Euler-Maclaurin tail: integral from R + 1/2 plus the f' term;
      // the remainder is bounded by twice the next term.
      const double c_now = shell_c[R], c_half = shell_c[std::max(1, R / 2)];
      if (std::abs(c_now - c_half) > 1e-9 * std::max(c_now, 1e-300) && c_now > 0)
        throw DecayError("sum_over_r: terms are not a pure power law");
      const double Cp = c_now;
      const double a = R + 0.5 - lambda, b = R + 0.5 + lambda;
      const double rem = 2.0 * 2.0 * 7.0 / 5760.0 * p * (p + 1.0) * (p + 2.0) * Cp * std::pow(a, -p - 3.0);
      if (rem <= tol || R == max_radius) {
        if (rem > tol) throw DecayError("sum_over_r: tail not certifiable within max radius");
        const double corr = Cp / (p - 1.0) * (std::pow(a, 1.0 - p) + std::pow(b, 1.0 - p)) -
                            Cp * p / 24.0 * (std::pow(a, -p - 1.0) + std::pow(b, -p - 1.0));
        out.value = acc + T(corr);
        out.tail = {R, rem};
        return out;
      }
      continue;
    }
    const double bound = power_tail_bound(C, p, R);
    if (bound <= tol) {
      out.value = acc;
      out.tail = {R, bound};
      return out;
    }
  }
  throw DecayError("sum_over_r: failed to certify decay within max radius");
}

}  // namespace hspline
