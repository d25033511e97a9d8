#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hspline/bspline.hpp"
#include "hspline/group.hpp"
#include "hspline/quadrature.hpp"
#include "hspline/splines.hpp"

namespace hspline {

struct UnsolvableMoment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllConditioned : std::runtime_error {
  double condition;
  IllConditioned(const std::string& what, double cond) : std::runtime_error(what), condition(cond) {}
};

// amplitude * chi_[0,2](x) chi_[0,1](y) h(t), h polynomial of degree <= `degree` between knots
struct SeparableProfile {
  double amplitude = 1.0;
  std::function<double(double)> h;
  std::vector<double> knots;
  int degree = 0;
};

struct Generator {
  std::string name;
  HFunction fn;
  Box3 support{};
  BreakFn2 t_breaks;  // local coordinates
  std::vector<double> x_knots, y_knots;
  std::optional<SeparableProfile> separable;

  double operator()(const HPoint& p) const { return in_box(support, p) ? fn(p) : 0.0; }
};

inline Generator separable_generator(std::string name, SeparableProfile prof) {
  if (prof.knots.size() < 2) throw std::invalid_argument("separable_generator: need at least two knots");
  std::sort(prof.knots.begin(), prof.knots.end());
  const Interval T{prof.knots.front(), prof.knots.back()};
  Generator g;
  g.name = std::move(name);
  g.support = {Interval{0, 2}, Interval{0, 1}, T};
  g.fn = [prof](const HPoint& p) {
    if (p.x < 0 || p.x >= 2 || p.y < 0 || p.y >= 1) return 0.0;
    return prof.amplitude * prof.h(p.t);
  };
  g.t_breaks = [k = prof.knots](double, double) { return k; };
  g.separable = std::move(prof);
  return g;
}

inline Generator bspline_generator(int order) {
  ClassicalBSpline B{order};
  return separable_generator("B" + std::to_string(order), SeparableProfile{1.0, B, B.knots(), order - 1});
}

inline Generator phi1_generator() {
  return separable_generator("phi1", SeparableProfile{inv_sqrt2, [](double t) { return t >= 0 && t < 1 ? 1.0 : 0.0; },
                                                      {0.0, 1.0}, 0});
}

// Same function as phi1_generator, without the separable shortcut.
inline Generator phi1_generator_generic() {
  Generator g;
  g.name = "phi1";
  g.fn = [](const HPoint& p) { return p.x < 2 && p.y < 1 && p.t >= 0 && p.t < 1 ? inv_sqrt2 : 0.0; };
  g.support = FundamentalDomain::box();
  g.t_breaks = [](double, double) { return std::vector<double>{0.0, 1.0}; };
  return g;
}

inline Generator phi2_generator() {
  Generator g;
  g.name = "phi2";
  g.fn = phi2_direct;
  g.support = support_box(2);
  g.t_breaks = phi2_t_breaks;
  g.x_knots = {2.0};
  g.y_knots = {1.0};
  return g;
}

// ---------------------------------------------------------------------------
// Index windows

// {-(n-1) <= k, l <= 0, -M-n+1 < m < M+n}
inline std::vector<LatticeIndex> index_window(int n, double M) {
  if (n < 1 || !(M > 0)) throw std::invalid_argument("index_window: need n >= 1 and M > 0");
  std::vector<LatticeIndex> w;
  const int mlo = static_cast<int>(std::floor(-M - n + 1)) + 1;
  const int mhi = static_cast<int>(std::ceil(M + n)) - 1;
  for (int k = -(n - 1); k <= 0; ++k)
    for (int l = -(n - 1); l <= 0; ++l)
      for (int m = mlo; m <= mhi; ++m) w.push_back({k, l, m});
  return w;
}

// {-(n-1) <= k, l <= 0, -(n+1)(n+4)/2 + 1 <= m <= (n^2+3n-2)/2 - 1}
inline std::vector<LatticeIndex> index_window_general(int n) {
  if (n < 1) throw std::invalid_argument("index_window_general: need n >= 1");
  std::vector<LatticeIndex> w;
  const int mlo = -((n + 1) * (n + 4)) / 2 + 1;
  const int mhi = (n * n + 3 * n - 2) / 2 - 1;
  for (int k = -(n - 1); k <= 0; ++k)
    for (int l = -(n - 1); l <= 0; ++l)
      for (int m = mlo; m <= mhi; ++m) w.push_back({k, l, m});
  return w;
}

// Triples whose translate of `support` meets Q in positive measure (box test).
inline std::vector<LatticeIndex> overlap_window(const Box3& support) {
  const Box3 Q = FundamentalDomain::box();
  std::vector<LatticeIndex> w;
  const int k0 = static_cast<int>(std::floor((Q[0].lo - support[0].hi) / 2.0)) - 1;
  const int k1 = static_cast<int>(std::ceil((Q[0].hi - support[0].lo) / 2.0)) + 1;
  const int l0 = static_cast<int>(std::floor(Q[1].lo - support[1].hi)) - 1;
  const int l1 = static_cast<int>(std::ceil(Q[1].hi - support[1].lo)) + 1;
  for (int k = k0; k <= k1; ++k) {
    if (!(2.0 * k + support[0].lo < Q[0].hi && 2.0 * k + support[0].hi > Q[0].lo)) continue;
    for (int l = l0; l <= l1; ++l) {
      if (!(l + support[1].lo < Q[1].hi && l + support[1].hi > Q[1].lo)) continue;
      // local t = t - m + (2k y - l x)/2 over the corners of Q
      double smin = 1e300, smax = -1e300;
      for (double x : {Q[0].lo, Q[0].hi})
        for (double y : {Q[1].lo, Q[1].hi})
          for (double t : {Q[2].lo, Q[2].hi}) {
            const double s = t + 0.5 * (2.0 * k * y - l * x);
            smin = std::min(smin, s);
            smax = std::max(smax, s);
          }
      const int m0 = static_cast<int>(std::floor(smin - support[2].hi)) + 1;
      const int m1 = static_cast<int>(std::ceil(smax - support[2].lo)) - 1;
      for (int m = m0; m <= m1; ++m) w.push_back({k, l, m});
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// int_Q (L_ga a)(p) (L_gb b)(p) dp

namespace detail {

inline std::vector<double> global_t_breaks(const Generator& g, const LatticeIndex& gi, double x, double y) {
  std::vector<double> out;
  if (!g.t_breaks) return out;
  const double shift = gi.m - 0.5 * (2.0 * gi.k * y - gi.l * x);
  for (double b : g.t_breaks(x - 2.0 * gi.k, y - gi.l)) out.push_back(b + shift);
  return out;
}

inline double separable_inner_on_Q(const SeparableProfile& a, const LatticeIndex& ga, const SeparableProfile& b,
                                   const LatticeIndex& gb) {
  // The x and y indicators of a translate with (k, l) != (0, 0) vanish on Q up to a null set.
  if (ga.k != 0 || ga.l != 0 || gb.k != 0 || gb.l != 0) return 0.0;
  std::vector<double> breaks;
  for (double s : a.knots) breaks.push_back(s + ga.m);
  for (double s : b.knots) breaks.push_back(s + gb.m);
  const int order = (a.degree + b.degree) / 2 + 1;
  const double area = 2.0;
  return a.amplitude * b.amplitude * area *
         integrate_fixed([&](double t) { return a.h(t - ga.m) * b.h(t - gb.m); }, 0.0, 1.0, 1, std::max(order, 1),
                         breaks);
}

}  // namespace detail

inline double translate_inner_on_Q(const Generator& a, const LatticeIndex& ga, const Generator& b,
                                   const LatticeIndex& gb, QuadSpec spec = QuadSpec::default_3d()) {
  if (a.separable && b.separable) return detail::separable_inner_on_Q(*a.separable, ga, *b.separable, gb);
  const HPoint ia = group_inv(embed(ga)), ib = group_inv(embed(gb));
  auto f = [&](double x, double y, double t) {
    const HPoint p{x, y, t};
    return a(group_mul(ia, p)) * b(group_mul(ib, p));
  };
  std::vector<double> xb, yb;
  for (double v : a.x_knots) xb.push_back(v + 2.0 * ga.k);
  for (double v : b.x_knots) xb.push_back(v + 2.0 * gb.k);
  for (double v : a.y_knots) yb.push_back(v + ga.l);
  for (double v : b.y_knots) yb.push_back(v + gb.l);
  auto tb = [&](double x, double y) {
    auto out = detail::global_t_breaks(a, ga, x, y);
    auto more = detail::global_t_breaks(b, gb, x, y);
    out.insert(out.end(), more.begin(), more.end());
    return out;
  };
  auto r = integrate_3d(f, FundamentalDomain::box(), spec, xb, [&](double) { return yb; }, tb);
  if (!r.converged) throw ConvergenceError("translate_inner_on_Q: quadrature did not converge");
  return r.value;
}

// ---------------------------------------------------------------------------

struct MomentSystem {
  std::vector<LatticeIndex> window;
  Eigen::MatrixXd matrix;  // (i, j) = <L_{w_i} phi, (L_{w_j} phi) chi_Q>
  Eigen::VectorXd rhs;
  int pivot = -1;
};

inline int pivot_index(const std::vector<LatticeIndex>& window) {
  for (size_t i = 0; i < window.size(); ++i)
    if (window[i] == LatticeIndex{}) return static_cast<int>(i);
  throw std::invalid_argument("moment system: window must contain (0,0,0)");
}

inline MomentSystem assemble_moment_system(const Generator& phi, const std::vector<LatticeIndex>& window,
                                           QuadSpec spec = QuadSpec::default_3d()) {
  MomentSystem sys;
  sys.window = window;
  sys.pivot = pivot_index(window);
  const int N = static_cast<int>(window.size());
  sys.matrix = Eigen::MatrixXd::Zero(N, N);
  sys.rhs = Eigen::VectorXd::Zero(N);
  sys.rhs(sys.pivot) = 1.0;
  std::vector<std::future<void>> rows;
  for (int i = 0; i < N; ++i)
    rows.push_back(std::async(std::launch::async, [&, i] {
      for (int j = i; j < N; ++j) {
        const double v = translate_inner_on_Q(phi, window[i], phi, window[j], spec);
        sys.matrix(i, j) = v;
        sys.matrix(j, i) = v;
      }
    }));
  for (auto& r : rows) r.get();
  if (!sys.matrix.allFinite()) throw ConvergenceError("assemble_moment_system: non-finite entry");
  return sys;
}

struct SolveReport {
  int rank = 0;
  int augmented_rank = 0;
  double condition = 0.0;
  double residual = 0.0;
};

struct DualGenerator {
  std::vector<LatticeIndex> window;
  std::vector<double> d;
  Generator dual;  // [sum d_w L_w phi] chi_Q
  SolveReport report;

  double operator()(const HPoint& p) const { return dual(p); }
};

inline int numerical_rank(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

inline Generator make_dual_generator(const Generator& phi, const std::vector<LatticeIndex>& window,
                                     const std::vector<double>& d) {
  Generator g;
  g.name = phi.name + "~";
  g.support = FundamentalDomain::box();
  std::vector<HPoint> inv;
  for (const auto& w : window) inv.push_back(group_inv(embed(w)));
  g.fn = [phi, inv, d](const HPoint& p) {
    if (!FundamentalDomain::contains(p) || p.x >= 2 || p.y >= 1 || p.t >= 1) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < inv.size(); ++i)
      if (d[i] != 0.0) s += d[i] * phi(group_mul(inv[i], p));
    return s;
  };
  g.t_breaks = [phi, window](double x, double y) {
    std::vector<double> out{0.0, 1.0};
    for (const auto& w : window) {
      auto b = detail::global_t_breaks(phi, w, x, y);
      out.insert(out.end(), b.begin(), b.end());
    }
    return out;
  };
  for (const auto& w : window) {
    for (double v : phi.x_knots) g.x_knots.push_back(v + 2.0 * w.k);
    for (double v : phi.y_knots) g.y_knots.push_back(v + w.l);
  }
  if (phi.separable) {
    const SeparableProfile& sp = *phi.separable;
    std::vector<int> ms;
    std::vector<double> ds;
    for (size_t i = 0; i < window.size(); ++i)
      if (window[i].k == 0 && window[i].l == 0 && d[i] != 0.0) {
        ms.push_back(window[i].m);
        ds.push_back(d[i]);
      }
    std::set<double> knots{0.0, 1.0};
    for (int m : ms)
      for (double s : sp.knots)
        if (s + m > 0.0 && s + m < 1.0) knots.insert(s + m);
    SeparableProfile dp;
    dp.amplitude = sp.amplitude;
    dp.degree = sp.degree;
    dp.knots.assign(knots.begin(), knots.end());
    dp.h = [h = sp.h, ms, ds](double t) {
      if (t < 0.0 || t >= 1.0) return 0.0;
      double s = 0.0;
      for (size_t i = 0; i < ms.size(); ++i) s += ds[i] * h(t - ms[i]);
      return s;
    };
    g.separable = dp;
  }
  return g;
}

// Solves matrix * conj(d) = rhs; solvability is the rank comparison between the
// matrix and the matrix augmented by the right-hand side.
inline DualGenerator solve_dual(const MomentSystem& sys, const Generator& phi, double rank_tol = 1e-10,
                                double max_condition = 1e12) {
  const int N = static_cast<int>(sys.window.size());
  if (N == 0) throw std::invalid_argument("solve_dual: empty window");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd aug(N, N + 1);
  aug << sys.matrix, sys.rhs;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_aug(aug);
  SolveReport rep;
  rep.rank = numerical_rank(svd.singularValues(), rank_tol);
  rep.augmented_rank = numerical_rank(svd_aug.singularValues(), rank_tol);
  if (rep.rank == 0 || rep.augmented_rank > rep.rank)
    throw UnsolvableMoment("solve_dual: phi|_Q lies in the span of the other restricted translates");
  const auto& sv = svd.singularValues();
  rep.condition = sv(0) / sv(rep.rank - 1);
  if (rep.condition > max_condition) throw IllConditioned("solve_dual: condition number too large", rep.condition);
  svd.setThreshold(rank_tol);
  const Eigen::VectorXd x = svd.solve(sys.rhs);
  rep.residual = (sys.matrix * x - sys.rhs).norm();
  DualGenerator out;
  out.window = sys.window;
  out.d.assign(x.data(), x.data() + N);
  out.report = rep;
  out.dual = make_dual_generator(phi, out.window, out.d);
  return out;
}

inline DualGenerator dual_with_coefficients(const Generator& phi, const std::vector<LatticeIndex>& window,
                                            std::vector<double> d) {
  if (d.size() != window.size()) throw std::invalid_argument("dual_with_coefficients: size mismatch");
  DualGenerator out;
  out.window = window;
  out.d = std::move(d);
  out.dual = make_dual_generator(phi, out.window, out.d);
  return out;
}

// max over the window of |<L_w phi, dual> - delta_{w,0}|
inline double verify_biorthogonality(const Generator& phi, const DualGenerator& dual,
                                     const std::vector<LatticeIndex>& window,
                                     QuadSpec spec = QuadSpec::default_3d()) {
  double worst = 0.0;
  for (const auto& w : window) {
    const double v = translate_inner_on_Q(phi, w, dual.dual, LatticeIndex{}, spec);
    worst = std::max(worst, std::abs(v - (w == LatticeIndex{} ? 1.0 : 0.0)));
  }
  return worst;
}

// max over g != g' in the window of |<L_g dual, L_g' dual>|
inline double dual_orthogonality(const DualGenerator& dual, const std::vector<LatticeIndex>& window,
                                 QuadSpec spec = QuadSpec::default_3d()) {
  double worst = 0.0;
  for (const auto& g : window)
    for (const auto& h : window) {
      if (g == h) continue;
      const LatticeIndex rel = lattice_mul(lattice_inv(g), h);
      worst = std::max(worst, std::abs(translate_inner_on_Q(dual.dual, LatticeIndex{}, dual.dual, rel, spec)));
    }
  return worst;
}

// Finite combination sum c_g L_g phi.
struct Combination {
  std::map<LatticeIndex, double> coeffs;

  double operator()(const Generator& phi, const HPoint& p) const {
    double s = 0.0;
    for (const auto& [g, c] : coeffs) s += c * phi(group_mul(group_inv(embed(g)), p));
    return s;
  }
};

// c_g = <f, L_g dual> = sum_a c_a <L_{g^{-1} a} phi, dual>
inline Combination reconstruct(const Combination& f, const Generator& phi, const DualGenerator& dual,
                               QuadSpec spec = QuadSpec::default_3d(), double drop = 1e-14) {
  std::set<LatticeIndex> candidates;
  for (const auto& [a, c] : f.coeffs)
    for (const auto& w : dual.window) candidates.insert(lattice_mul(a, lattice_inv(w)));
  std::map<LatticeIndex, double> memo;
  auto inner = [&](const LatticeIndex& rel) {
    auto it = memo.find(rel);
    if (it != memo.end()) return it->second;
    const double v = translate_inner_on_Q(phi, rel, dual.dual, LatticeIndex{}, spec);
    memo[rel] = v;
    return v;
  };
  Combination out;
  for (const auto& g : candidates) {
    double s = 0.0;
    for (const auto& [a, c] : f.coeffs) s += c * inner(lattice_mul(lattice_inv(g), a));
    if (std::abs(s) > drop) out.coeffs[g] = s;
  }
  return out;
}

inline double coefficient_distance(const Combination& a, const Combination& b) {
  double worst = 0.0;
  for (const auto& [g, c] : a.coeffs) {
    auto it = b.coeffs.find(g);
    worst = std::max(worst, std::abs(c - (it == b.coeffs.end() ? 0.0 : it->second)));
  }
  for (const auto& [g, c] : b.coeffs)
    if (!a.coeffs.count(g)) worst = std::max(worst, std::abs(c));
  return worst;
}

}  // namespace hspline
