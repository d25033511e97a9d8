#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "hspline/fourier.hpp"
#include "hspline/group.hpp"
#include "hspline/quadrature.hpp"
#include "hspline/specfun.hpp"
#include "hspline/splines.hpp"

namespace hspline {

struct TwistedTranslation {
  double lambda = 1.0;
  double u = 0.0;
  double v = 0.0;
};

// e^{pi i lambda (v x - u y)} F(x - u, y - v)
inline Slice2D twisted_translate(const TwistedTranslation& tt, const Slice2D& F) {
  if (tt.lambda == 0.0) throw std::domain_error("twisted_translate: lambda must be nonzero");
  if (F.is_zero()) return F;
  Slice2D out = F;
  out.x_support = {F.x_support.lo + tt.u, F.x_support.hi + tt.u};
  out.y_support = {F.y_support.lo + tt.v, F.y_support.hi + tt.v};
  for (double& k : out.x_knots) k += tt.u;
  for (double& k : out.y_knots) k += tt.v;
  out.fn = [tt, F](double x, double y) {
    return expi_pi(tt.lambda * (tt.v * x - tt.u * y)) * F(x - tt.u, y - tt.v);
  };
  return out;
}

enum class InnerRule { adaptive, fixed };

// <T_{(2k,l)} g, g> = int int e^{pi i lambda (l x - 2k y)} g(x - 2k, y - l) conj(g(x, y)) dx dy
inline cplx twisted_inner(double lambda, int k, int l, const Slice2D& g, InnerRule rule = InnerRule::adaptive) {
  if (g.is_zero()) return 0.0;
  const double u = 2.0 * k, v = l;
  const Interval X{std::max(g.x_support.lo, g.x_support.lo + u), std::min(g.x_support.hi, g.x_support.hi + u)};
  const Interval Y{std::max(g.y_support.lo, g.y_support.lo + v), std::min(g.y_support.hi, g.y_support.hi + v)};
  if (!(X.hi > X.lo) || !(Y.hi > Y.lo)) return 0.0;
  std::vector<double> xk = g.x_knots, yk = g.y_knots;
  for (double a : g.x_knots) xk.push_back(a + u);
  for (double b : g.y_knots) yk.push_back(b + v);
  auto f = [&](double x, double y) {
    return expi_pi(lambda * (l * x - u * y)) * g(x - u, y - v) * std::conj(g(x, y));
  };
  if (rule == InnerRule::adaptive) {
    QuadSpec spec;
    spec.abs_tol = 1e-13;
    spec.rel_tol = 1e-12;
    return integrate_2d(f, X, Y, spec, xk, [&](double) { return yk; }).value;
  }
  // Fixed composite rule sized to the oscillation of the phase and of the slice;
  // far from lambda = 0 the terms are small and coarser panels suffice.
  const double a = std::abs(lambda);
  const double xspan = std::max(std::abs(g.x_support.lo), std::abs(g.x_support.hi));
  const double yspan = std::max(std::abs(g.y_support.lo), std::abs(g.y_support.hi));
  const double per_panel = a < 6.0 ? 1.5 : 3.0;
  const double cx = a * 0.5 * (yspan + std::abs(l)), cy = a * (0.5 * xspan + std::abs(k));
  auto panels = [per_panel](double cycles_per_unit, const std::vector<double>& cuts) {
    double longest = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) longest = std::max(longest, cuts[i + 1] - cuts[i]);
    return 1 + static_cast<int>(std::ceil(cycles_per_unit * longest / per_panel));
  };
  const int px = panels(cx, make_cuts(X.lo, X.hi, xk)), py = panels(cy, make_cuts(Y.lo, Y.hi, yk));
  return integrate_fixed(
      [&](double x) { return integrate_fixed([&](double y) { return f(x, y); }, Y.lo, Y.hi, py, 16, yk); }, X.lo,
      X.hi, px, 16, xk);
}

// ---------------------------------------------------------------------------

struct CoeffField {
  std::map<std::array<int, 2>, cplx> c;

  cplx at(int k, int l) const {
    auto it = c.find({k, l});
    return it == c.end() ? cplx{} : it->second;
  }
  double norm_sq() const {
    double s = 0.0;
    for (const auto& [key, v] : c) s += std::norm(v);
    return s;
  }
  CoeffField scaled(cplx a) const {
    CoeffField out = *this;
    for (auto& [key, v] : out.c) v *= a;
    return out;
  }

  // Uniform complex entries on [-radius, radius]^2.
  static CoeffField random(int radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    CoeffField f;
    for (int k = -radius; k <= radius; ++k)
      for (int l = -radius; l <= radius; ++l) f.c[{k, l}] = cplx(U(rng), U(rng));
    return f;
  }
};

// S(dk, dl)(lambda) = sum_r <T^{lambda-r}_{(2dk, dl)} g^{lambda-r}, g^{lambda-r}>
inline RSum<cplx> twisted_sum(const SliceFamily& fam, double lambda, int dk, int dl, double tol = 1e-10,
                              InnerRule rule = InnerRule::fixed) {
  auto term = [&](int r) {
    const double mu = lambda - r;
    return twisted_inner(mu, dk, dl, fam.at(mu), rule);
  };
  return sum_over_r(term, lambda, tol, fam.decay);
}

// Entry ((k', l'), (k, l)) of the Gramian: the coefficient of c_{k,l} conj(c_{k',l'})
// in sum_r e^{2 pi i (lambda - r)(l k' - k l')} <T^{lambda-r}_{(2(k-k'), l-l')} g, g>.
inline cplx gram_phase(double lambda, int k, int l, int kp, int lp) {
  return expi_pi(2.0 * lambda * (l * kp - k * lp));
}

class GramCache {
 public:
  GramCache(SliceFamily fam, double lambda, double tol = 1e-10, InnerRule rule = InnerRule::fixed)
      : fam_(std::move(fam)), lambda_(lambda), tol_(tol), rule_(rule) {}

  cplx S(int dk, int dl) {
    auto key = std::array<int, 2>{dk, dl};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const cplx v = twisted_sum(fam_, lambda_, dk, dl, tol_, rule_).value;
    cache_[key] = v;
    return v;
  }
  double lambda() const { return lambda_; }

 private:
  SliceFamily fam_;
  double lambda_;
  double tol_;
  InnerRule rule_;
  std::map<std::array<int, 2>, cplx> cache_;
};

// <G(lambda) c, c>; the real part is returned, the imaginary residue through *imag.
inline double gramian_form(double lambda, const CoeffField& coeffs, const SliceFamily& fam, double tol = 1e-10,
                           double* imag = nullptr) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("gramian_form: lambda must lie in (0,1]");
  GramCache cache(fam, lambda, tol);
  cplx total = 0.0;
  for (const auto& [a, ca] : coeffs.c)
    for (const auto& [b, cb] : coeffs.c) {
      if (ca == cplx{} || cb == cplx{}) continue;
      const int k = a[0], l = a[1], kp = b[0], lp = b[1];
      const cplx s = cache.S(k - kp, l - lp);
      if (s == cplx{}) continue;
      total += ca * std::conj(cb) * gram_phase(lambda, k, l, kp, lp) * s;
    }
  if (imag) *imag = total.imag();
  return total.real();
}

struct GramianWindow {
  double lambda = 1.0;
  std::vector<std::array<int, 2>> window;
  Eigen::MatrixXcd entries;

  double hermitian_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double max_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }
};

inline std::vector<std::array<int, 2>> square_window(int radius) {
  std::vector<std::array<int, 2>> w;
  for (int k = -radius; k <= radius; ++k)
    for (int l = -radius; l <= radius; ++l) w.push_back({k, l});
  return w;
}

inline GramianWindow gramian_window(double lambda, const std::vector<std::array<int, 2>>& window,
                                    const SliceFamily& fam, double tol = 1e-10) {
  if (window.size() > 15 * 15) throw std::invalid_argument("gramian_window: window too large");
  GramCache cache(fam, lambda, tol);
  GramianWindow G{lambda, window, Eigen::MatrixXcd::Zero(window.size(), window.size())};
  for (size_t i = 0; i < window.size(); ++i)
    for (size_t j = 0; j < window.size(); ++j) {
      const int kp = window[i][0], lp = window[i][1], k = window[j][0], l = window[j][1];
      G.entries(i, j) = gram_phase(lambda, k, l, kp, lp) * cache.S(k - kp, l - lp);
    }
  return G;
}

// ---------------------------------------------------------------------------
// Separable generators chi_[0,2](x) chi_[0,1](y) h(t).

struct SeparableBounds {
  double A = 0.0;
  double B = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// sum_r |hhat(-(lambda - r))|^2
inline double separable_symbol(const std::function<cplx(double)>& h_hat, double lambda, const Decay& decay,
                               double tol = 1e-12) {
  auto term = [&](int r) { return std::norm(h_hat(-(lambda - r))); };
  return sum_over_r(term, lambda, tol, decay).value;
}

inline SeparableBounds riesz_bounds_separable(const std::function<cplx(double)>& h_hat, const Decay& decay,
                                              double tol = 1e-12, int grid = 101) {
  // Close to a zero of hhat the rounding of lambda - r breaks the exact power law; the
  // plain certified tail still applies there.
  auto S = [&](double lam) {
    try {
      return separable_symbol(h_hat, lam, decay, tol);
    } catch (const DecayError&) {
      if (!decay.pure_power) throw;
      Decay plain = decay;
      plain.pure_power = false;
      return separable_symbol(h_hat, lam, plain, tol);
    }
  };
  std::vector<double> lams, vals;
  for (int i = 1; i <= grid; ++i) {
    lams.push_back(static_cast<double>(i) / grid);
    vals.push_back(S(lams.back()));
  }
  auto refine = [&](size_t idx, double sign) {
    double a = idx == 0 ? lams[0] * 0.5 : lams[idx - 1];
    double b = idx + 1 == lams.size() ? 1.0 : lams[idx + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sign * S(c), fd = sign * S(d);
    for (int it = 0; it < 40; ++it) {
      if (fc < fd) {
        b = d, d = c, fd = fc;
        c = b - g * (b - a);
        fc = sign * S(c);
      } else {
        a = c, c = d, fc = fd;
        d = a + g * (b - a);
        fd = sign * S(d);
      }
    }
    double best = sign * vals[idx], arg = lams[idx];
    if (fc < best) best = fc, arg = c;
    if (fd < best) best = fd, arg = d;
    return std::pair{sign * best, arg};
  };
  const size_t imin = std::min_element(vals.begin(), vals.end()) - vals.begin();
  const size_t imax = std::max_element(vals.begin(), vals.end()) - vals.begin();
  auto [smin, amin] = refine(imin, 1.0);
  auto [smax, amax] = refine(imax, -1.0);
  return SeparableBounds{2.0 * smin, 2.0 * smax, amin, amax};
}

// ---------------------------------------------------------------------------
// hhat = chi_[0,p] on a generator of height 2: p - A_p(lambda) is the lower form.

inline double A_p(int p, double lambda) {
  if (p < 1) throw std::invalid_argument("A_p: p must be positive");
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("A_p: lambda must lie in [0,1]");
  if (lambda == 0.0) return 0.0;
  const double om = 1.0 - lambda;
  return 2.0 * sinc(om) * (1.0 + om * (digamma(p - lambda + 1.0) - digamma(2.0 - lambda)));
}

inline double A_p_direct(int p, double lambda) {
  cplx s = 0.0;
  for (int r = 1; r <= p; ++r) s += 2.0 * expi_pi(lambda - r) * sinc(lambda - r);
  return std::abs(s);
}

struct PsiMin {
  double lambda0 = 0.0;
  double psi = 0.0;
  double psi_second = 0.0;
};

// Psi(lambda) = 3 - A_3(lambda): root of Psi' by bisection, Psi'' by second differences.
inline PsiMin psi_minimize(double lo = 0.5, double hi = 0.95) {
  auto psi = [](double x) { return 3.0 - A_p(3, x); };
  const double h1 = 1e-5, h2 = 1e-4;
  auto dpsi = [&](double x) { return (psi(x + h1) - psi(x - h1)) / (2.0 * h1); };
  double a = lo, b = hi, fa = dpsi(a), fb = dpsi(b);
  if (fa * fb > 0.0) throw std::runtime_error("psi_minimize: bracket does not contain a critical point");
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    const double m = 0.5 * (a + b), fm = dpsi(m);
    if ((fm < 0.0) == (fa < 0.0)) a = m, fa = fm;
    else b = m;
  }
  const double x = 0.5 * (a + b);
  return PsiMin{x, psi(x), (psi(x + h2) - 2.0 * psi(x) + psi(x - h2)) / (h2 * h2)};
}

// (p + 1 - A_{p+1}) - (p - A_p)
inline double monotone_p_check(int p, double lambda) {
  if (p < 3) throw std::invalid_argument("monotone_p_check: p must be at least 3");
  return (p + 1.0 - A_p(p + 1, lambda)) - (p - A_p(p, lambda));
}

inline double monotone_p_identity(int p, double lambda) {
  const double om = 1.0 - lambda;
  return 1.0 - 2.0 * om * sinc(om) / (p + 1.0 - lambda);
}

// ---------------------------------------------------------------------------
// The phi_2 Gramian. With a = lambda - r each I_j is sinc^4(a) times a double
// integral of products of the slice profile R(a, ., .): the printed integrands
// after rewriting the cosine differences as sine products.

struct IOptions {
  bool printed_i7 = false;  // use the I_7 integrand exactly as printed
  int order = 16;
};

namespace detail {
// Second I_7 factor as printed, divided by pi^2 a^2 (x+2)(y-1):
// (cos(pi a x s) - cos(pi a s)) / (pi^2 a^2 (x+2) s), s = y - 1.
inline double i7_printed_factor(double a, double x, double y) {
  const double s = y - 1.0;
  return s * (1.0 + x) * (1.0 - x) / (2.0 * (x + 2.0)) * sinc(0.5 * a * s * (1.0 + x)) * sinc(0.5 * a * s * (1.0 - x));
}
}  // namespace detail

inline cplx I_profile(int j, double a, const IOptions& opt = {}) {
  const double s = sinc(a);
  const double pre = s * s * s * s;
  const int pu = 1 + static_cast<int>(std::ceil(std::abs(a)));
  auto R = [a](double x, double y) { return phi2_profile(a, x, y); };
  auto dbl = [&](auto&& f, Interval X, Interval Y, std::vector<double> xk, std::vector<double> yk) {
    const int px = std::max(1, static_cast<int>(std::ceil(pu * X.width() / std::max<size_t>(1, xk.size() + 1))));
    const int py = std::max(1, static_cast<int>(std::ceil(pu * Y.width() / std::max<size_t>(1, yk.size() + 1))));
    return integrate_fixed(
        [&](double x) {
          return integrate_fixed([&](double y) -> cplx { return f(x, y); }, Y.lo, Y.hi, py, opt.order, yk);
        },
        X.lo, X.hi, px, opt.order, xk);
  };
  switch (j) {
    case 1:
      return pre * dbl([&](double x, double y) { return expi_pi(a * (x - 2.0 * y)) * R(x, y) * R(x + 2.0, y + 1.0); },
                       {0, 2}, {0, 1}, {}, {});
    case 3:
      return pre * dbl([&](double x, double y) { return expi_pi(-2.0 * a * y) * R(x, y) * R(x + 2.0, y); }, {0, 2},
                       {0, 2}, {}, {1.0});
    case 5:
      return pre * dbl([&](double x, double y) { return expi_pi(a * x) * R(x, y) * R(x, y + 1.0); }, {0, 4}, {0, 1},
                       {2.0}, {});
    case 7:
      if (opt.printed_i7)
        return pre * dbl(
                         [&](double x, double y) {
                           return expi_pi(-a * (x + 2.0 * y)) * R(x, y) * detail::i7_printed_factor(a, x, y);
                         },
                         {0, 2}, {1, 2}, {}, {});
      return pre * dbl([&](double x, double y) { return expi_pi(-a * (x + 2.0 * y)) * R(x, y) * R(x + 2.0, y - 1.0); },
                       {0, 2}, {1, 2}, {}, {});
    case 9:
      return pre * dbl([&](double x, double y) -> cplx { return R(x, y) * R(x, y); }, {0, 4}, {0, 2}, {2.0}, {1.0});
    default:
      throw std::invalid_argument("I_integral: j must be 1, 3, 5, 7 or 9");
  }
}

inline cplx I_integral(int j, int r, double lambda, const IOptions& opt = {}) { return I_profile(j, lambda - r, opt); }

// Lattice offset (k, l) of the twisted inner product that I_j equals.
inline std::array<int, 2> I_offset(int j) {
  switch (j) {
    case 1:
      return {1, 1};
    case 3:
      return {1, 0};
    case 5:
      return {0, 1};
    case 7:
      return {1, -1};
    case 9:
      return {0, 0};
    default:
      throw std::invalid_argument("I_offset: j must be 1, 3, 5, 7 or 9");
  }
}

inline Decay phi2_r_decay() {
  Decay d;
  d.power = 6.0;
  return d;
}

inline RSum<cplx> I_sum(int j, double lambda, double tol = 1e-10, const IOptions& opt = {}) {
  return sum_over_r([&](int r) { return I_integral(j, r, lambda, opt); }, lambda, tol, phi2_r_decay());
}

// sum_r |I_{j,r,lambda}|
inline double I_abs_sum(int j, double lambda, double tol = 1e-10, const IOptions& opt = {}) {
  return sum_over_r([&](int r) { return std::abs(I_integral(j, r, lambda, opt)); }, lambda, tol, phi2_r_decay())
      .value;
}

// Closed-form majorant of sum_r |I_{1,r,lambda}| as a function of lambda.
inline double I1_abs_majorant(double lambda) {
  const double a = sinc(lambda), b = sinc(1.0 - lambda), s = sin_pi(lambda);
  return (a * a * a * a + b * b * b * b +
          s * s * s * s * (polygamma3(2.0 - lambda) + polygamma3(lambda + 1.0)) / (6.0 * std::pow(pi, 4))) /
         18.0;
}

struct Phi2GramTerms {
  std::array<cplx, 10> M{};  // M[1] .. M[9]
  std::array<cplx, 10> I{};  // sum_r I_{j,r,lambda} for j = 1, 3, 5, 7, 9
  double value = 0.0;
  double imag = 0.0;
};

// The lambda-dependent part of the phi_2 form: sum_r I_j for j = 1, 3, 5, 7, 9 and
// the twisted sums at the reversed offsets, computed independently of the I_j.
struct Phi2GramSums {
  double lambda = 1.0;
  std::array<cplx, 10> I{};
  std::array<cplx, 10> S{};  // S[2], S[4], S[6], S[8]
};

inline Phi2GramSums phi2_gram_sums(double lambda, double tol = 1e-10) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("phi2_gram_sums: lambda must lie in (0,1]");
  Phi2GramSums out;
  out.lambda = lambda;
  for (int j : {1, 3, 5, 7, 9}) out.I[j] = I_sum(j, lambda, tol).value;
  const SliceFamily fam = phi2_gram_family();
  for (int j : {1, 3, 5, 7}) {
    const auto o = I_offset(j);
    out.S[j + 1] = twisted_sum(fam, lambda, -o[0], -o[1], tol).value;
  }
  return out;
}

// Sum_{j=1}^9 M_j with the printed phases.
inline Phi2GramTerms phi2_gram_form(const Phi2GramSums& sums, const CoeffField& coeffs) {
  const double lambda = sums.lambda;
  Phi2GramTerms out;
  out.I = sums.I;
  auto c = [&](int k, int l) { return coeffs.at(k, l); };
  for (const auto& [key, ckl] : coeffs.c) {
    const int k = key[0], l = key[1];
    out.M[1] += ckl * std::conj(c(k - 1, l - 1)) * expi_pi(2.0 * lambda * (k - l)) * out.I[1];
    out.M[3] += ckl * std::conj(c(k - 1, l)) * expi_pi(-2.0 * lambda * l) * out.I[3];
    out.M[5] += ckl * std::conj(c(k, l - 1)) * expi_pi(2.0 * lambda * k) * out.I[5];
    out.M[7] += ckl * std::conj(c(k - 1, l + 1)) * expi_pi(-2.0 * lambda * (k + l)) * out.I[7];
    out.M[9] += std::norm(ckl) * out.I[9];
    // reversed offsets: (k', l') = (k+1, l+1), (k+1, l), (k, l+1), (k+1, l-1)
    out.M[2] += ckl * std::conj(c(k + 1, l + 1)) * gram_phase(lambda, k, l, k + 1, l + 1) * sums.S[2];
    out.M[4] += ckl * std::conj(c(k + 1, l)) * gram_phase(lambda, k, l, k + 1, l) * sums.S[4];
    out.M[6] += ckl * std::conj(c(k, l + 1)) * gram_phase(lambda, k, l, k, l + 1) * sums.S[6];
    out.M[8] += ckl * std::conj(c(k + 1, l - 1)) * gram_phase(lambda, k, l, k + 1, l - 1) * sums.S[8];
  }
  cplx total = 0.0;
  for (int j = 1; j <= 9; ++j) total += out.M[j];
  out.value = total.real();
  out.imag = total.imag();
  return out;
}

inline Phi2GramTerms phi2_gram_form(double lambda, const CoeffField& coeffs, double tol = 1e-10) {
  return phi2_gram_form(phi2_gram_sums(lambda, tol), coeffs);
}

// max over j = 1, 3, 5, 7 of |M_{j+1} - conj(M_j)|
inline double m_conjugacy_defect(const Phi2GramTerms& t) {
  double worst = 0.0;
  for (int j : {1, 3, 5, 7}) worst = std::max(worst, std::abs(t.M[j + 1] - std::conj(t.M[j])));
  return worst;
}

struct UpperBoundTerms {
  double b1, b3, b5, b7, b9, total;
};

inline UpperBoundTerms upper_bound_terms_phi2() {
  const double p4 = std::pow(pi, 4), q = p4 - 96.0;
  const double l98 = std::log(9.0 / 8.0), l2 = std::log(2.0), l3 = std::log(3.0);
  UpperBoundTerms t{};
  t.b1 = 2.0 / 27.0 - 16.0 / (9.0 * p4);
  t.b3 = 1.0 / 9.0 + 0.5 * l98 + q * (2.0 + 9.0 * l98) / (54.0 * p4);
  const double c5 = 7.0 + 54.0 * l2 - 36.0 * l3;
  t.b5 = c5 / 36.0 + q * c5 / (108.0 * p4);
  t.b7 = 1.25 * l98 + 5.0 * q * l98 / (12.0 * p4);
  const double c9 = 299.0 - 288.0 * l2;
  t.b9 = c9 / 144.0 + q * c9 / (432.0 * p4);
  t.total = t.b9 + 2.0 * (t.b1 + t.b3 + t.b5 + t.b7);
  return t;
}

inline double upper_bound_phi2() { return upper_bound_terms_phi2().total; }

struct LowerEstimates {
  std::array<double, 5> min_abs{};   // j = 1, 3, 5, 7, 9
  std::array<double, 5> argmin{};
  std::array<double, 5> max_imag{};  // largest |Im sum_r I_j| seen on the grid
  int grid_size = 0;
};

inline constexpr std::array<int, 5> I_indices{1, 3, 5, 7, 9};

inline LowerEstimates lower_estimates_phi2(int grid_size = 101, double tol = 1e-9, const IOptions& opt = {}) {
  if (grid_size < 11) throw std::invalid_argument("lower_estimates_phi2: grid_size must be at least 11");
  LowerEstimates out;
  out.grid_size = grid_size;
  out.min_abs.fill(INFINITY);
  for (int i = 1; i <= grid_size; ++i) {
    const double lam = static_cast<double>(i) / grid_size;
    for (size_t q = 0; q < 5; ++q) {
      const cplx s = I_sum(I_indices[q], lam, tol, opt).value;
      if (std::abs(s) < out.min_abs[q]) out.min_abs[q] = std::abs(s), out.argmin[q] = lam;
      out.max_imag[q] = std::max(out.max_imag[q], std::abs(s.imag()));
    }
  }
  return out;
}

// B_1 = 1 and B_{n+1} = 2 B_n.
inline double upper_riesz_bound(int n) {
  if (n < 1) throw std::invalid_argument("upper_riesz_bound: n must be positive");
  return std::ldexp(1.0, n - 1);
}

// ---------------------------------------------------------------------------

// <L_g phi_1, L_h phi_1> by 3-D quadrature with all faces as breakpoints.
inline double phi1_translate_inner(const LatticeIndex& g, const LatticeIndex& h) {
  if (g.k != h.k || g.l != h.l) return 0.0;
  const HPoint gi = group_inv(embed(g)), hi = group_inv(embed(h));
  const Box3 box{Interval{2.0 * g.k, 2.0 * g.k + 2.0}, Interval{1.0 * g.l, g.l + 1.0},
                 Interval{std::min(g.m, h.m) - 4.0 - std::abs(g.k) - std::abs(g.l),
                          std::max(g.m, h.m) + 5.0 + std::abs(g.k) + std::abs(g.l)}};
  auto f = [&](double x, double y, double t) {
    const HPoint p{x, y, t};
    return phi1_eval(group_mul(gi, p)) * phi1_eval(group_mul(hi, p));
  };
  auto tb = [&](double x, double y) {
    std::vector<double> out;
    for (const HPoint& e : {embed(g), embed(h)}) {
      const double c = 0.5 * (e.x * y - e.y * x);  // t-offset of the translate over (x, y)
      out.push_back(e.t - c);
      out.push_back(e.t - c + 1.0);
    }
    return out;
  };
  // The integrand is piecewise constant in t with the breaks above, so a one-point rule per piece is exact.
  auto over_t = [&](double x, double y) {
    return integrate_fixed([&](double t) { return f(x, y, t); }, box[2].lo, box[2].hi, 1, 2, tb(x, y));
  };
  return integrate_fixed(
      [&](double x) {
        return integrate_fixed([&](double y) { return over_t(x, y); }, box[1].lo, box[1].hi, 2, 4);
      },
      box[0].lo, box[0].hi, 2, 4);
}

inline double orthonormality_check_phi1(int W) {
  if (W < 1) throw std::invalid_argument("orthonormality_check_phi1: window must be positive");
  std::vector<LatticeIndex> idx;
  for (int k = -W; k <= W; ++k)
    for (int l = -W; l <= W; ++l)
      for (int m = -W; m <= W; ++m) idx.push_back({k, l, m});
  double worst = 0.0;
  for (const auto& g : idx)
    for (const auto& h : idx) worst = std::max(worst, std::abs(phi1_translate_inner(g, h) - (g == h ? 1.0 : 0.0)));
  return worst;
}

}  // namespace hspline
