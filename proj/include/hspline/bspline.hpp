#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hspline/quadrature.hpp"
#include "hspline/specfun.hpp"

namespace hspline {

// Cardinal B-spline B_n on R, supported on [0, n].
inline double classical_bspline_eval(int n, double x) {
  if (n < 1) throw std::invalid_argument("classical_bspline_eval: order must be positive");
  if (x < 0.0 || x > n) return 0.0;
  switch (n) {
    case 1:
      return x < 1.0 ? 1.0 : 0.0;
    case 2:
      return x <= 1.0 ? x : 2.0 - x;
    case 3:
      if (x <= 1.0) return 0.5 * x * x;
      if (x <= 2.0) return -x * x + 3.0 * x - 1.5;
      return 0.5 * (3.0 - x) * (3.0 - x);
    case 4: {
      if (x <= 1.0) return x * x * x / 6.0;
      if (x <= 2.0) return (-3.0 * x * x * x + 12.0 * x * x - 12.0 * x + 4.0) / 6.0;
      if (x <= 3.0) return (3.0 * x * x * x - 24.0 * x * x + 60.0 * x - 44.0) / 6.0;
      const double u = 4.0 - x;
      return u * u * u / 6.0;
    }
    default: {
      // B_n(x) = int_0^1 B_{n-1}(x - s) ds, exact on the polynomial pieces
      std::vector<double> breaks;
      for (int j = 0; j <= n; ++j) breaks.push_back(x - j);
      return integrate_fixed([&](double s) { return classical_bspline_eval(n - 1, x - s); }, 0.0, 1.0, 1,
                             (n + 1) / 2 + 1, breaks);
    }
  }
}

// Fourier transform ((1 - e^{-2 pi i w}) / (2 pi i w))^n = (e^{-pi i w} sinc w)^n.
inline cplx classical_bspline_hat(int n, double w) {
  const cplx one = expi_pi(-w) * sinc(w);
  cplx r = 1.0;
  for (int i = 0; i < n; ++i) r *= one;
  return r;
}

struct ClassicalBSpline {
  int n = 1;

  double operator()(double x) const { return classical_bspline_eval(n, x); }
  cplx hat(double w) const { return classical_bspline_hat(n, w); }
  Interval support() const { return {0.0, static_cast<double>(n)}; }
  // Knots 0..n; the function is polynomial between consecutive knots.
  std::vector<double> knots() const {
    std::vector<double> k;
    for (int j = 0; j <= n; ++j) k.push_back(j);
    return k;
  }
};

}  // namespace hspline
