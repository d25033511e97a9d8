#include <gtest/gtest.h>

#include <cmath>

#include "hspline/quadrature.hpp"

using namespace hspline;

TEST(GaussLegendre, WeightsAndSymmetry) {
  for (int n : {2, 4, 7, 16, 33}) {
    const auto& g = gauss_legendre(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      s += g.weights[i];
      EXPECT_NEAR(g.nodes[i], -g.nodes[n - 1 - i], 1e-15);
    }
    EXPECT_NEAR(s, 2.0, 1e-14);
  }
}

TEST(GaussLegendre, ExactForPolynomialsOfDegree2nMinus1) {
  for (int n : {2, 5, 8}) {
    for (int d = 0; d < 2 * n; ++d) {
      const double v = gl_panel([d](double x) { return std::pow(x, d); }, 0.0, 1.0, n);
      EXPECT_NEAR(v, 1.0 / (d + 1), 1e-14) << "n=" << n << " d=" << d;
    }
  }
}

TEST(Integrate1D, SmoothAndKinked) {
  EXPECT_NEAR(integrate_1d([](double x) { return std::exp(x); }, 0.0, 1.0).value, std::exp(1.0) - 1.0, 1e-12);
  auto kink = [](double x) { return std::abs(x - 0.3); };
  const double exact = 0.5 * (0.09 + 0.49);
  EXPECT_NEAR(integrate_fixed(kink, 0.0, 1.0, 1, 2, {0.3}), exact, 1e-15);
  QuadSpec spec;
  spec.abs_tol = 1e-10;
  spec.rel_tol = 0.0;
  const auto r = integrate_1d(kink, 0.0, 1.0, spec);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, exact, 1e-10);
  spec.max_depth = 40;
  const auto root = integrate_1d([](double x) { return std::sqrt(x); }, 0.0, 1.0, spec);
  EXPECT_TRUE(root.converged);
  EXPECT_NEAR(root.value, 2.0 / 3.0, 1e-10);
  EXPECT_EQ(integrate_1d([](double) { return 1.0; }, 1.0, 1.0).value, 0.0);
}

TEST(Integrate1D, ComplexIntegrand) {
  const cplx v = integrate_1d([](double x) { return expi_pi(2.0 * x); }, 0.0, 0.25).value;
  EXPECT_NEAR(v.real(), 1.0 / (2.0 * pi), 1e-13);
  EXPECT_NEAR(v.imag(), 1.0 / (2.0 * pi), 1e-13);
}

TEST(Integrate2D3D, Products) {
  const auto r2 = integrate_2d([](double x, double y) { return x * x * y; }, {0, 2}, {-1, 3});
  EXPECT_NEAR(r2.value, 8.0 / 3.0 * 4.0, 1e-11);
  const auto r3 = integrate_3d([](double x, double y, double t) { return std::cos(x) * y * std::exp(t); },
                               Box3{Interval{0, 1}, Interval{0, 2}, Interval{-1, 0}});
  EXPECT_TRUE(r3.converged);
  EXPECT_NEAR(r3.value, std::sin(1.0) * 2.0 * (1.0 - std::exp(-1.0)), 1e-8);
  // indicator of t < x + y, exact with the break
  const auto ind = integrate_3d([](double x, double y, double t) { return t < x + y ? 1.0 : 0.0; },
                                Box3{Interval{0, 1}, Interval{0, 1}, Interval{0, 2}}, QuadSpec::default_3d(), {}, {},
                                [](double x, double y) { return std::vector<double>{x + y}; });
  EXPECT_NEAR(ind.value, 1.0, 1e-12);
  const auto rn = integrate_nd<4>([](const std::array<double, 4>& p) { return p[0] * p[1] * p[2] * p[3]; },
                                  std::array<Interval, 4>{Interval{0, 1}, Interval{0, 1}, Interval{0, 1}, Interval{0, 2}});
  EXPECT_NEAR(rn.value, 2.0 / 8.0, 1e-10);
}

TEST(QuadSpec, Validation) {
  QuadSpec s;
  EXPECT_NO_THROW(s.validate());
  s.abs_tol = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = QuadSpec{};
  s.base_order = 2;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(RSum, InverseSquareAgainstCosecant) {
  for (double lam : {0.1, 0.3, 0.5, 0.77, 1.0 - 1e-3}) {
    const double exact = pi * pi / (sin_pi(lam) * sin_pi(lam));
    auto term = [lam](int r) { return 1.0 / ((r - lam) * (r - lam)); };
    Decay pure;
    pure.power = 2.0;
    pure.pure_power = true;
    const auto a = sum_over_r(term, lam, 1e-12, pure);
    EXPECT_NEAR(a.value, exact, 1e-10 * exact) << lam;
    EXPECT_LE(a.tail.bound, 1e-12);
    Decay bounded;
    bounded.power = 2.0;
    bounded.constant = 1.0;
    const auto b = sum_over_r(term, lam, 1e-4, bounded);
    EXPECT_NEAR(b.value, exact, 1e-4) << lam;
  }
}

TEST(RSum, InverseFourthPowerWithEstimatedConstant) {
  for (double lam : {0.25, 0.5, 0.9}) {
    const double c = 1.0 / sin_pi(lam), ct = cos_pi(lam) * c;
    const double exact = std::pow(pi, 4) * c * c * (2.0 * ct * ct + c * c) / 3.0;
    Decay d;
    d.power = 4.0;
    const auto s = sum_over_r([lam](int r) { return std::pow(r - lam, -4.0); }, lam, 1e-9, d);
    EXPECT_NEAR(s.value, exact, 1e-9 + 1e-12 * exact);
  }
}

TEST(RSum, CompactRadiusIsExact) {
  Decay d;
  d.compact_radius = 3;
  const auto s = sum_over_r([](int r) { return std::abs(r) <= 3 ? 1.0 + r * r : 0.0; }, 0.5, 1e-12, d);
  EXPECT_DOUBLE_EQ(s.value, 7.0 + 2.0 * (1 + 4 + 9));
  EXPECT_EQ(s.terms, 7);
  EXPECT_EQ(s.tail.bound, 0.0);
}

TEST(RSum, TailBoundDominatesTrueTail) {
  for (int R : {2, 5, 40}) {
    const double lam = 0.5, p = 3.0;
    double tail = 0.0;
    for (int r = R + 1; r < 200000; ++r) tail += std::pow(r - lam, -p) + std::pow(r + lam, -p);
    EXPECT_GE(power_tail_bound(1.0, p, R), tail);
  }
  EXPECT_TRUE(std::isinf(power_tail_bound(1.0, 2.0, 0)));
}

TEST(RSum, Failures) {
  Decay bad;
  bad.power = 1.0;
  EXPECT_THROW(sum_over_r([](int) { return 1.0; }, 0.5, 1e-6, bad), std::invalid_argument);
  Decay d;
  d.power = 2.0;
  d.pure_power = true;
  // terms decay like |r|^-2 but with an oscillating factor
  EXPECT_THROW(sum_over_r([](int r) { return (2.0 + std::cos(r)) / ((r - 0.5) * (r - 0.5)); }, 0.5, 1e-12, d),
               DecayError);
  Decay slow;
  slow.power = 2.0;
  EXPECT_THROW(sum_over_r([](int r) { return 1.0 / std::sqrt(std::abs(r - 0.5)); }, 0.5, 1e-12, slow, 256),
               DecayError);
}
