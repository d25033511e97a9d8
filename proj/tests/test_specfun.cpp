#include <gtest/gtest.h>

#include <numbers>

#include "hspline/bspline.hpp"
#include "hspline/specfun.hpp"

using namespace hspline;

TEST(Specfun, SinPiIsExactAtIntegers) {
  for (int k = -50; k <= 50; ++k) EXPECT_EQ(sin_pi(k), 0.0);
  EXPECT_DOUBLE_EQ(sin_pi(0.5), 1.0);
  EXPECT_DOUBLE_EQ(sin_pi(-0.5), -1.0);
  EXPECT_NEAR(cos_pi(1.0 / 3.0), 0.5, 1e-15);
  EXPECT_NEAR(sin_pi(1e6 + 0.25), std::sqrt(0.5), 1e-12);
}

TEST(Specfun, Sinc) {
  EXPECT_EQ(sinc(0.0), 1.0);
  EXPECT_EQ(sinc(3.0), 0.0);
  EXPECT_NEAR(sinc(0.5), 2.0 / pi, 1e-15);
  EXPECT_NEAR(sinc(1e-9), 1.0, 1e-16);
  EXPECT_NEAR(sinc(-1.5), -2.0 / (3.0 * pi), 1e-15);
}

TEST(Specfun, DigammaKnownValues) {
  const double gamma = 0.57721566490153286;
  EXPECT_NEAR(digamma(1.0), -gamma, 1e-14);
  EXPECT_NEAR(digamma(0.5), -gamma - 2.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(digamma(4.0), -gamma + 1.0 + 0.5 + 1.0 / 3.0, 1e-14);
  for (double z : {0.1, 0.73, 2.4, 17.0}) EXPECT_NEAR(digamma(z + 1.0) - digamma(z), 1.0 / z, 1e-13);
  EXPECT_THROW(digamma(0.0), std::domain_error);
}

TEST(Specfun, PolygammaKnownValues) {
  const double p4 = std::pow(pi, 4);
  EXPECT_NEAR(polygamma3(1.0), p4 / 15.0, 1e-12);
  EXPECT_NEAR(polygamma3(0.5), p4, 1e-11);
  for (double z : {0.3, 1.7, 9.0}) EXPECT_NEAR(polygamma3(z) - polygamma3(z + 1.0), 6.0 / std::pow(z, 4), 1e-10);
}

TEST(Specfun, PolygammaAgainstSeries) {
  // psi^(3)(z) = 6 sum_k (z + k)^-4, with the remainder integrated
  for (double z : {0.25, 1.0, 3.5}) {
    double s = 0.0;
    const int K = 2000;
    for (int k = 0; k < K; ++k) s += 6.0 / std::pow(z + k, 4);
    s += 2.0 / std::pow(z + K - 0.5, 3);
    EXPECT_NEAR(polygamma3(z), s, 1e-10 * s);
  }
}

TEST(BSpline, PartitionOfUnityAndIntegral) {
  for (int n = 1; n <= 5; ++n) {
    for (double x : {0.1, 0.37, 0.9}) {
      double s = 0.0;
      for (int k = -6; k <= 6; ++k) s += classical_bspline_eval(n, x + k);
      EXPECT_NEAR(s, 1.0, 1e-13) << "n=" << n;
    }
    const ClassicalBSpline B{n};
    EXPECT_NEAR(integrate_fixed(B, 0.0, n, 1, n + 1, B.knots()), 1.0, 1e-14);
  }
}

TEST(BSpline, ThirdOrderPieces) {
  EXPECT_DOUBLE_EQ(classical_bspline_eval(3, 0.5), 0.125);
  EXPECT_DOUBLE_EQ(classical_bspline_eval(3, 1.5), 0.75);
  EXPECT_DOUBLE_EQ(classical_bspline_eval(3, 2.5), 0.125);
  EXPECT_EQ(classical_bspline_eval(3, 3.5), 0.0);
}

TEST(BSpline, FourierTransformMatchesQuadrature) {
  for (int n : {1, 2, 3}) {
    const ClassicalBSpline B{n};
    for (double w : {0.0, 0.3, -1.7, 2.5}) {
      QuadSpec spec;
      spec.abs_tol = 1e-14;
      const cplx q = integrate_1d([&](double x) { return B(x) * expi_pi(-2.0 * w * x); }, 0.0, n, spec, B.knots())
                         .value;
      EXPECT_NEAR(std::abs(q - B.hat(w)), 0.0, 1e-13) << "n=" << n << " w=" << w;
    }
  }
}
