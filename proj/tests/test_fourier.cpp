#include <gtest/gtest.h>

#include "hspline/bspline.hpp"
#include "hspline/fourier.hpp"

using namespace hspline;

TEST(Slices, Phi1ClosedFormMatchesNumericalTransform) {
  for (double lam : {0.3, -1.25, 2.0, 3.7}) {
    const Slice2D num = slice(phi1_eval, lam, support_box(1), [](double, double) { return std::vector<double>{0.0, 1.0}; });
    const Slice2D cf = phi1_slice(lam);
    for (auto [x, y] : {std::pair{0.5, 0.5}, {1.9, 0.1}})
      EXPECT_NEAR(std::abs(num(x, y) - cf(x, y)), 0.0, 1e-12) << lam;
    EXPECT_EQ(cf(2.5, 0.5), cplx(0.0));
  }
  EXPECT_THROW(slice(phi1_eval, 0.0, support_box(1)), std::domain_error);
}

TEST(Slices, Phi2NormAgainstFixedRuleOracle) {
  for (double mu : {0.4, -1.3, 2.6}) {
    // |int phi2(x, y, t) e^{2 pi i mu t} dt|^2 integrated by composite Gauss rules on the four cells
    auto slice_at = [mu](double x, double y) {
      return integrate_fixed([&](double t) { return phi2_direct({x, y, t}) * expi_pi(2.0 * mu * t); }, -2.0, 4.0, 4, 8,
                             phi2_t_breaks(x, y));
    };
    const double oracle = integrate_fixed(
        [&](double x) {
          return integrate_fixed([&](double y) { return std::norm(slice_at(x, y)); }, 0.0, 2.0, 3, 8, {1.0});
        },
        0.0, 4.0, 3, 8, {2.0});
    EXPECT_NEAR(slice_norm_sq(phi2_slice(mu)), oracle, 1e-8 + 1e-6 * oracle) << mu;
  }
}

TEST(Slices, TauNormSums) {
  // phi1: sum_r sinc^2(lambda - r) = 1
  for (double lam : {0.1, 0.5, 0.93, 1.0}) EXPECT_NEAR(tau_norm_sq(phi1_family(), lam).value, 1.0, 1e-9) << lam;
  // phi2 at lambda = 1: only mu = 0 survives, int (tent(x) tent(y) / 2)^2 = (16/3)(2/3)/4 = 8/9
  EXPECT_NEAR(tau_norm_sq(phi2_family(), 1.0).value, 8.0 / 9.0, 1e-10);
  EXPECT_THROW(tau_norm_sq(phi1_family(), 0.0), std::invalid_argument);
}

TEST(Kernels, Phi1ClosedFormMatchesSliceIntegral) {
  for (double lam : {0.37, -0.9, 1.6}) {
    const Kernel2D a = kernel_phi1(lam), b = kernel_from_slice(phi1_slice(lam));
    for (auto [xi, eta] : {std::pair{0.1, 0.6}, {-0.7, 0.2}, {1.5, 2.4}, {0.3, 0.2}, {0.0, 1.5}})
      EXPECT_NEAR(std::abs(a(xi, eta) - b(xi, eta)), 0.0, 1e-12) << lam << " " << xi << " " << eta;
  }
}

TEST(Kernels, RecursionMatchesSliceOfPhi2) {
  for (double lam : {0.25, 0.8, -1.4}) {
    const Kernel2D rec = kernel_recursion(kernel_phi1(lam), lam);
    const Kernel2D dir = kernel_from_slice(phi2_slice(lam));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const double xi = -1.0 + 0.5 * i + 0.03, eta = -1.0 + 0.5 * j + 0.07;
        EXPECT_NEAR(std::abs(rec(xi, eta) - dir(xi, eta)), 0.0, 1e-8) << lam << " " << xi << " " << eta;
      }
    for (double d : {-0.3, 2.2, 3.0}) {
      EXPECT_LE(std::abs(rec(0.4, 0.4 + d)), 1e-10);
      EXPECT_LE(std::abs(dir(0.4, 0.4 + d)), 1e-10);
    }
  }
}

TEST(Weyl, NormIdentity) {
  for (double lam : {0.37, 0.8, 2.3}) {
    for (const Slice2D& s : {phi1_slice(lam), phi2_slice(lam)}) {
      const WeylCheck w = weyl_norm_check(s);
      EXPECT_LE(std::abs(w.lhs - w.rhs), 1e-6 * w.lhs) << lam;
    }
  }
}

TEST(Weyl, SeparableSlice) {
  const Slice2D s = separable_slice([](double w) { return classical_bspline_hat(3, w); }, 0.6, 1.0);
  const WeylCheck w = weyl_norm_check(s);
  EXPECT_NEAR(w.lhs, 2.0 * std::norm(classical_bspline_hat(3, -0.6)), 1e-14);
  EXPECT_LE(std::abs(w.lhs - w.rhs), 1e-6 * w.lhs);
}
