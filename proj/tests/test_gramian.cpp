#include <gtest/gtest.h>

#include <random>

#include "hspline/bspline.hpp"
#include "hspline/gramian.hpp"

using namespace hspline;

TEST(TwistedInner, IProfilesAreTwistedInnerProducts) {
  for (double a : {0.3, -0.7, 1.6, 2.45})
    for (int j : {1, 3, 5, 7, 9}) {
      const auto o = I_offset(j);
      const cplx direct = twisted_inner(a, o[0], o[1], phi2_slice(a));
      const cplx fixed = twisted_inner(a, o[0], o[1], phi2_slice(a), InnerRule::fixed);
      const cplx I = I_profile(j, a);
      EXPECT_NEAR(std::abs(I - direct), 0.0, 1e-12) << "a=" << a << " j=" << j;
      EXPECT_NEAR(std::abs(fixed - direct), 0.0, 1e-12) << "a=" << a << " j=" << j;
    }
  EXPECT_THROW(I_profile(2, 0.5), std::invalid_argument);
}

TEST(TwistedInner, MatchesTwistedTranslateIntegral) {
  const double lam = 0.45;
  const Slice2D g = phi2_slice(lam);
  const Slice2D Tg = twisted_translate({lam, 2.0, 1.0}, g);
  QuadSpec spec;
  spec.abs_tol = 1e-13;
  const cplx oracle = integrate_2d([&](double x, double y) { return Tg(x, y) * std::conj(g(x, y)); }, {2, 4}, {1, 2},
                                   spec, {2.0, 4.0}, [](double) { return std::vector<double>{1.0, 2.0}; })
                          .value;
  EXPECT_NEAR(std::abs(twisted_inner(lam, 1, 1, g) - oracle), 0.0, 1e-12);
  EXPECT_EQ(twisted_inner(lam, 3, 0, g), cplx(0.0));
  EXPECT_THROW(twisted_translate({0.0, 1.0, 1.0}, g), std::domain_error);
}

TEST(GramianForm, Phi1IsAnOrthonormalSystem) {
  std::mt19937_64 rng(9);
  for (double lam : {0.2, 0.61, 1.0}) {
    const CoeffField c = CoeffField::random(2, rng);
    double im = 1.0;
    EXPECT_NEAR(gramian_form(lam, c, phi1_family(), 1e-12, &im), c.norm_sq(), 1e-9 * c.norm_sq());
    EXPECT_LE(std::abs(im), 1e-12);
  }
  EXPECT_THROW(gramian_form(0.0, CoeffField{}, phi1_family()), std::invalid_argument);
}

TEST(GramianForm, SeparableFormIsSymbolTimesNorm) {
  Decay d;
  d.power = 4.0;
  d.pure_power = true;
  auto hh = [](double w) { return classical_bspline_hat(2, w); };
  std::mt19937_64 rng(10);
  const CoeffField c = CoeffField::random(1, rng);
  for (double lam : {0.3, 0.75}) {
    // area of [0,2] x [0,1] times sum_r |hhat(r - lambda)|^2
    double S = 0.0;
    for (int r = -4000; r <= 4000; ++r) S += std::norm(hh(r - lam));
    EXPECT_NEAR(gramian_form(lam, c, separable_family(hh, d)), 2.0 * S * c.norm_sq(), 1e-9 * c.norm_sq());
  }
}

TEST(GramianForm, Phi2PrintedExpansionMatchesGeneralForm) {
  std::mt19937_64 rng(11);
  for (double lam : {0.37, 0.9}) {
    const CoeffField c = CoeffField::random(1, rng);
    const Phi2GramTerms t = phi2_gram_form(lam, c);
    double im = 1.0;
    const double g = gramian_form(lam, c, phi2_gram_family(), 1e-10, &im);
    EXPECT_NEAR(t.value, g, 1e-9 * c.norm_sq());
    EXPECT_LE(std::abs(t.imag), 1e-10 * c.norm_sq());
    EXPECT_LE(m_conjugacy_defect(t), 1e-10 * c.norm_sq());
    EXPECT_GT(t.value, 0.0);
    EXPECT_LE(t.value, upper_bound_phi2() * c.norm_sq());
  }
}

TEST(GramianWindow, HermitianAndPositive) {
  const GramianWindow G = gramian_window(0.37, square_window(1), phi2_gram_family());
  EXPECT_LE(G.hermitian_defect(), 1e-12);
  EXPECT_GE(G.min_eigenvalue(), -1e-8);
  EXPECT_LE(G.max_eigenvalue(), upper_bound_phi2());
  EXPECT_THROW(gramian_window(0.5, square_window(8), phi2_gram_family()), std::invalid_argument);
}

TEST(SeparableBounds, ClosedForms) {
  auto bsp = [](int n) {
    Decay d;
    d.power = 2.0 * n;
    d.pure_power = true;
    return std::pair{std::function<cplx(double)>([n](double w) { return classical_bspline_hat(n, w); }), d};
  };
  {
    // sum_r sinc^2(lambda - r) = 1
    auto [h, d] = bsp(1);
    const SeparableBounds b = riesz_bounds_separable(h, d);
    EXPECT_NEAR(b.A, 2.0, 1e-9);
    EXPECT_NEAR(b.B, 2.0, 1e-9);
  }
  {
    // sum_r sinc^4(lambda - r) = (2 + cos 2 pi lambda) / 3, in [1/3, 1]
    auto [h, d] = bsp(2);
    const SeparableBounds b = riesz_bounds_separable(h, d);
    EXPECT_NEAR(b.A, 2.0 / 3.0, 1e-8);
    EXPECT_NEAR(b.B, 2.0, 1e-8);
    EXPECT_NEAR(b.lambda_min, 0.5, 1e-4);
    for (double lam : {0.2, 0.5, 0.8})
      EXPECT_NEAR(separable_symbol(h, lam, d), (2.0 + std::cos(2.0 * pi * lam)) / 3.0, 1e-11);
  }
  {
    // sum_r sinc^6(lambda - r) = (33 + 26 cos 2 pi lambda + cos 4 pi lambda) / 60, minimum 2/15 at 1/2
    auto [h, d] = bsp(3);
    const SeparableBounds b = riesz_bounds_separable(h, d);
    EXPECT_NEAR(b.A, 4.0 / 15.0, 1e-8);
    EXPECT_NEAR(b.B, 2.0, 1e-8);
    for (double lam : {0.1, 0.5, 0.7})
      EXPECT_NEAR(separable_symbol(h, lam, d),
                  (33.0 + 26.0 * std::cos(2.0 * pi * lam) + std::cos(4.0 * pi * lam)) / 60.0, 1e-11);
  }
  {
    Decay d;
    d.compact_radius = 4;
    const SeparableBounds b = riesz_bounds_separable([](double w) { return cplx(w >= 0.0 && w < 3.0 ? 1.0 : 0.0); }, d);
    EXPECT_DOUBLE_EQ(b.A, 6.0);
    EXPECT_DOUBLE_EQ(b.B, 6.0);
  }
}

TEST(Digamma, ApClosedFormAgainstFiniteSum) {
  for (int p : {3, 4, 7, 20})
    for (double lam : {0.05, 0.3, 0.5, 0.76, 0.99}) EXPECT_NEAR(A_p(p, lam), A_p_direct(p, lam), 1e-12) << p << " " << lam;
  EXPECT_EQ(A_p(3, 0.0), 0.0);
  EXPECT_NEAR(A_p(3, 1.0), 2.0, 1e-14);
  EXPECT_THROW(A_p(0, 0.5), std::invalid_argument);
  EXPECT_THROW(A_p(3, 1.5), std::invalid_argument);
}

TEST(Digamma, PsiMinimum) {
  const PsiMin m = psi_minimize();
  EXPECT_NEAR(m.lambda0, 0.762714, 1e-5);
  EXPECT_NEAR(m.psi, 0.638135, 1e-5);
  EXPECT_NEAR(m.psi_second, 12.8421, 1e-3);
  // a minimum of 3 - A_3 against a plain grid scan
  double best = INFINITY;
  for (int i = 1; i < 10000; ++i) best = std::min(best, 3.0 - A_p_direct(3, i / 10000.0));
  EXPECT_NEAR(m.psi, best, 1e-7);
}

TEST(Digamma, MonotoneInP) {
  for (int p : {3, 5, 10})
    for (double lam : {0.2, 0.5, 0.9}) {
      EXPECT_NEAR(monotone_p_check(p, lam), monotone_p_identity(p, lam), 1e-12);
      EXPECT_GT(monotone_p_check(p, lam), 0.0);
    }
  EXPECT_THROW(monotone_p_check(2, 0.5), std::invalid_argument);
}

TEST(Phi2Bounds, UpperBoundAndI1Majorant) {
  const UpperBoundTerms t = upper_bound_terms_phi2();
  EXPECT_NEAR(t.total, 1.715, 0.01);
  EXPECT_NEAR(t.total, t.b9 + 2.0 * (t.b1 + t.b3 + t.b5 + t.b7), 1e-15);
  const double bound1 = 2.0 / 27.0 - 16.0 / (9.0 * std::pow(pi, 4));
  for (double lam : {0.2, 0.5, 0.9, 1.0}) {
    const double s = I_abs_sum(1, lam);
    EXPECT_LE(s, I1_abs_majorant(lam) + 1e-10) << lam;
    EXPECT_LE(s, bound1) << lam;
  }
}

TEST(Phi2Bounds, I9AtLambdaOne) {
  // at lambda = 1 only r = 1 contributes, the lambda -> 0 profile: 8/9
  EXPECT_NEAR(std::abs(I_sum(9, 1.0).value), 8.0 / 9.0, 1e-10);
}

TEST(Riesz, UpperBoundDoubling) {
  EXPECT_EQ(upper_riesz_bound(1), 1.0);
  EXPECT_EQ(upper_riesz_bound(4), 8.0);
  EXPECT_THROW(upper_riesz_bound(0), std::invalid_argument);
}

TEST(Phi1Translates, Orthonormal) {
  EXPECT_LE(orthonormality_check_phi1(1), 1e-12);
  EXPECT_NEAR(phi1_translate_inner({1, -1, 2}, {1, -1, 2}), 1.0, 1e-12);
  EXPECT_EQ(phi1_translate_inner({0, 0, 0}, {1, 0, 0}), 0.0);
  EXPECT_THROW(orthonormality_check_phi1(0), std::invalid_argument);
}
