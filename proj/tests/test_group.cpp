#include <gtest/gtest.h>

#include <random>

#include "hspline/group.hpp"

using namespace hspline;

namespace {

double dist(const HPoint& a, const HPoint& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t)});
}

HPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  return {U(rng), U(rng), U(rng)};
}

}  // namespace

TEST(Group, ProductMatchesWrittenLaw) {
  const HPoint p{1.0, 2.0, 3.0}, q{-0.5, 4.0, 0.25};
  const HPoint r = group_mul(p, q);
  EXPECT_DOUBLE_EQ(r.x, 0.5);
  EXPECT_DOUBLE_EQ(r.y, 6.0);
  // t + t' + (x' y - y' x) / 2 = 3.25 + (-1 - 4) / 2
  EXPECT_DOUBLE_EQ(r.t, 0.75);
}

TEST(Group, AxiomsOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const HPoint a = random_point(rng), b = random_point(rng), c = random_point(rng);
    EXPECT_LE(dist(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c))), 1e-12);
    EXPECT_LE(dist(group_mul(a, identity()), a), 1e-15);
    EXPECT_LE(dist(group_mul(identity(), a), a), 1e-15);
    EXPECT_LE(dist(group_mul(a, group_inv(a)), identity()), 1e-15);
    EXPECT_LE(dist(group_mul(group_inv(a), a), identity()), 1e-15);
  }
}

TEST(Group, CommutatorIsCentral) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const HPoint a = random_point(rng), b = random_point(rng);
    const HPoint c = group_mul(group_mul(a, b), group_mul(group_inv(a), group_inv(b)));
    EXPECT_NEAR(c.x, 0.0, 1e-12);
    EXPECT_NEAR(c.y, 0.0, 1e-12);
    EXPECT_NEAR(c.t, b.x * a.y - b.y * a.x, 1e-11);
  }
}

TEST(Group, LatticeIsClosedAndMatchesEmbedding) {
  for (int k = -2; k <= 2; ++k)
    for (int l = -2; l <= 2; ++l)
      for (int kp = -2; kp <= 2; ++kp)
        for (int lp = -2; lp <= 2; ++lp) {
          const LatticeIndex a{k, l, 1}, b{kp, lp, -3};
          const HPoint prod = group_mul(embed(a), embed(b));
          EXPECT_EQ(embed(lattice_mul(a, b)), prod);
          EXPECT_EQ(prod.t, std::round(prod.t));
          EXPECT_EQ(lattice_mul(a, lattice_inv(a)), LatticeIndex{});
        }
}

TEST(Group, LeftTranslationComposes) {
  const HFunction f = [](const HPoint& p) { return p.x + 2.0 * p.y * p.t - p.t * p.t; };
  const HPoint g{0.3, -1.2, 0.7}, h{1.5, 0.4, -2.0};
  const HFunction lg_lh = left_translate(g, left_translate(h, f));
  const HFunction lgh = left_translate(group_mul(g, h), f);
  for (const HPoint& p : {HPoint{0.1, 0.2, 0.3}, HPoint{-1.0, 2.5, 4.0}}) EXPECT_NEAR(lg_lh(p), lgh(p), 1e-12);
  const HFunction rg = right_translate(g, f);
  EXPECT_NEAR(rg(HPoint{1, 1, 1}), f(group_mul(HPoint{1, 1, 1}, g)), 0.0);
}

TEST(Group, FundamentalDomain) {
  EXPECT_DOUBLE_EQ(FundamentalDomain::volume(), 2.0);
  EXPECT_TRUE(FundamentalDomain::contains({1.0, 0.5, 0.5}));
  EXPECT_FALSE(FundamentalDomain::contains({2.5, 0.5, 0.5}));
  EXPECT_FALSE(FundamentalDomain::contains({1.0, 0.5, -0.1}));
}
