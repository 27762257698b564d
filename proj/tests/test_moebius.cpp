#include <gtest/gtest.h>

#include <random>

#include "schottky/moebius.hpp"
#include "surfaces.hpp"

using namespace schottky;

namespace {

MoebiusMap random_map(std::mt19937_64& rng) {
  auto z = [&] { return testing_surfaces::random_point(rng, 2.0); };
  return {z(), z(), z(), z()};
}

double entry_distance(const MoebiusMap& m, const MoebiusMap& n) {
  return std::max({std::abs(m.a() - n.a()), std::abs(m.b() - n.b()), std::abs(m.c() - n.c()),
                   std::abs(m.d() - n.d())});
}

}  // namespace

TEST(Moebius, IdentityActsTrivially) {
  const MoebiusMap id;
  EXPECT_EQ(id.apply(cplx{3.0, 4.0}).value(), (cplx{3.0, 4.0}));
  EXPECT_TRUE(id.apply(SpherePoint::infinity()).is_infinity());
  EXPECT_EQ(id.deriv(cplx{0.7, -2.0}), cplx{1.0});
}

TEST(Moebius, HandleMapPoleAndInfinity) {
  const HandleParams h{cplx{1.0, 0.5}, cplx{-3.0, 0.2}, cplx{0.3, 0.1}};
  const MoebiusMap m = handle_map(h);
  EXPECT_TRUE(m.apply(h.w_plus).is_infinity());
  EXPECT_LT(std::abs(m.apply(SpherePoint::infinity()).value() - h.w_minus), 1e-14);
  EXPECT_LT(std::abs(m.det() - 1.0), 1e-12);
}

TEST(Moebius, SphereBranches) {
  const MoebiusMap affine{2.0, 1.0, 0.0, 0.5};
  EXPECT_TRUE(affine.apply(SpherePoint::infinity()).is_infinity());
  const MoebiusMap m{1.0, 2.0, 1.0, 3.0};
  EXPECT_TRUE(m.apply(-3.0).is_infinity());
  EXPECT_LT(std::abs(m.apply(SpherePoint::infinity()).value() - m.a() / m.c()), 1e-15);
  EXPECT_THROW((void)SpherePoint::infinity().value(), PoleError);
}

TEST(Moebius, DerivativeMatchesClosedFormAndFiniteDifference) {
  const HandleParams h{0.5, cplx{4.0, 1.0}, cplx{0.2, -0.3}};
  const MoebiusMap m = handle_map(h);
  for (const cplx z : {cplx{1.5, 2.0}, cplx{-3.0, 0.1}, cplx{0.0, -1.0}}) {
    const cplx closed = -h.rho / ((z - h.w_plus) * (z - h.w_plus));
    EXPECT_LT(std::abs(m.deriv(z) - closed), 1e-12 * std::abs(closed));
    const double e = 1e-5;
    const cplx fd = (m(z + e) - m(z - e)) / (2.0 * e);
    EXPECT_LT(std::abs(fd - closed), 1e-8);
  }
  EXPECT_THROW((void)m.deriv(h.w_plus), PoleError);
}

TEST(Moebius, CompositionLaws) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const MoebiusMap m1 = random_map(rng), m2 = random_map(rng), m3 = random_map(rng);
    EXPECT_LT(entry_distance((m1 * m2) * m3, m1 * (m2 * m3)), 1e-12 * (1.0 + std::abs((m1 * m2 * m3).a())));
    EXPECT_LT(distance_mod_sign(m1 * m1.inverse(), MoebiusMap::identity()), 1e-12);
    EXPECT_LT(entry_distance(MoebiusMap::identity() * m1, m1), 1e-15);
    const cplx z = testing_surfaces::random_point(rng, 3.0);
    const cplx lhs = (m1 * m2).deriv(z);
    const cplx rhs = m1.deriv(m2(z)) * m2.deriv(z);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    EXPECT_LT(std::abs((m1 * m2)(z) - m1(m2(z))), 1e-10 * std::max(1.0, std::abs(m1(m2(z)))));
    EXPECT_LT(std::abs(m1.det() - 1.0), 1e-12);
  }
}

TEST(Moebius, FixedPointsOfHandle) {
  // Classical (W+, W-, q) = (1, -1, 1/4) gives (w+, w-, rho) = (5/3, -5/3, -16/9).
  const HandleParams h{5.0 / 3.0, -5.0 / 3.0, -16.0 / 9.0};
  const FixedPoints fp = fixed_points(handle_map(h));
  EXPECT_LT(std::abs(fp.attracting.value() - (-1.0)), 1e-12);
  EXPECT_LT(std::abs(fp.repelling.value() - 1.0), 1e-12);
  EXPECT_LT(std::abs(fp.multiplier - 0.25), 1e-12);
  const MoebiusMap m = handle_map(h);
  EXPECT_LT(std::abs(m.deriv(fp.attracting.value())), 1.0);
  for (const auto& pt : {fp.attracting, fp.repelling}) {
    const cplx z = pt.value();
    EXPECT_LT(std::abs(m(z) - z), 1e-10);
    // (z - w-)(z - w+) = rho at a fixed point
    EXPECT_LT(std::abs(z * z - (h.w_plus + h.w_minus) * z + h.w_plus * h.w_minus - h.rho), 1e-12);
  }
}

TEST(Moebius, FixedPointsRejectNonLoxodromic) {
  EXPECT_THROW((void)fixed_points(MoebiusMap::identity()), ParabolicError);
  EXPECT_THROW((void)fixed_points(MoebiusMap{1.0, 1.0, 0.0, 1.0}), ParabolicError);
  const double t = 0.3;
  EXPECT_THROW((void)fixed_points(MoebiusMap{std::cos(t), -std::sin(t), std::sin(t), std::cos(t)}),
               ParabolicError);
  // Complex trace inside (-2, 2) in modulus but still loxodromic.
  const cplx lam{1.2, 1.5};
  const FixedPoints fp = fixed_points(MoebiusMap{lam, 0.0, 0.0, 1.0 / lam});
  EXPECT_LT(std::abs(fp.multiplier - 1.0 / (lam * lam)), 1e-12);
}

TEST(Moebius, IsometricCircleExchange) {
  const HandleParams h{cplx{1.0, 1.0}, cplx{-2.0, 3.0}, cplx{0.4, 0.2}};
  const MoebiusMap m = handle_map(h);
  const cplx unnormalized_det = h.w_minus * (-h.w_plus) - (h.rho - h.w_plus * h.w_minus);
  EXPECT_LT(std::abs(unnormalized_det + h.rho), 1e-14);
  for (int j = 0; j < 12; ++j) {
    const cplx z = h.w_plus + std::sqrt(h.rho) * std::polar(1.0, 0.5 * j);
    EXPECT_LT(std::abs(std::abs(m(z) - h.w_minus) - h.radius()), 1e-12);
  }
  std::mt19937_64 rng(3);
  for (int j = 0; j < 10; ++j) {
    const cplx z = testing_surfaces::random_point(rng, 5.0);
    EXPECT_LT(std::abs((m(z) - h.w_minus) * (z - h.w_plus) - h.rho), 1e-12);
  }
  EXPECT_THROW((void)handle_map({1.0, 2.0, 0.0}), DegenerateError);
}
