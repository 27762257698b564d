#include <gtest/gtest.h>

#include <random>

#include "schottky/eichler.hpp"
#include "surfaces.hpp"

using namespace schottky;
using testing_surfaces::reference;

namespace {

double rel_diff(const PolyForm& a, const PolyForm& b, double R) {
  return (a - b).weighted_norm(R) / std::max(1.0, std::max(a.weighted_norm(R), b.weighted_norm(R)));
}

PolyForm random_poly(std::mt19937_64& rng, int N) {
  PolyForm P(N);
  for (int k = 0; k < P.size(); ++k) P[k] = testing_surfaces::random_point(rng, 1.0);
  return P;
}

Cocycle random_cocycle(std::mt19937_64& rng, int N, int g) {
  Cocycle X = Cocycle::zero(N, g);
  for (auto& v : X.generator_values) v = random_poly(rng, N);
  return X;
}

}  // namespace

TEST(PolyForm, ShiftedBasisRoundTrip) {
  std::mt19937_64 rng(1);
  for (int N : {2, 3, 4}) {
    const PolyForm P = random_poly(rng, N);
    const cplx w{-2.5, 0.7};
    const PolyForm back = PolyForm::from_shifted(N, w, P.shifted(w));
    for (int k = 0; k < P.size(); ++k) EXPECT_LT(std::abs(back[k] - P[k]), 1e-12);
    const cplx z{0.3, -1.2};
    cplx direct{};
    const auto s = P.shifted(w);
    for (int k = 0; k < P.size(); ++k) direct += s[k] * std::pow(z - w, k);
    EXPECT_LT(std::abs(direct - P.eval(z)), 1e-12);
  }
}

TEST(Pullback, IdentityAndClosedForm) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(2);
  const PolyForm P = random_poly(rng, 3);
  EXPECT_LT(rel_diff(poly_pullback(P, MoebiusMap::identity(), R), P, R), 1e-13);

  // N = 2, p = 1: pullback by a handle map is -(z - w)^2 / rho.
  const HandleParams h = p.handle(1);
  const PolyForm one = PolyForm::monomial(2, 0);
  const PolyForm pb = poly_pullback(one, handle_map(h), R);
  for (const cplx z : {cplx{0.0, 1.0}, cplx{3.0, -2.0}, cplx{-7.0, 0.5}}) {
    const cplx expect = -(z - h.w_plus) * (z - h.w_plus) / h.rho;
    EXPECT_LT(std::abs(pb.eval(z) - expect), 1e-10 * std::abs(expect));
  }
}

TEST(Pullback, MatchesPointwiseDefinition) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(3);
  const PolyForm P = random_poly(rng, 3);
  const MoebiusMap g = word_map(p, GroupWord{{1, -2}});
  const PolyForm pb = poly_pullback(P, g, R);
  for (const cplx z : {cplx{0.0, 1.0}, cplx{1.0, -2.0}}) {
    const cplx expect = P.eval(g(z)) * std::pow(g.deriv(z), 1 - 3);
    EXPECT_LT(std::abs(pb.eval(z) - expect), 1e-9 * std::abs(expect));
  }
}

TEST(Pullback, GroupActionLaw) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 30; ++i) {
    const PolyForm P = random_poly(rng, 2);
    const GroupWord u = testing_surfaces::random_word(rng, 2, 3);
    const GroupWord v = testing_surfaces::random_word(rng, 2, 3);
    const MoebiusMap mu = word_map(p, u), mv = word_map(p, v);
    const PolyForm Pu = poly_pullback(P, mu, R);
    const PolyForm lhs = poly_pullback(P, mu * mv, R);
    const PolyForm rhs = poly_pullback(Pu, mv, R);
    const double scale = pullback_scale(P, mu * mv, R) + pullback_scale(Pu, mv, R);
    EXPECT_LT((lhs - rhs).weighted_norm(R) / std::max(1.0, scale), 1e-10);
  }
}

TEST(Cocycle, ExtensionRules) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(5);
  const Cocycle X = random_cocycle(rng, 2, 2);
  EXPECT_EQ(cocycle_eval(p, X, GroupWord{}).weighted_norm(R), 0.0);
  const PolyForm cancel = cocycle_eval(p, X, GroupWord{{1}}.times(GroupWord{{-1}}));
  EXPECT_EQ(cancel.weighted_norm(R), 0.0);
  // Unreduced input goes through the same letter-by-letter rule.
  const PolyForm raw = cocycle_eval(p, X, GroupWord{{1, -1}});
  EXPECT_LT(raw.weighted_norm(R) / X.on_generator(1).weighted_norm(R), 1e-11);
}

TEST(Cocycle, LawOnRandomWordPairs) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(6);
  const Cocycle X = random_cocycle(rng, 2, 2);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupWord w1 = testing_surfaces::random_word(rng, 2, 4);
    const GroupWord w2 = testing_surfaces::random_word(rng, 2, 4);
    worst = std::max(worst, cocycle_law_residual(p, X, w1, w2));
  }
  EXPECT_LT(worst, 1e-10);
  (void)R;
}

TEST(Cocycle, Linearity) {
  const auto p = reference();
  const double R = pullback_radius(p);
  std::mt19937_64 rng(7);
  Cocycle X = random_cocycle(rng, 2, 2), Y = random_cocycle(rng, 2, 2);
  const cplx s{0.3, -1.7};
  Cocycle Z = Y;
  Z *= s;
  Z += X;
  const GroupWord w{{1, 2, -1}};
  const PolyForm expect = cocycle_eval(p, X, w) + s * cocycle_eval(p, Y, w);
  EXPECT_LT(rel_diff(cocycle_eval(p, Z, w), expect, R), 1e-12);
}

TEST(Canonical, GeneratorValues) {
  const auto p = reference();
  const Cocycle X10 = canonical_cocycle(p, 2, 1, 0);
  EXPECT_EQ(X10.on_generator(2).weighted_norm(1.0), 0.0);
  const Cocycle X12 = canonical_cocycle(p, 2, 1, 2);
  const cplx w = p.handle(1).w_plus;
  EXPECT_LT(std::abs(X12.on_generator(1)[0] - w * w), 1e-14);
  EXPECT_LT(std::abs(X12.on_generator(1)[1] + 2.0 * w), 1e-14);
  EXPECT_LT(std::abs(X12.on_generator(1)[2] - 1.0), 1e-14);
  const double R = pullback_radius(p);
  const PolyForm inv = cocycle_eval(p, X12, GroupWord{{-1}});
  const PolyForm expect = -poly_pullback(X12.on_generator(1), p.generator(-1), R);
  EXPECT_LT(rel_diff(inv, expect, R), 1e-14);
  EXPECT_THROW((void)canonical_cocycle(p, 2, 3, 0), IndexError);
  EXPECT_THROW((void)canonical_cocycle(p, 2, 1, 3), IndexError);
}

TEST(Coboundary, ClosedFormAndDecomposition) {
  const auto p = reference();
  const double R = pullback_radius(p);
  EXPECT_EQ(coboundary(p, PolyForm::zero(2)).on_generator(1).weighted_norm(R), 0.0);

  const Cocycle C = coboundary(p, PolyForm::monomial(2, 0));
  const HandleParams h = p.handle(1);
  for (const cplx z : {cplx{0.0, 1.0}, cplx{2.5, -1.0}}) {
    const cplx expect = -(z - h.w_plus) * (z - h.w_plus) / h.rho - 1.0;
    EXPECT_LT(std::abs(C.on_generator(1).eval(z) - expect), 1e-10 * std::abs(expect));
  }

  std::mt19937_64 rng(8);
  for (int N : {2, 3}) {
    for (int m = 0; m <= 2 * N - 2; ++m) {
      const Cocycle Xp = coboundary(p, PolyForm::monomial(N, m));
      EXPECT_LT(canonical_reconstruction_error(p, Xp), 1e-10);
      // Agreement on generators forces agreement on words, up to rounding
      // of the longer pullback chains.
      const Cocycle rebuilt = from_canonical_coordinates(p, N, canonical_coordinates(p, Xp));
      for (int i = 0; i < 10; ++i) {
        const GroupWord w = testing_surfaces::random_word(rng, 2, 3);
        EXPECT_LT(rel_diff(cocycle_eval(p, rebuilt, w), cocycle_eval(p, Xp, w), R), 1e-7);
      }
      // A coboundary on a word is P|_w - P.
      const GroupWord w{{2, -1}};
      const PolyForm direct = poly_pullback(PolyForm::monomial(N, m), word_map(p, w), R) - PolyForm::monomial(N, m);
      EXPECT_LT(rel_diff(cocycle_eval(p, Xp, w), direct, R), 1e-9);
    }
  }
}
