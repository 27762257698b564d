#include <gtest/gtest.h>

#include <random>

#include "schottky/group.hpp"
#include "surfaces.hpp"

using namespace schottky;
using testing_surfaces::reference;

TEST(Classical, KnownConversion) {
  const HandleParams h = from_classical({1.0, -1.0, 0.25});
  EXPECT_LT(std::abs(h.w_plus - 5.0 / 3.0), 1e-14);
  EXPECT_LT(std::abs(h.w_minus + 5.0 / 3.0), 1e-14);
  EXPECT_LT(std::abs(h.rho + 16.0 / 9.0), 1e-14);
  const ClassicalHandle back = to_classical(h);
  EXPECT_LT(std::abs(back.W_plus - 1.0), 1e-10);
  EXPECT_LT(std::abs(back.W_minus + 1.0), 1e-10);
  EXPECT_LT(std::abs(back.q - 0.25), 1e-10);
}

TEST(Classical, SmallMultiplierLimit) {
  const HandleParams h = from_classical({cplx{2.0, 1.0}, cplx{-1.0, 0.5}, 1e-12});
  EXPECT_LT(std::abs(h.w_plus - cplx{2.0, 1.0}), 1e-10);
  EXPECT_LT(std::abs(h.rho), 1e-10);
  EXPECT_THROW((void)from_classical({1.0, -1.0, 1.0}), DegenerateError);
}

TEST(Classical, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 0.8), th(0.0, 6.28);
  for (int i = 0; i < 50; ++i) {
    const ClassicalHandle c{testing_surfaces::random_point(rng, 4.0), testing_surfaces::random_point(rng, 4.0),
                            std::polar(u(rng), th(rng))};
    const ClassicalHandle back = to_classical(from_classical(c));
    EXPECT_LT(std::abs(back.W_plus - c.W_plus), 1e-10);
    EXPECT_LT(std::abs(back.W_minus - c.W_minus), 1e-10);
    EXPECT_LT(std::abs(back.q - c.q), 1e-10);
  }
}

TEST(Validate, ReferenceSurfaces) {
  EXPECT_TRUE(validate(reference()).valid());
  EXPECT_TRUE(validate(testing_surfaces::single_handle()).valid());
  EXPECT_TRUE(validate(testing_surfaces::genus_three()).valid());
  const SchottkyParams bad{{{0.0, 1.0, 0.09}, {0.5, 5.0, 0.09}}};
  const auto rep = validate(bad);
  EXPECT_FALSE(rep.valid());
  bool found = false;
  for (const auto& v : rep.violations)
    found = found || (v.circle_u == 1 && v.circle_v == 2 && std::abs(v.distance - 0.5) < 1e-15);
  EXPECT_TRUE(found);
  EXPECT_FALSE(validate({{{0.0, 3.0, 0.0}}}).valid());
}

TEST(Enumerate, CountsAndOrder) {
  const auto p = reference();
  EXPECT_EQ(enumerate(p, 1).size(), 5u);
  EXPECT_EQ(enumerate(p, 2).size(), 17u);
  EXPECT_EQ(word_count(2, 10), 118097u);
  const auto els = enumerate(p, 3);
  EXPECT_EQ(els.size(), word_count(2, 3));
  const std::vector<std::vector<int>> first = {{}, {1}, {-1}, {2}, {-2}, {1, 1}, {1, 2}, {1, -2}, {-1, -1}};
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(els[i].word.letters, first[i]);
  for (const auto& e : els) {
    EXPECT_TRUE(e.word.is_reduced());
    EXPECT_LT(distance_mod_sign(e.map, word_map(p, e.word)), 1e-12);
  }
  const auto again = enumerate(p, 3);
  for (std::size_t i = 0; i < els.size(); ++i) EXPECT_EQ(els[i].word, again[i].word);
  EXPECT_THROW((void)Enumeration(p, 10, 1000), CapacityError);
}

TEST(Reduce, FundamentalDomain) {
  const auto p = reference();
  const auto r0 = reduce(p, 0.0);
  EXPECT_TRUE(r0.word.empty());
  EXPECT_EQ(r0.image, cplx{0.0});

  const cplx y = p.center(1) + 0.1;
  const auto r = reduce(p, y);
  EXPECT_GE(r.word.length(), 1u);
  EXPECT_TRUE(in_fundamental_domain(p, r.image));
  EXPECT_LT(std::abs(word_map(p, r.word)(y) - r.image), 1e-12);
  EXPECT_TRUE(reduce(p, r.image).word.empty());

  const auto c1 = to_classical(p.handle(1));
  EXPECT_THROW((void)reduce(p, c1.W_plus), NonTerminationError);
  EXPECT_THROW((void)reduce(p, c1.W_minus), NonTerminationError);
  const cplx W12 = fixed_points(word_map(p, GroupWord{{1, 2}})).attracting.value();
  EXPECT_THROW((void)reduce(p, W12), NonTerminationError);
  EXPECT_THROW((void)reduce(p, p.center(2) + p.radius(2)), BoundaryError);
}

TEST(Reduce, Equivariance) {
  const auto p = reference();
  std::mt19937_64 rng(17);
  // Pulling gamma(y) back amplifies its rounding by 1/|gamma'(y)|, so the
  // 1e-10 target is scaled by that condition number for longer words.
  const auto els = enumerate(p, 3);
  constexpr double eps = 2.2e-16;
  for (int i = 0; i < 60; ++i) {
    const cplx y = testing_surfaces::random_point(rng, 3.0);
    if (!in_fundamental_domain(p, y, 1e-3)) continue;
    const auto& g = els[rng() % els.size()];
    const cplx gy = g.map(y);
    const auto r = reduce(p, gy);
    const double cond = (1.0 + std::abs(gy)) / std::abs(g.map.deriv(y));
    EXPECT_LT(std::abs(r.image - y), std::max(1e-10, 100.0 * eps * cond));
  }
  for (const auto& g : enumerate(p, 1)) {
    const cplx y{0.5, 1.5};
    EXPECT_LT(std::abs(reduce(p, g.map(y)).image - y), 1e-10);
  }
}

TEST(Transport, ConjugationAndInvariants) {
  const auto p = reference();
  EXPECT_LT(std::abs(transport(p, MoebiusMap::identity()).handle(1).w_plus - p.handle(1).w_plus), 1e-15);
  const MoebiusMap M{cplx{1.0, 0.1}, cplx{0.2, -0.1}, cplx{0.01, 0.02}, cplx{1.0, 0.0}};
  const auto t = transport(p, M);
  for (int a = 1; a <= 2; ++a) {
    EXPECT_LT(distance_mod_sign(handle_map(t.handle(a)), M * handle_map(p.handle(a)) * M.inverse()), 1e-10);
    const auto c0 = to_classical(p.handle(a));
    const auto c1 = to_classical(t.handle(a));
    EXPECT_LT(std::abs(c1.W_plus - M(c0.W_plus)), 1e-10);
    EXPECT_LT(std::abs(c1.W_minus - M(c0.W_minus)), 1e-10);
    EXPECT_LT(std::abs(c1.q - c0.q), 1e-12);
  }
  // A map that sends a circle centre near infinity leaves parameter space.
  EXPECT_THROW((void)transport(p, MoebiusMap{0.0, 1.0, -1.0, 2.1}), InvalidParamsError);
}

TEST(Words, Algebra) {
  const GroupWord w{{1, -2, 2}};
  EXPECT_FALSE(w.is_reduced());
  const GroupWord v{{1, 2}};
  EXPECT_TRUE(v.times(v.inverse()).empty());
  EXPECT_EQ(v.str(), "(1,2)");
}
