#include <gtest/gtest.h>

#include "schottky/variation.hpp"
#include "surfaces.hpp"

using namespace schottky;
using testing_surfaces::reference;

namespace {

const SeriesConfig light{8};

const CanonicalGem& gem_ref() {
  static const CanonicalGem G = [] {
    GemConfig c;
    c.series = light;
    return canonical_gem(reference(), 2, c);
  }();
  return G;
}

}  // namespace

TEST(Moduli, PerturbDirections) {
  const auto p = reference();
  const auto q0 = perturb(p, 1, 0, 0.01);
  EXPECT_EQ(q0.handle(1).w_plus, p.handle(1).w_plus + 0.01);
  const auto q1 = perturb(p, 2, 1, 0.5);
  EXPECT_EQ(q1.handle(2).rho, p.handle(2).rho * 1.5);
  const auto q2 = perturb(p, 1, 2, 0.1);
  EXPECT_EQ(q2.handle(1).w_minus, p.handle(1).w_minus + 0.1 * p.handle(1).rho);
  EXPECT_THROW((void)perturb(p, 1, 3, 0.1), IndexError);
  EXPECT_THROW((void)perturb(p, 1, 0, 3.5), InvalidParamsError);
}

TEST(Moduli, GradientOfParameters) {
  const auto p = reference();
  const ModuliFunction f = [](const SchottkyParams& q) {
    return std::vector<cplx>{q.handle(1).w_plus, q.handle(2).rho, q.handle(2).w_minus};
  };
  const auto g = moduli_gradient(p, f, 1e-4);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_LT(std::abs(g[0][0] - 1.0), 1e-10);
  EXPECT_LT(std::abs(g[4][1] - p.handle(2).rho), 1e-12);
  EXPECT_LT(std::abs(g[5][2] - p.handle(2).rho), 1e-10);
  for (std::size_t i : {1u, 2u, 3u}) EXPECT_LT(std::abs(g[i][0]), 1e-12);

  TangentVector t(2);
  t(1, 0) = 2.0;
  t(2, 1) = cplx{0.0, 1.0};
  const auto v = apply_tangent(t, g);
  EXPECT_LT(std::abs(v[0] - 2.0), 1e-10);
  EXPECT_LT(std::abs(v[1] - cplx{0.0, 1.0} * p.handle(2).rho), 1e-12);
}

TEST(Moduli, WordDerivativeIdentity) {
  const auto p = reference();
  for (const GroupWord& w : {GroupWord{{1}}, GroupWord{{1, 2, -1}}, GroupWord{{-2, -2, 1, 2}}})
    EXPECT_LT(derivative_identity_residual(p, w, cplx{0.3, 0.2}, 1e-5), 1e-6);
}

TEST(Moduli, Sl2FieldMovesFixedPointsByP) {
  const auto p = reference();
  const PolyForm P(2, {1.0, 0.3, 0.2});
  const ModuliFunction fW = [](const SchottkyParams& q) {
    const auto c = to_classical(q.handle(1));
    return std::vector<cplx>{c.W_plus, c.W_minus, c.q};
  };
  const auto s = sl2_apply(p, P, fW, 1e-5);
  const auto f = fixed_point_flow(p, P, fW, 1e-5);
  const auto c = to_classical(p.handle(1));
  EXPECT_LT(std::abs(s[0] - P.eval(c.W_plus)), 1e-7);
  EXPECT_LT(std::abs(s[1] - P.eval(c.W_minus)), 1e-7);
  EXPECT_LT(std::abs(s[2]), 1e-7);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(s[i] - f[i]), 1e-7);
  EXPECT_THROW((void)sl2_apply(p, PolyForm::zero(3), fW, 1e-5), ConfigError);
}

TEST(Periods, GenusOneIsLogMultiplier) {
  const auto p = testing_surfaces::single_handle();
  PeriodConfig c;
  c.series.L = 20;
  const auto P = period_matrix(p, c);
  const cplx want = std::log(to_classical(p.handle(1)).q) / two_pi_i;
  cplx d = P(1, 1) - want;
  d.real(d.real() - std::round(d.real()));
  EXPECT_LT(std::abs(d), 1e-8);
  EXPECT_GT(P(1, 1).imag(), 0.0);
}

TEST(Periods, ReferenceSymmetricAndTransportInvariant) {
  const auto p = reference();
  PeriodConfig c;
  c.series = light;
  const auto P = period_matrix(p, c);
  EXPECT_LT(P.symmetry_error, 1e-7);
  EXPECT_LT(P.gate_error, 1e-10);
  EXPECT_GT(P(1, 1).imag(), 0.0);
  EXPECT_GT(P(1, 1).imag() * P(2, 2).imag() - P(1, 2).imag() * P(2, 1).imag(), 0.0);
  const auto Q = period_matrix(transport(p, MoebiusMap(1.0, 0.2, 0.03, 1.0)), c);
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b) EXPECT_LT(std::abs(Q(a, b) - P(a, b)), 1e-6);
}

TEST(Periods, BetaPathsStayInDomain) {
  const auto p = reference();
  for (int b = 1; b <= 2; ++b) {
    const auto path = beta_path(p, b);
    EXPECT_GE(path.size(), 2u);
    EXPECT_LT(std::abs(path.front() - p.center(b)) - p.radius(b), 1e-12);
    EXPECT_LT(std::abs(path.back() - p.generator(b)(path.front())), 1e-12);
    for (std::size_t i = 1; i + 1 < path.size(); ++i) EXPECT_TRUE(in_fundamental_domain(p, path[i]));
  }
}

TEST(Periods, NuNormalization) {
  const NormalizedDifferentials nu(reference(), light);
  EXPECT_LT(nu_normalization_error(nu), 1e-8);
}

TEST(Operator, NeedsWeightTwo) {
  const BersSeries B3(reference(), 3, light);
  EXPECT_THROW((void)theta2(B3, 1, 0, cplx{0.5, 0.9}), ConfigError);
  const BersSeries B2(reference(), 2, light);
  EXPECT_THROW((void)theta2(B2, 1, 3, cplx{0.5, 0.9}), IndexError);
  const auto t = theta2_all(B2, cplx{0.5, 0.9});
  EXPECT_EQ(t(2, 1), theta2(B2, 2, 1, cplx{0.5, 0.9}));
}

TEST(Operator, PuncturedCovariance) {
  const auto& G = gem_ref();
  const auto p = reference();
  const std::vector<cplx> ys{cplx{-0.4, 0.6}};
  const cplx x{0.5, 0.9};
  for (int a : {1, 2}) {
    const PuncturedFunction f = [a](const SchottkyParams& q, const std::vector<cplx>& y) {
      return q.generator(a)(y[0]);
    };
    const cplx lhs = nabla_punctured_apply(G, ys, f, x, 1e-5);
    const cplx rhs = G.value(x, p.generator(a)(ys[0]));
    EXPECT_LT(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), 1e-5);
  }
  const PuncturedFunction f = [](const SchottkyParams&, const std::vector<cplx>& y) { return y[0]; };
  EXPECT_THROW((void)nabla_punctured_apply(G, {x}, f, x, 1e-5), PoleError);
  EXPECT_THROW((void)nabla_punctured_apply(G, {ys[0], ys[0]}, f, x, 1e-5), ConfigError);
}

TEST(Rauch, MatchesProductOfDifferentialsForAnyGem) {
  const auto& G = gem_ref();
  const std::vector<cplx> xs{cplx{0.5, 0.9}, cplx{-0.7, -0.4}};
  const auto grad = moduli_gradient(reference(), period_function(light), 1e-5);
  const NormalizedDifferentials nu(reference(), light);
  const auto R = rauch_compare(G.form, grad, nu, xs, 1e-5);
  EXPECT_LT(R.max_rel_error, 1e-4);
  const auto RB = rauch_compare(GemForm(G.theta), grad, nu, xs, 1e-5);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_LT(std::abs(R.samples[i].lhs[k] - RB.samples[i].lhs[k]) / std::abs(R.samples[i].rhs[k]), 1e-6);
  // Symmetric in (a, b) because Omega is.
  for (const auto& s : R.samples) EXPECT_LT(std::abs(s.lhs[1] - s.lhs[2]), 1e-6 * std::abs(s.rhs[1]));
}
