#pragma once

#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "schottky/contour.hpp"
#include "schottky/eichler.hpp"
#include "schottky/gem.hpp"
#include "schottky/group.hpp"
#include "schottky/parallel.hpp"
#include "schottky/poincare.hpp"
#include "schottky/types.hpp"

namespace schottky {

// ---------------------------------------------------------------------------
// Tangent directions d_{a,0} = d/dw_a, d_{a,1} = rho_a d/drho_a,
// d_{a,2} = rho_a d/dw_{-a}

struct TangentVector {
  std::vector<std::array<cplx, 3>> t;  // t[a-1][l]

  explicit TangentVector(int g = 0) : t(static_cast<std::size_t>(g), {cplx{}, cplx{}, cplx{}}) {}
  [[nodiscard]] int genus() const { return static_cast<int>(t.size()); }
  cplx& operator()(int a, int l) { return t.at(static_cast<std::size_t>(a - 1)).at(static_cast<std::size_t>(l)); }
  [[nodiscard]] cplx operator()(int a, int l) const {
    return t.at(static_cast<std::size_t>(a - 1)).at(static_cast<std::size_t>(l));
  }
};

/// Parameter step for direction (a, l) at relative size h.
inline double direction_step(const SchottkyParams& p, int a, int l, double h) {
  return l == 0 ? h * std::max(1.0, std::abs(p.handle(a).rho)) : h;
}

/// The surface moved by `s` along direction (a, l): w_a + s, rho_a (1 + s),
/// or w_{-a} + s rho_a.
inline SchottkyParams perturb(const SchottkyParams& p, int a, int l, double s) {
  SchottkyParams q = p;
  HandleParams& h = q.handle(a);
  switch (l) {
    case 0: h.w_plus += s; break;
    case 1: h.rho *= (1.0 + s); break;
    case 2: h.w_minus += s * p.handle(a).rho; break;
    default: throw IndexError("tangent direction must be 0, 1 or 2");
  }
  const auto rep = validate(q);
  if (!rep.valid()) throw InvalidParamsError("perturbed surface violates disc disjointness");
  return q;
}

using ModuliFunction = std::function<std::vector<cplx>(const SchottkyParams&)>;

/// Central differences D_{a,l} f of a vector-valued moduli function, indexed
/// [3(a-1) + l][component]. The 6g evaluations run concurrently.
inline std::vector<std::vector<cplx>> moduli_gradient(const SchottkyParams& p, const ModuliFunction& f,
                                                      double h) {
  const int g = p.genus();
  const std::size_t n = static_cast<std::size_t>(3 * g);
  std::vector<SchottkyParams> plus(n), minus(n);
  for (int a = 1; a <= g; ++a)
    for (int l = 0; l < 3; ++l) {
      const double s = direction_step(p, a, l, h);
      plus[static_cast<std::size_t>(3 * (a - 1) + l)] = perturb(p, a, l, s);
      minus[static_cast<std::size_t>(3 * (a - 1) + l)] = perturb(p, a, l, -s);
    }
  std::vector<std::vector<cplx>> vals(2 * n);
  parallel_for(2 * n, [&](std::size_t i) { vals[i] = f(i < n ? plus[i] : minus[i - n]); });
  std::vector<std::vector<cplx>> out(n);
  for (int a = 1; a <= g; ++a)
    for (int l = 0; l < 3; ++l) {
      const std::size_t i = static_cast<std::size_t>(3 * (a - 1) + l);
      const double s = direction_step(p, a, l, h);
      const double scale = l == 0 ? 1.0 / (2.0 * s) : 1.0 / (2.0 * h);
      if (vals[i].size() != vals[i + n].size()) throw ConfigError("moduli function changed length");
      for (std::size_t c = 0; c < vals[i].size(); ++c) out[i].push_back((vals[i][c] - vals[i + n][c]) * scale);
    }
  return out;
}

/// sum_{a,l} t_{a,l} D_{a,l} f for a precomputed gradient.
inline std::vector<cplx> apply_tangent(const TangentVector& t, const std::vector<std::vector<cplx>>& grad) {
  std::vector<cplx> out(grad.empty() ? 0 : grad[0].size());
  for (int a = 1; a <= t.genus(); ++a)
    for (int l = 0; l < 3; ++l) {
      const auto& d = grad[static_cast<std::size_t>(3 * (a - 1) + l)];
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += t(a, l) * d[c];
    }
  return out;
}

// ---------------------------------------------------------------------------
// The operator nabla(x) = sum Theta_a(x, l) d_{a,l}

/// Theta_a(x, l) with Psi(x, y) - Psi(x, gamma_a y) = sum_l Theta_a(x, l) (y - w_a)^l,
/// i.e. minus the quasi-period coefficients.
template <typename Evaluator>
TangentVector theta2_all(const Evaluator& psi, cplx x) {
  if (psi.weight() != 2) throw ConfigError("the moduli operator needs N = 2");
  TangentVector t(psi.params().genus());
  for (const auto& q : all_quasi_periods(psi, x))
    for (int l = 0; l < 3; ++l) t(q.a, l) = -q.coeffs[static_cast<std::size_t>(l)];
  return t;
}

template <typename Evaluator>
cplx theta2(const Evaluator& psi, int a, int l, cplx x) {
  if (psi.weight() != 2) throw ConfigError("the moduli operator needs N = 2");
  if (l < 0 || l > 2) throw IndexError("tangent direction must be 0, 1 or 2");
  return -quasi_periods(psi, a, x).coeffs[static_cast<std::size_t>(l)];
}

template <typename Evaluator>
std::vector<cplx> nabla_apply(const Evaluator& psi, const ModuliFunction& f, cplx x, double h) {
  return apply_tangent(theta2_all(psi, x), moduli_gradient(psi.params(), f, h));
}

/// nabla(x) f + sum_k Psi(x, y_k) d f / d y_k for a function of the surface
/// and the punctures.
using PuncturedFunction = std::function<cplx(const SchottkyParams&, const std::vector<cplx>&)>;

template <typename Evaluator>
cplx nabla_punctured_apply(const Evaluator& psi, const std::vector<cplx>& ys, const PuncturedFunction& f, cplx x,
                           double h) {
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (std::abs(x - ys[i]) < pole_tolerance) throw PoleError("x coincides with a puncture");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(ys[i] - ys[j]) < pole_tolerance) throw ConfigError("coincident punctures");
  }
  const ModuliFunction fm = [&](const SchottkyParams& q) { return std::vector<cplx>{f(q, ys)}; };
  cplx out = nabla_apply(psi, fm, x, h)[0];
  if (ys.empty()) return out;
  const auto psi_y = psi.values(x, ys);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const double s = h * std::max(1.0, std::abs(ys[k]));
    auto yp = ys, ym = ys;
    yp[k] += s;
    ym[k] -= s;
    out += psi_y[k] * (f(psi.params(), yp) - f(psi.params(), ym)) / (2.0 * s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// sl2(C) directions

/// -sum p_{a,l} D_{a,l} f with p_{a,l} the canonical coordinates of the
/// coboundary of P.
inline std::vector<cplx> sl2_apply(const SchottkyParams& p, const PolyForm& P, const ModuliFunction& f, double h) {
  if (P.weight() != 2) throw ConfigError("sl2 fields need N = 2");
  const auto x = canonical_coordinates(p, coboundary(p, P));
  TangentVector t(p.genus());
  for (int a = 1; a <= p.genus(); ++a)
    for (int l = 0; l < 3; ++l) t(a, l) = -x[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(l)];
  return apply_tangent(t, moduli_gradient(p, f, h));
}

/// sum_{a in +-1..+-g} p(W_a) d f / d W_a with the multipliers held fixed.
inline std::vector<cplx> fixed_point_flow(const SchottkyParams& p, const PolyForm& P, const ModuliFunction& f,
                                          double h) {
  std::vector<ClassicalHandle> cl;
  for (const auto& hp : p.handles) cl.push_back(to_classical(hp));
  std::vector<cplx> out;
  for (int a = 1; a <= p.genus(); ++a)
    for (int side = 0; side < 2; ++side) {
      const cplx W = side == 0 ? cl[static_cast<std::size_t>(a - 1)].W_plus : cl[static_cast<std::size_t>(a - 1)].W_minus;
      const double s = h * std::max(1.0, std::abs(W));
      auto moved = [&](double e) {
        SchottkyParams q = p;
        ClassicalHandle c = cl[static_cast<std::size_t>(a - 1)];
        (side == 0 ? c.W_plus : c.W_minus) += e;
        q.handle(a) = from_classical(c);
        require_valid(q, "fixed_point_flow");
        return f(q);
      };
      const auto fp = moved(s), fm = moved(-s);
      if (out.empty()) out.assign(fp.size(), cplx{});
      const cplx w = P.eval(W);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += w * (fp[c] - fm[c]) / (2.0 * s);
    }
  return out;
}

/// max over (a, l) of |D_{a,l}(gamma z) + Xi_{al}[gamma](z) gamma'(z)|,
/// relative to max(1, |Xi gamma'|).
inline double derivative_identity_residual(const SchottkyParams& p, const GroupWord& w, cplx z, double h) {
  const ModuliFunction f = [&](const SchottkyParams& q) { return std::vector<cplx>{word_map(q, w)(z)}; };
  const auto grad = moduli_gradient(p, f, h);
  const cplx dg = word_map(p, w).deriv(z);
  double worst = 0.0;
  for (int a = 1; a <= p.genus(); ++a)
    for (int l = 0; l < 3; ++l) {
      const cplx want = -cocycle_eval(p, canonical_cocycle(p, 2, a, l), w).eval(z) * dg;
      const cplx got = grad[static_cast<std::size_t>(3 * (a - 1) + l)][0];
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Period matrix

inline constexpr double beta_clearance = 0.1;  // fraction of a radius kept free around foreign discs
inline constexpr double period_gate_tolerance = 1e-10;
inline constexpr double nu_normalization_tolerance = 1e-8;

struct PeriodConfig {
  SeriesConfig series{};
  bool gate = true;      // 64- vs 128-node agreement
  bool certify = true;   // nu normalization before accepting
  int contour_nodes = 256;
  double gate_tol = period_gate_tolerance;
};

struct PeriodMatrix {
  std::vector<std::vector<cplx>> omega;  // [a-1][b-1]
  double symmetry_error = 0.0;
  double gate_error = 0.0;
  double normalization_error = 0.0;
  std::vector<std::vector<cplx>> paths;  // polyline of each beta_b

  [[nodiscard]] int genus() const { return static_cast<int>(omega.size()); }
  [[nodiscard]] cplx operator()(int a, int b) const {
    return omega.at(static_cast<std::size_t>(a - 1)).at(static_cast<std::size_t>(b - 1));
  }
  [[nodiscard]] std::vector<cplx> flat() const {
    std::vector<cplx> out;
    for (const auto& row : omega) out.insert(out.end(), row.begin(), row.end());
    return out;
  }
};

namespace detail {

/// Whether the segment [u, v] stays clear of every disc. A disc whose circle
/// holds an endpoint must be closest to the segment at that endpoint; other
/// discs need a margin of beta_clearance radii.
inline bool leg_clear(const SchottkyParams& p, cplx u, cplx v, int start_circle, int end_circle) {
  const cplx d = v - u;
  const double len2 = std::norm(d);
  for (int c : p.circle_indices()) {
    const cplx w = p.center(c);
    const double r = p.radius(c);
    const double t = std::clamp((std::conj(d) * (w - u)).real() / len2, 0.0, 1.0);
    if (c == start_circle) {
      if (t > 0.0) return false;
    } else if (c == end_circle) {
      if (t < 1.0) return false;
    } else if (std::abs(u + t * d - w) < (1.0 + beta_clearance) * r) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Polyline from z0 in C_b (the point nearest C_{-b}) to gamma_b z0 in
/// C_{-b}: the straight segment if clear, else the first clear two-leg
/// detour through z1 + R e^{i phi} n1 with n1 the outward normal at the end.
inline std::vector<cplx> beta_path(const SchottkyParams& p, int b) {
  const cplx wb = p.center(b), wm = p.center(-b);
  const cplx z0 = wb + p.radius(b) * (wm - wb) / std::abs(wm - wb);
  const cplx z1 = p.generator(b)(z0);
  if (detail::leg_clear(p, z0, z1, b, -b)) return {z0, z1};
  const double r = p.radius(-b);
  const cplx n1 = (z1 - wm) / std::abs(z1 - wm);
  for (double mult : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0})
    for (double deg : {60.0, -60.0, 80.0, -80.0, 30.0, -30.0}) {
      const cplx wp = z1 + mult * r * std::polar(1.0, deg * std::numbers::pi / 180.0) * n1;
      if (!in_fundamental_domain(p, wp)) continue;
      if (detail::leg_clear(p, z0, wp, b, 0) && detail::leg_clear(p, wp, z1, 0, -b)) return {z0, wp, z1};
    }
  std::ostringstream os;
  os << "no clear route for the cycle of handle " << b;
  throw PathBlockedError(os.str());
}

namespace detail {

template <int Nodes>
std::vector<cplx> polyline_integrals(const NormalizedDifferentials& nu, const std::vector<cplx>& path) {
  using rule = boost::math::quadrature::gauss<double, Nodes>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  // Nodes are symmetric pairs +-x_i; no centre node for even counts.
  static_assert(Nodes % 2 == 0);
  std::vector<cplx> pts, wts;
  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const cplx mid = 0.5 * (path[s] + path[s + 1]);
    const cplx half = 0.5 * (path[s + 1] - path[s]);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (double sign : {-1.0, 1.0}) {
        pts.push_back(mid + sign * x[i] * half);
        wts.push_back(w[i] * half);
      }
  }
  std::vector<std::vector<cplx>> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { vals[i] = nu.evaluate(pts[i]); });
  std::vector<KahanSum> acc(static_cast<std::size_t>(nu.genus()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += wts[i] * vals[i][a];
  std::vector<cplx> out;
  for (auto& k : acc) out.push_back(k.value());
  return out;
}

}  // namespace detail

/// max |(1/2 pi i) oint_{C_a} nu_b - delta_ab|.
inline double nu_normalization_error(const NormalizedDifferentials& nu, int n_nodes = 256,
                                     double gate_tol = contour_gate_tolerance) {
  const SchottkyParams& p = nu.params();
  double err = 0.0;
  for (int a = 1; a <= p.genus(); ++a) {
    const auto I = circle_integrals(CircleContour::isometric(p, a, n_nodes), static_cast<std::size_t>(p.genus()),
                                    [&](cplx z) { return nu.evaluate(z); }, gate_tol);
    for (int b = 1; b <= p.genus(); ++b)
      err = std::max(err, std::abs(I[static_cast<std::size_t>(b - 1)] / two_pi_i - (a == b ? 1.0 : 0.0)));
  }
  return err;
}

/// Omega_ab = (1/2 pi i) int nu_a along beta_b, with beta_b running from
/// gamma_b z0 back to z0.
inline PeriodMatrix period_matrix(const SchottkyParams& p, const PeriodConfig& cfg = {}) {
  require_valid(p, "period_matrix");
  const NormalizedDifferentials nu(p, cfg.series);
  const int g = p.genus();
  PeriodMatrix out;
  if (cfg.certify) {
    out.normalization_error = nu_normalization_error(nu, cfg.contour_nodes);
    if (out.normalization_error > nu_normalization_tolerance) {
      std::ostringstream os;
      os << "nu normalization error " << out.normalization_error;
      throw ConvergenceError(os.str());
    }
  }
  out.omega.assign(static_cast<std::size_t>(g), std::vector<cplx>(static_cast<std::size_t>(g)));
  for (int b = 1; b <= g; ++b) {
    const auto path = beta_path(p, b);
    out.paths.push_back(path);
    const auto I = detail::polyline_integrals<64>(nu, path);
    std::vector<cplx> fine;
    if (cfg.gate) fine = detail::polyline_integrals<128>(nu, path);
    for (int a = 1; a <= g; ++a) {
      const cplx v = -I[static_cast<std::size_t>(a - 1)] / two_pi_i;
      out.omega[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(b - 1)] = v;
      if (cfg.gate) {
        const cplx vf = -fine[static_cast<std::size_t>(a - 1)] / two_pi_i;
        out.gate_error = std::max(out.gate_error, std::abs(v - vf) / std::max(1.0, std::abs(v)));
      }
    }
  }
  if (cfg.gate && out.gate_error > cfg.gate_tol) {
    std::ostringstream os;
    os << "period quadrature not converged: 64 vs 128 nodes differ by " << out.gate_error;
    throw ConvergenceError(os.str());
  }
  for (int a = 1; a <= g; ++a)
    for (int b = 1; b < a; ++b) out.symmetry_error = std::max(out.symmetry_error, std::abs(out(a, b) - out(b, a)));
  return out;
}

/// Omega as a moduli function for finite differences: no gates (they are
/// established once on the base surface).
inline ModuliFunction period_function(const SeriesConfig& series) {
  return [series](const SchottkyParams& q) {
    PeriodConfig c;
    c.series = series;
    c.gate = false;
    c.certify = false;
    return period_matrix(q, c).flat();
  };
}

// ---------------------------------------------------------------------------
// Rauch

struct RauchSample {
  cplx x;
  std::vector<cplx> lhs;  // 2 pi i nabla Omega_ab, flattened [a][b]
  std::vector<cplx> rhs;  // nu_a(x) nu_b(x)
  double max_rel_error = 0.0;
};

struct RauchReport {
  double h = 0.0;
  std::vector<RauchSample> samples;
  double max_rel_error = 0.0;
};

/// Compares 2 pi i nabla(x) Omega_ab with nu_a(x) nu_b(x) given the
/// gradient of Omega (x-independent, so shared across samples and forms).
template <typename Evaluator>
RauchReport rauch_compare(const Evaluator& psi, const std::vector<std::vector<cplx>>& grad_omega,
                          const NormalizedDifferentials& nu, const std::vector<cplx>& xs, double h) {
  const int g = psi.params().genus();
  RauchReport rep;
  rep.h = h;
  for (const cplx x : xs) {
    RauchSample s;
    s.x = x;
    const auto lhs = apply_tangent(theta2_all(psi, x), grad_omega);
    const auto n = nu.evaluate(x);
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b) {
        const cplx l = two_pi_i * lhs[static_cast<std::size_t>(a * g + b)];
        const cplx r = n[static_cast<std::size_t>(a)] * n[static_cast<std::size_t>(b)];
        s.lhs.push_back(l);
        s.rhs.push_back(r);
        s.max_rel_error = std::max(s.max_rel_error, std::abs(l - r) / std::abs(r));
      }
    rep.max_rel_error = std::max(rep.max_rel_error, s.max_rel_error);
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

template <typename Evaluator>
RauchReport rauch_check(const Evaluator& psi, const std::vector<cplx>& xs, double h) {
  const SchottkyParams& p = psi.params();
  const SeriesConfig series = psi.spanning().bers().config();
  const auto grad = moduli_gradient(p, period_function(series), h);
  const NormalizedDifferentials nu(p, series);
  return rauch_compare(psi, grad, nu, xs, h);
}

}  // namespace schottky
