#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "schottky/config.hpp"
#include "schottky/contour.hpp"
#include "schottky/eichler.hpp"
#include "schottky/gem.hpp"
#include "schottky/group.hpp"
#include "schottky/poincare.hpp"
#include "schottky/variation.hpp"

namespace schottky {

// ---------------------------------------------------------------------------
// Reports

enum class Relation { below, at_least, equal, within };

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;  // tolerance, minimum, expected value or lower bound
  double upper = 0.0;  // upper bound for `within`
  Relation relation = Relation::below;
  bool pass = false;
};

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::below: return "<";
    case Relation::at_least: return ">=";
    case Relation::equal: return "==";
    case Relation::within: return "in";
  }
  return "?";
}

struct SuiteReport {
  std::string name;
  std::vector<Check> checks;
  json data = json::object();
  std::string error;  // set when the computation itself failed
  std::string skipped;  // reason, when the suite does not apply
  double wall_time = 0.0;

  [[nodiscard]] bool executed() const { return skipped.empty(); }
  [[nodiscard]] bool pass() const {
    if (!executed()) return true;
    if (!error.empty() || checks.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void below(const std::string& check, double value, double tol) {
    checks.push_back({check, value, tol, 0.0, Relation::below, value < tol});
  }
  void at_least(const std::string& check, double value, double minimum) {
    checks.push_back({check, value, minimum, 0.0, Relation::at_least, value >= minimum});
  }
  void equal(const std::string& check, double value, double expected) {
    checks.push_back({check, value, expected, 0.0, Relation::equal, value == expected});
  }
  void within(const std::string& check, double value, double lo, double hi) {
    checks.push_back({check, value, lo, hi, Relation::within, value >= lo && value <= hi});
  }
};

inline json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json suite_to_json(const SuiteReport& r) {
  json j;
  j["name"] = r.name;
  j["status"] = !r.executed() ? "skipped" : (r.pass() ? "pass" : "fail");
  if (!r.executed()) j["reason"] = r.skipped;
  if (!r.error.empty()) j["error"] = r.error;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json cj = {{"name", c.name}, {"value", finite_or_string(c.value)}, {"relation", relation_name(c.relation)},
               {"pass", c.pass}};
    if (c.relation == Relation::within)
      cj["bounds"] = json::array({c.limit, c.upper});
    else
      cj["limit"] = c.limit;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["data"] = r.data;
  j["wall_time_s"] = r.wall_time;
  return j;
}

inline void print_suite(std::ostream& os, const SuiteReport& r) {
  os << "suite " << r.name << ": ";
  if (!r.executed()) {
    os << "SKIPPED (" << r.skipped << ")\n";
    return;
  }
  os << (r.pass() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(1) << r.wall_time << " s)\n";
  os << std::defaultfloat << std::setprecision(4);
  for (const auto& c : r.checks) {
    os << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << c.value << ' ' << relation_name(c.relation) << ' ';
    if (c.relation == Relation::within)
      os << '[' << c.limit << ", " << c.upper << "]\n";
    else
      os << c.limit << '\n';
  }
  if (!r.error.empty()) os << "  error: " << r.error << '\n';
}

/// Drops timing and worker-count fields so reports from different runs can
/// be compared byte for byte.
inline json strip_run_fields(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (const auto& item : j.items()) {
      if (item.key() == "wall_time_s" || item.key() == "workers") continue;
      out[item.key()] = strip_run_fields(item.value());
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& e : j) out.push_back(strip_run_fields(e));
    return out;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Shared state for one run

/// Deterministic draws independent of the standard library's distribution
/// implementations.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  cplx point(double half_width) { return {uniform(-half_width, half_width), uniform(-half_width, half_width)}; }

  GroupWord word(int genus, int max_len) {
    const int n = integer(0, max_len);
    GroupWord w;
    while (static_cast<int>(w.length()) < n) {
      const int a = integer(1, genus);
      const int l = integer(0, 1) ? a : -a;
      if (!w.letters.empty() && w.letters.back() == -l) continue;
      w.letters.push_back(l);
    }
    return w;
  }

 private:
  std::mt19937_64 gen_;
};

class Context {
 public:
  explicit Context(RunConfig cfg) : cfg_(std::move(cfg)) {}

  [[nodiscard]] const RunConfig& config() const { return cfg_; }
  [[nodiscard]] const SchottkyParams& surface() const { return cfg_.surface; }

  [[nodiscard]] GemConfig gem_config() const {
    GemConfig g;
    g.series = cfg_.series;
    g.contour_nodes = cfg_.contour_nodes;
    g.J = cfg_.J;
    g.check_nodes = cfg_.duality_nodes;
    g.check_scale = cfg_.duality_scale;
    return g;
  }

  const CanonicalGem& gem() {
    if (gem_failure_) std::rethrow_exception(gem_failure_);
    if (!gem_) {
      try {
        gem_ = std::make_unique<CanonicalGem>(canonical_gem(cfg_.surface, cfg_.N, gem_config()));
      } catch (...) {
        gem_failure_ = std::current_exception();
        throw;
      }
    }
    return *gem_;
  }

  const NormalizedDifferentials& nu() {
    if (!nu_) nu_ = std::make_unique<NormalizedDifferentials>(cfg_.surface, cfg_.series);
    return *nu_;
  }

  [[nodiscard]] PeriodConfig period_config() const {
    PeriodConfig c;
    c.series = cfg_.series;
    c.contour_nodes = cfg_.contour_nodes;
    return c;
  }

  const PeriodMatrix& periods() {
    if (!periods_) periods_ = std::make_unique<PeriodMatrix>(period_matrix(cfg_.surface, period_config()));
    return *periods_;
  }

  const std::vector<std::vector<cplx>>& period_gradient(double h) {
    auto it = gradients_.find(h);
    if (it == gradients_.end())
      it = gradients_.emplace(h, moduli_gradient(cfg_.surface, period_function(cfg_.series), h)).first;
    return it->second;
  }

 private:
  RunConfig cfg_;
  std::unique_ptr<CanonicalGem> gem_;
  std::exception_ptr gem_failure_;
  std::unique_ptr<NormalizedDifferentials> nu_;
  std::unique_ptr<PeriodMatrix> periods_;
  std::map<double, std::vector<std::vector<cplx>>> gradients_;
};

// ---------------------------------------------------------------------------
// Suites

namespace suites {

inline json word_json(const GroupWord& w) { return w.letters; }

inline json matrix_json(const std::vector<std::vector<cplx>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(to_json_value(row));
  return out;
}

inline cplx residue_of(const std::function<cplx(cplx)>& f, cplx at, const RunConfig& c) {
  return circle_integral(f, CircleContour{at, c.residue_radius, c.residue_nodes}) / two_pi_i;
}

inline void validity(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  const auto rep = validate(p);
  r.data["valid"] = rep.valid();
  json bad = json::array();
  for (const auto& v : rep.violations)
    bad.push_back({{"circles", {v.circle_u, v.circle_v}}, {"distance", v.distance}, {"required", v.required}});
  r.data["violations"] = bad;
  r.data["zero_rho"] = rep.zero_rho;
  r.equal("disc_disjointness_violations", static_cast<double>(rep.violations.size() + rep.zero_rho.size()), 0.0);
  if (!rep.valid()) return;

  double trip = 0.0;
  json classical = json::array();
  for (const auto& h : p.handles) {
    const ClassicalHandle cl = to_classical(h);
    const HandleParams back = from_classical(cl);
    const ClassicalHandle again = to_classical(back);
    trip = std::max({trip, std::abs(back.w_plus - h.w_plus), std::abs(back.w_minus - h.w_minus),
                     std::abs(back.rho - h.rho), std::abs(again.W_plus - cl.W_plus),
                     std::abs(again.W_minus - cl.W_minus), std::abs(again.q - cl.q)});
    classical.push_back({{"W_plus", to_json_value(cl.W_plus)}, {"W_minus", to_json_value(cl.W_minus)},
                         {"q", to_json_value(cl.q)}});
  }
  r.data["classical"] = classical;
  r.below("classical_round_trip", trip, c.tol("validity.round_trip"));

  SampleStream rng(c.seed + 1);
  const double box = 2.0 * p.max_center_modulus() + 1.0;
  double sew = 0.0;
  for (int a = 1; a <= p.genus(); ++a) {
    const HandleParams& h = p.handle(a);
    const MoebiusMap g = p.generator(a);
    for (int i = 0; i < c.sewing_points;) {
      const cplx z = rng.point(box);
      if (std::abs(z - h.w_plus) < 1e-3 * h.radius()) continue;
      sew = std::max(sew, std::abs((g(z) - h.w_minus) * (z - h.w_plus) - h.rho));
      ++i;
    }
  }
  r.below("sewing_identity", sew, c.tol("validity.sewing"));
}

inline void cocycle(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  const int g = p.genus();
  SampleStream rng(c.seed + 2);
  Cocycle X = Cocycle::zero(c.N, g);
  for (auto& v : X.generator_values)
    for (int k = 0; k < v.size(); ++k) v[k] = rng.point(1.0);
  double law = 0.0;
  for (int i = 0; i < c.cocycle_pairs; ++i) {
    const GroupWord w1 = rng.word(g, c.cocycle_max_len);
    const GroupWord w2 = rng.word(g, c.cocycle_max_len);
    law = std::max(law, cocycle_law_residual(p, X, w1, w2));
  }
  r.data["pairs"] = c.cocycle_pairs;
  r.below("cocycle_law", law, c.tol("cocycle.law"));

  double rec = canonical_reconstruction_error(p, X);
  for (int m = 0; m <= 2 * c.N - 2; ++m)
    rec = std::max(rec, canonical_reconstruction_error(p, coboundary(p, PolyForm::monomial(c.N, m))));
  r.below("canonical_decomposition", rec, c.tol("cocycle.decomposition"));
}

inline void residue(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  const BersSeries B(p, c.N, c.series);
  const cplx y0 = c.y_grid.at(0);

  double per = 0.0;
  for (const cplx x : c.x_samples) {
    const cplx base = B.value(x, y0);
    for (int l : p.circle_indices()) {
      const MoebiusMap m = p.generator(l);
      per = std::max(per, std::abs(B.value(m(x), y0) * detail_pow(m.deriv(x), c.N) - base));
    }
  }
  r.below("x_periodicity", per, c.tol("residue.periodicity"));

  double res = 0.0;
  for (const cplx y : c.y_grid)
    res = std::max(res, std::abs(residue_of([&](cplx x) { return B.value(x, y); }, y, c) - 1.0));
  r.below("diagonal_residue", res, c.tol("residue.residue"));

  const auto shells = shell_report(p, SeriesKind::bers, c.N, c.series, c.x_samples.at(0), y0);
  json terms = json::array();
  int violations = 0;
  for (const auto& s : shells) terms.push_back(s.max_term);
  for (std::size_t l = 3; l < shells.size(); ++l)
    if (!(shells[l].max_term < shells[l - 1].max_term)) ++violations;
  r.data["shell_max_term"] = terms;
  r.equal("shell_decay_violations", violations, 0.0);
}

inline void rank(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  json cases = json::array();
  for (const auto& rc : c.rank_cases) {
    const SchottkyParams q = rc.surface ? *rc.surface : c.surface;
    const int L = rc.L ? *rc.L : c.series.L;
    const int g = q.genus();
    const int expected = rc.expected ? *rc.expected : differential_dimension(g, rc.N);
    const std::string tag = "[g=" + std::to_string(g) + ",N=" + std::to_string(rc.N) + ",L=" + std::to_string(L) + "]";
    json cj = {{"genus", g}, {"N", rc.N}, {"L", L}, {"expected", expected}};
    try {
      Eigen::MatrixXcd M;
      if (same_surface(q, c.surface) && rc.N == c.N && L == c.series.L) {
        M = ctx.gem().selection.pairing;
      } else {
        const SpanningTheta th(q, rc.N, SeriesConfig{L, c.series.shell_tol, c.series.cap});
        M = pairing_matrix(th, c.contour_nodes);
      }
      const BasisSelection sel = pairing_spectrum(M, g, rc.N);
      cj["singular_values"] = sel.singular_values;
      cj["rank"] = sel.rank;
      cj["gap"] = finite_or_string(sel.gap);
      r.equal("rank" + tag, sel.rank, expected);
      r.at_least("gap" + tag, sel.gap, c.tol("rank.gap"));
    } catch (const Error& e) {
      cj["error"] = e.what();
      r.equal("rank" + tag, NAN, expected);
    }
    cases.push_back(cj);
  }
  r.data["cases"] = cases;
}

inline void quasiperiod(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const BersSeries B(c.surface, c.N, c.series);
  double worst = 0.0;
  for (const cplx x : c.x_samples)
    for (const auto& q : all_quasi_periods(B, x, 0.0)) worst = std::max(worst, q.residual);
  r.below("bers_held_out_residual", worst, c.tol("quasiperiod.residual"));
  const CanonicalGem& G = ctx.gem();
  worst = 0.0;
  for (const cplx x : c.x_samples)
    for (const auto& q : all_quasi_periods(G, x, 0.0)) worst = std::max(worst, q.residual);
  r.below("gem_held_out_residual", worst, c.tol("quasiperiod.residual"));
}

inline json basis_json(const CanonicalGem& G) {
  json J = json::array();
  for (auto [a, k] : G.selection.J) J.push_back({a, k});
  return {{"J", J},
          {"rows", G.selection.rows},
          {"singular_values", G.selection.singular_values},
          {"rank", G.selection.rank},
          {"gap", finite_or_string(G.selection.gap)},
          {"dual_condition", G.dual_condition},
          {"correction_residual", G.correction_residual}};
}

inline void duality(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const CanonicalGem& G = ctx.gem();
  r.data["basis"] = basis_json(G);
  r.below("dual_pairing_delta", duality_error(G, c.duality_nodes, c.duality_scale), c.tol("duality.delta"));
}

inline void coboundary_pairing(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const CanonicalGem& G = ctx.gem();
  double worst = 0.0;
  json per = json::array();
  for (int j = 0; j <= 2 * c.N - 2; ++j) {
    const double e = coboundary_annihilation(c.surface, G.selection.pairing, c.N, j);
    per.push_back(e);
    worst = std::max(worst, e);
  }
  r.data["per_monomial"] = per;
  r.below("coboundary_pairing", worst, c.tol("coboundary.pairing"));
}

inline void canonical(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  const CanonicalGem& G = ctx.gem();
  const auto& J = G.selection.J;

  double qp = 0.0;
  for (const cplx x : c.x_samples) {
    const auto q = all_quasi_periods(G, x, 0.0);
    const auto dual = G.dual_values(x);
    for (int a = 1; a <= p.genus(); ++a)
      for (int k = 0; k < handle_dimension(c.N); ++k) {
        cplx want{};
        for (std::size_t j = 0; j < J.size(); ++j)
          if (J[j] == std::pair{a, k}) want = -dual[j];
        qp = std::max(qp, std::abs(q[static_cast<std::size_t>(a - 1)].coeffs[static_cast<std::size_t>(k)] - want));
      }
  }
  r.below("quasi_period_match", qp, c.tol("canonical.quasi_period"));

  const cplx y = c.y_inside;
  if (in_fundamental_domain(p, y)) throw ConfigError("samples.y_inside must lie inside one of the discs");
  const Reduction red = reduce(p, y);
  r.data["y_inside_word"] = word_json(red.word);
  const cplx ys[1] = {y};
  const auto I = cocycle_contour(G, J, ys, c.contour_nodes);
  double tr = 0.0;
  for (std::size_t j = 0; j < J.size(); ++j) {
    const cplx want = cocycle_eval(p, canonical_cocycle(p, c.N, J[j].first, J[j].second), red.word).eval(y);
    tr = std::max(tr, std::abs(I[j][0] - want));
  }
  r.below("in_disc_translation", tr, c.tol("canonical.translate"));
}

inline void gemcont(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const CanonicalGem& G = ctx.gem();
  const auto I = cocycle_contour(G, G.selection.J, c.y_grid, c.contour_nodes);
  double worst = 0.0;
  for (const auto& row : I)
    for (const cplx& v : row) worst = std::max(worst, std::abs(v));
  const auto raw = cocycle_contour(G.theta->bers(), G.selection.J, c.y_grid, c.contour_nodes);
  double raw_worst = 0.0;
  for (const auto& row : raw)
    for (const cplx& v : row) raw_worst = std::max(raw_worst, std::abs(v));
  r.data["uncorrected_bers"] = raw_worst;
  r.below("cocycle_contour", worst, c.tol("gemcont.cocycle_contour"));
}

inline void nu_norm(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  const ThirdKind w(p, c.series);
  double res = 0.0;
  for (const cplx y : c.y_grid) {
    const auto f = [&](cplx x) { return w.value(x, y); };
    res = std::max(res, std::abs(residue_of(f, y, c) - 1.0));
    res = std::max(res, std::abs(residue_of(f, 0.0, c) + 1.0));
  }
  r.below("third_kind_residues", res, c.tol("nu.residue"));

  const NormalizedDifferentials& nu = ctx.nu();
  const NormalizedDifferentials moved(p, c.nu_base, c.series);
  r.data["base_points"] = json::array({to_json_value(nu.base_point()), to_json_value(c.nu_base)});
  double base = 0.0;
  std::vector<cplx> xs = c.x_samples;
  xs.insert(xs.end(), c.y_grid.begin(), c.y_grid.end());
  for (const cplx x : xs) {
    const auto u = nu.evaluate(x), v = moved.evaluate(x);
    for (std::size_t a = 0; a < u.size(); ++a) base = std::max(base, std::abs(u[a] - v[a]));
  }
  r.below("nu_base_point", base, c.tol("nu.base_point"));
  r.below("nu_normalization", nu_normalization_error(nu, c.contour_nodes), c.tol("nu.normalization"));
}

inline void period(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams q1 = c.genus_one_surface();
  if (q1.genus() != 1) throw ConfigError("period.genus_one must have a single handle");
  PeriodConfig pc1 = ctx.period_config();
  pc1.series.L = c.genus_one_L;
  const PeriodMatrix P1 = period_matrix(q1, pc1);
  const cplx want = std::log(to_classical(q1.handle(1)).q) / two_pi_i;
  cplx diff = P1(1, 1) - want;
  diff.real(diff.real() - std::round(diff.real()));  // the branch of log q is immaterial
  r.data["genus_one"] = {{"omega", to_json_value(P1(1, 1))}, {"log_q_over_2pi_i", to_json_value(want)}};
  r.below("genus_one_exact", std::abs(diff), c.tol("period.genus_one"));

  const PeriodMatrix& P = ctx.periods();
  r.data["omega"] = matrix_json(P.omega);
  r.data["gate_error"] = P.gate_error;
  r.data["normalization_error"] = P.normalization_error;
  r.below("symmetry", P.symmetry_error, c.tol("period.symmetry"));

  const MoebiusMap M(c.transport[0], c.transport[1], c.transport[2], c.transport[3]);
  const PeriodMatrix PT = period_matrix(transport(c.surface, M), ctx.period_config());
  double tr = 0.0;
  for (int a = 1; a <= P.genus(); ++a)
    for (int b = 1; b <= P.genus(); ++b) tr = std::max(tr, std::abs(PT(a, b) - P(a, b)));
  r.below("transport_invariance", tr, c.tol("period.transport"));
}

inline json rauch_json(const RauchReport& R) {
  json s = json::array();
  for (const auto& smp : R.samples)
    s.push_back({{"x", to_json_value(smp.x)},
                 {"lhs", to_json_value(smp.lhs)},
                 {"rhs", to_json_value(smp.rhs)},
                 {"max_rel_error", smp.max_rel_error}});
  return {{"h", R.h}, {"max_rel_error", R.max_rel_error}, {"samples", s}};
}

inline void rauch(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const CanonicalGem& G = ctx.gem();
  const NormalizedDifferentials& nu = ctx.nu();
  const auto& grad = ctx.period_gradient(c.h);
  const RauchReport R = rauch_compare(G.form, grad, nu, c.x_samples, c.h);
  r.data["canonical"] = rauch_json(R);
  r.below("relative_error", R.max_rel_error, c.tol("rauch.relative"));

  const GemForm bers(G.theta);
  const RauchReport RB = rauch_compare(bers, grad, nu, c.x_samples, c.h);
  double inv = 0.0;
  for (std::size_t i = 0; i < R.samples.size(); ++i)
    for (std::size_t k = 0; k < R.samples[i].lhs.size(); ++k)
      inv = std::max(inv, std::abs(R.samples[i].lhs[k] - RB.samples[i].lhs[k]) / std::abs(R.samples[i].rhs[k]));
  r.data["uncorrected_bers_error"] = RB.max_rel_error;
  r.below("gem_invariance", inv, c.tol("rauch.gem_invariance"));

  const double h1 = c.order_h, h2 = 0.5 * c.order_h;
  const double e1 = rauch_compare(G.form, ctx.period_gradient(h1), nu, c.x_samples, h1).max_rel_error;
  const double e2 = rauch_compare(G.form, ctx.period_gradient(h2), nu, c.x_samples, h2).max_rel_error;
  r.data["order_errors"] = json::array({e1, e2});
  r.within("error_order", std::log2(e1 / e2), c.tol("rauch.order_min"), c.tol("rauch.order_max"));
}

inline void punctured(Context& ctx, SuiteReport& r) {
  const RunConfig& c = ctx.config();
  const SchottkyParams& p = c.surface;
  double d = 0.0;
  for (const auto& w : c.words) d = std::max(d, derivative_identity_residual(p, GroupWord{w}, c.word_point, c.h));
  r.below("moduli_derivative_identity", d, c.tol("punctured.derivative"));

  if (c.punctures.empty()) throw ConfigError("the punctured suite needs at least one puncture");
  const CanonicalGem& G = ctx.gem();
  const int a = c.covariance_generator;
  const std::vector<cplx> ys{c.punctures[0]};
  const PuncturedFunction f = [a](const SchottkyParams& q, const std::vector<cplx>& y) { return q.generator(a)(y[0]); };
  const cplx x = c.x_samples.at(0);
  const cplx lhs = nabla_punctured_apply(G, ys, f, x, c.h);
  const cplx rhs = G.value(x, p.generator(a)(ys[0]));
  r.data["covariance"] = {{"lhs", to_json_value(lhs)}, {"rhs", to_json_value(rhs)}};
  r.below("puncture_covariance", std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)), c.tol("punctured.covariance"));
}

struct SuiteEntry {
  const char* name;
  void (*run)(Context&, SuiteReport&);
  int min_genus;
  bool needs_weight_two;
};

inline const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> entries{
      {"validity", validity, 1, false},
      {"cocycle", cocycle, 1, false},
      {"residue", residue, 2, false},
      {"rank", rank, 1, false},
      {"quasiperiod", quasiperiod, 2, false},
      {"duality", duality, 2, false},
      {"coboundary", coboundary_pairing, 2, false},
      {"canonical", canonical, 2, false},
      {"gemcont", gemcont, 2, false},
      {"nu-norm", nu_norm, 1, false},
      {"period", period, 1, false},
      {"rauch", rauch, 2, true},
      {"punctured", punctured, 2, true},
  };
  return entries;
}

}  // namespace suites

inline std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& e : suites::registry()) out.emplace_back(e.name);
  return out;
}

inline SuiteReport run_suite(Context& ctx, const std::string& name) {
  const auto& reg = suites::registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return name == e.name; });
  if (it == reg.end()) throw ConfigError("unknown suite '" + name + "'");
  SuiteReport r;
  r.name = name;
  const RunConfig& c = ctx.config();
  if (c.surface.genus() < it->min_genus) {
    r.skipped = "needs genus >= " + std::to_string(it->min_genus);
    return r;
  }
  if (it->needs_weight_two && c.N != 2) {
    r.skipped = "needs N = 2";
    return r;
  }
  if (name == "rank" && c.rank_cases.empty()) {
    r.skipped = "no rank cases configured";
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    it->run(ctx, r);
  } catch (const Error& e) {
    r.error = e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct RunReport {
  json config;
  std::vector<SuiteReport> suites;

  [[nodiscard]] bool pass() const {
    for (const auto& s : suites)
      if (!s.pass()) return false;
    return true;
  }

  [[nodiscard]] json to_json() const {
    json j;
    j["config"] = config;
    json arr = json::array();
    for (const auto& s : suites) arr.push_back(suite_to_json(s));
    j["suites"] = arr;
    j["pass"] = pass();
    j["workers"] = workers();
    return j;
  }
};

/// Runs the named suites in order against one shared context.
inline RunReport run_suites(const RunConfig& cfg, const std::vector<std::string>& names,
                            std::ostream* progress = nullptr) {
  Context ctx(cfg);
  RunReport rep;
  rep.config = config_to_json(cfg);
  for (const auto& n : names) {
    rep.suites.push_back(run_suite(ctx, n));
    if (progress) print_suite(*progress, rep.suites.back());
  }
  return rep;
}

}  // namespace schottky
