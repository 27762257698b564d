#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "schottky/group.hpp"
#include "schottky/kahan.hpp"
#include "schottky/types.hpp"

namespace schottky {

/// Truncation control for every Poincare series: the sum runs over all
/// reduced words of length <= L.
struct SeriesConfig {
  int L = 10;
  double shell_tol = 1e-12;
  std::size_t cap = default_word_cap;
};

inline constexpr double pole_tolerance = 1e-12;
inline constexpr double limit_point_floor = 1e-13;

// ---------------------------------------------------------------------------
// Limit points

struct LimitPointSet {
  std::vector<cplx> points;
  std::vector<GroupWord> words;  // the word whose attracting fixed point each is
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

inline constexpr double limit_point_separation = 1e-6;

/// Attracting fixed points of gamma_1, ..., gamma_g, then of the words of
/// length 2, 3, ... in enumeration order, skipping near-duplicates.
inline LimitPointSet limit_points(const SchottkyParams& p, int n, int max_search_len = 6) {
  require_valid(p, "limit_points");
  if (n < 1) throw ConfigError("limit_points needs n >= 1");
  LimitPointSet out;
  auto consider = [&](const GroupWord& w) {
    const auto fp = fixed_points(word_map(p, w));
    if (fp.attracting.is_infinity()) return;
    const cplx z = fp.attracting.value();
    for (const cplx& q : out.points)
      if (std::abs(q - z) <= limit_point_separation) return;
    out.points.push_back(z);
    out.words.push_back(w);
  };
  for (int a = 1; a <= p.genus() && static_cast<int>(out.size()) < n; ++a) consider(GroupWord{{a}});
  if (static_cast<int>(out.size()) < n) {
    const Enumeration e(p, max_search_len);
    for (std::size_t i = e.shell_begin(2); i < e.size() && static_cast<int>(out.size()) < n; ++i)
      consider(e[i].word);
  }
  if (static_cast<int>(out.size()) < n) {
    std::ostringstream os;
    os << "found only " << out.size() << " distinct limit points, need " << n;
    throw ConvergenceError(os.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orbit tables and the Cauchy-sum kernel

/// Per-x data for a Poincare series: u_gamma = gamma(x) and a weight
/// c_gamma, laid out by shell. Every series here has the form
/// sum_gamma c_gamma * K(u_gamma, y).
struct OrbitTable {
  std::vector<double> ur, ui, cr, ci;
  std::vector<std::size_t> shell_begin;  // size L + 2
  [[nodiscard]] int shells() const { return static_cast<int>(shell_begin.size()) - 1; }
};

struct CauchySums {
  std::vector<cplx> total;       // per y
  std::vector<cplx> last_shell;  // per y, contribution of the longest words
};

namespace detail {

inline void throw_pole(double min_den) {
  std::ostringstream os;
  os << "series term pole: |gamma x - y| = " << std::sqrt(min_den);
  throw PoleError(os.str());
}

/// sum_gamma c_gamma * (1/(u - y_k) - [has_z] 1/(u - z_k)), shell by shell,
/// with compensated accumulation inside each shell and across shells.
inline CauchySums cauchy_kernel(const OrbitTable& t, std::span<const cplx> ys,
                                std::span<const cplx> zs) {
  const std::size_t K = ys.size();
  const bool has_z = !zs.empty();
  std::vector<double> yr(K), yi(K), zr(K), zi(K), gr(K), gi(K);
  for (std::size_t k = 0; k < K; ++k) {
    yr[k] = ys[k].real();
    yi[k] = ys[k].imag();
    if (has_z) {
      zr[k] = zs[k].real();
      zi[k] = zs[k].imag();
      gr[k] = yr[k] - zr[k];
      gi[k] = yi[k] - zi[k];
    }
  }
  std::vector<KahanSum> total(K);
  std::vector<double> sr(K), si(K), er(K), ei(K), min_den(K, INFINITY);
  CauchySums out;
  out.last_shell.assign(K, cplx{});
  const int shells = t.shells();
  for (int s = 0; s < shells; ++s) {
    std::fill(sr.begin(), sr.end(), 0.0);
    std::fill(si.begin(), si.end(), 0.0);
    std::fill(er.begin(), er.end(), 0.0);
    std::fill(ei.begin(), ei.end(), 0.0);
    const std::size_t lo = t.shell_begin[static_cast<std::size_t>(s)];
    const std::size_t hi = t.shell_begin[static_cast<std::size_t>(s) + 1];
    for (std::size_t g = lo; g < hi; ++g) {
      const double ur = t.ur[g], ui = t.ui[g], cr = t.cr[g], ci = t.ci[g];
      for (std::size_t k = 0; k < K; ++k) {
        double dr = ur - yr[k], di = ui - yi[k];
        double den = dr * dr + di * di;
        min_den[k] = std::min(min_den[k], den);
        double nr_ = cr, ni_ = ci;
        if (has_z) {
          // 1/(u - y) - 1/(u - z) = (y - z) / ((u - y)(u - z))
          const double fr = ur - zr[k], fi = ui - zi[k];
          min_den[k] = std::min(min_den[k], fr * fr + fi * fi);
          const double pr = dr * fr - di * fi, pi = dr * fi + di * fr;
          dr = pr;
          di = pi;
          den = pr * pr + pi * pi;
          nr_ = cr * gr[k] - ci * gi[k];
          ni_ = cr * gi[k] + ci * gr[k];
        }
        const double inv = 1.0 / den;
        // c / d = c * conj(d) / |d|^2
        const double tr = (nr_ * dr + ni_ * di) * inv;
        const double ti = (ni_ * dr - nr_ * di) * inv;
        const double ar = tr - er[k];
        const double nr = sr[k] + ar;
        er[k] = (nr - sr[k]) - ar;
        sr[k] = nr;
        const double ai = ti - ei[k];
        const double ni = si[k] + ai;
        ei[k] = (ni - si[k]) - ai;
        si[k] = ni;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      total[k].add(sr[k], si[k]);
      if (s == shells - 1) out.last_shell[k] = {sr[k], si[k]};
    }
  }
  const double tol2 = pole_tolerance * pole_tolerance;
  for (std::size_t k = 0; k < K; ++k)
    if (min_den[k] < tol2) throw_pole(min_den[k]);
  out.total.resize(K);
  for (std::size_t k = 0; k < K; ++k) out.total[k] = total[k].value();
  return out;
}

/// u = gamma(x) and gamma'(x) for every enumerated word, in shell layout.
/// `weight_fn(u, dgamma)` returns c_gamma.
template <typename WeightFn>
OrbitTable build_orbit(const Enumeration& e, cplx x, WeightFn&& weight_fn) {
  OrbitTable t;
  const std::size_t n = e.size();
  t.ur.resize(n);
  t.ui.resize(n);
  t.cr.resize(n);
  t.ci.resize(n);
  const double xr = x.real(), xi = x.imag();
  const double* m = e.coefficients();
  double min_den = INFINITY;
  for (std::size_t i = 0; i < n; ++i, m += 8) {
    const double dr = m[4] * xr - m[5] * xi + m[6];
    const double di = m[4] * xi + m[5] * xr + m[7];
    const double dd = dr * dr + di * di;
    min_den = std::min(min_den, dd);
    const double s = 1.0 / dd;
    const double ir = dr * s, ii = -di * s;
    const double nr = m[0] * xr - m[1] * xi + m[2];
    const double ni = m[0] * xi + m[1] * xr + m[3];
    const cplx u{nr * ir - ni * ii, nr * ii + ni * ir};
    const cplx c = weight_fn(u, cplx{ir * ir - ii * ii, 2.0 * ir * ii});
    t.ur[i] = u.real();
    t.ui[i] = u.imag();
    t.cr[i] = c.real();
    t.ci[i] = c.imag();
  }
  if (!(min_den > 1e-300)) throw PoleError("x is mapped to infinity by an enumerated word");
  for (int l = 0; l <= e.max_len() + 1; ++l) t.shell_begin.push_back(e.shell_begin(l));
  return t;
}

/// 1/z without the library's overflow-recovery path.
inline cplx recip(cplx z) {
  const double s = 1.0 / (z.real() * z.real() + z.imag() * z.imag());
  return {z.real() * s, -z.imag() * s};
}

inline cplx ipow(cplx z, int n) {
  cplx r{1.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bers series

/// Truncated Bers Poincare series
///   Psi_N(x, y) = sum_gamma gamma'(x)^N / (gamma x - y) prod_j (y - A_j)/(gamma x - A_j),
/// returned as the coefficient of dx^N dy^{1-N}.
class BersSeries {
 public:
  BersSeries(const SchottkyParams& p, int N, LimitPointSet A, SeriesConfig cfg = {})
      : params_(p), N_(N), A_(std::move(A)), cfg_(cfg) {
    require_valid(p, "bers");
    if (N < 2) throw ConfigError("Bers series needs N >= 2");
    if (static_cast<int>(A_.size()) != 2 * N - 1)
      throw ConfigError("Bers series needs exactly 2N-1 limit points");
    if (cfg.L < 0) throw ConfigError("truncation L must be >= 0");
    enumeration_ = std::make_shared<const Enumeration>(p, cfg.L, cfg.cap);
  }

  BersSeries(const SchottkyParams& p, int N, SeriesConfig cfg = {})
      : BersSeries(p, N, limit_points(p, 2 * N - 1), cfg) {}

  [[nodiscard]] int weight() const { return N_; }
  [[nodiscard]] const SchottkyParams& params() const { return params_; }
  [[nodiscard]] const LimitPointSet& limit_set() const { return A_; }
  [[nodiscard]] const SeriesConfig& config() const { return cfg_; }
  [[nodiscard]] const Enumeration& enumeration() const { return *enumeration_; }

  [[nodiscard]] OrbitTable orbit(cplx x) const {
    return detail::build_orbit(*enumeration_, x, [this](cplx u, cplx dg) {
      cplx prod{1.0};
      for (const cplx& a : A_.points) {
        // Words that push x onto a limit point to rounding level contribute
        // far below double resolution (gamma'(x) shrinks at the same rate).
        if (std::abs(u - a) < limit_point_floor * (1.0 + std::abs(a))) return cplx{};
        prod *= (u - a);
      }
      return detail::ipow(dg, N_) * detail::recip(prod);
    });
  }

  [[nodiscard]] std::vector<cplx> values(const OrbitTable& t, std::span<const cplx> ys) const {
    auto sums = detail::cauchy_kernel(t, ys, {});
    for (std::size_t k = 0; k < ys.size(); ++k) sums.total[k] *= prefactor(ys[k]);
    return std::move(sums.total);
  }

  [[nodiscard]] std::vector<cplx> values(cplx x, std::span<const cplx> ys) const {
    return values(orbit(x), ys);
  }

  [[nodiscard]] cplx value(cplx x, cplx y) const {
    const cplx ys[1] = {y};
    return values(x, ys)[0];
  }

  /// Magnitude of the contribution of the longest words at (x, y).
  [[nodiscard]] double last_shell_norm(cplx x, cplx y) const {
    const cplx ys[1] = {y};
    const auto sums = detail::cauchy_kernel(orbit(x), ys, {});
    return std::abs(sums.last_shell[0] * prefactor(y));
  }

  /// prod_j (y - A_j)
  [[nodiscard]] cplx prefactor(cplx y) const {
    cplx prod{1.0};
    for (const cplx& a : A_.points) prod *= (y - a);
    return prod;
  }

 private:
  SchottkyParams params_;
  int N_;
  LimitPointSet A_;
  SeriesConfig cfg_;
  std::shared_ptr<const Enumeration> enumeration_;
};

// ---------------------------------------------------------------------------
// Differential of the third kind and normalized 1-differentials

/// omega_{y-0}(x) = sum_gamma gamma'(x) (1/(gamma x - y) - 1/(gamma x)).
class ThirdKind {
 public:
  ThirdKind(const SchottkyParams& p, SeriesConfig cfg = {}) : params_(p), cfg_(cfg) {
    require_valid(p, "third_kind");
    if (!in_fundamental_domain(p, 0.0)) throw InvalidParamsError("third kind needs 0 in the fundamental domain");
    enumeration_ = std::make_shared<const Enumeration>(p, cfg.L, cfg.cap);
  }

  [[nodiscard]] int weight() const { return 1; }
  [[nodiscard]] const SchottkyParams& params() const { return params_; }
  [[nodiscard]] const Enumeration& enumeration() const { return *enumeration_; }

  [[nodiscard]] OrbitTable orbit(cplx x) const {
    return detail::build_orbit(*enumeration_, x, [](cplx, cplx dg) { return dg; });
  }

  [[nodiscard]] std::vector<cplx> values(cplx x, std::span<const cplx> ys) const {
    const std::vector<cplx> zeros(ys.size(), cplx{});
    return detail::cauchy_kernel(orbit(x), ys, zeros).total;
  }

  [[nodiscard]] cplx value(cplx x, cplx y) const {
    const cplx ys[1] = {y};
    return values(x, ys)[0];
  }

 private:
  SchottkyParams params_;
  SeriesConfig cfg_;
  std::shared_ptr<const Enumeration> enumeration_;
};

/// A point of the fundamental domain well away from every circle: the
/// origin when possible, otherwise the first good point on a spiral search.
inline cplx domain_probe_point(const SchottkyParams& p) {
  double rmax = 0.0;
  for (int c : p.circle_indices()) rmax = std::max(rmax, p.radius(c));
  const double want = std::max(0.5 * rmax, 1e-3);
  if (clearance(p, 0.0) >= want) return 0.0;
  cplx centroid{};
  for (int c : p.circle_indices()) centroid += p.center(c);
  centroid /= static_cast<double>(2 * p.genus());
  if (clearance(p, centroid) >= want) return centroid;
  const double step = std::max(rmax, 1e-2);
  for (int ring = 1; ring < 400; ++ring)
    for (int k = 0; k < 8 * ring; ++k) {
      const double th = 2.0 * std::numbers::pi * k / (8.0 * ring);
      const cplx z = centroid + step * ring * cplx{std::cos(th), std::sin(th)};
      if (clearance(p, z) >= want) return z;
    }
  throw InvalidParamsError("no probe point found in the fundamental domain");
}

/// nu_a(x) = omega_{y0-0}(x) - omega_{gamma_a y0 - 0}(x), summed termwise
/// (the 1/(gamma x) parts cancel exactly).
class NormalizedDifferentials {
 public:
  NormalizedDifferentials(const SchottkyParams& p, SeriesConfig cfg = {})
      : NormalizedDifferentials(p, domain_probe_point(p), cfg) {}

  NormalizedDifferentials(const SchottkyParams& p, cplx base, SeriesConfig cfg)
      : params_(p), cfg_(cfg), base_(base) {
    require_valid(p, "nu");
    if (!in_fundamental_domain(p, base)) throw InvalidParamsError("nu base point must lie in the fundamental domain");
    enumeration_ = std::make_shared<const Enumeration>(p, cfg.L, cfg.cap);
    for (int a = 1; a <= p.genus(); ++a) {
      ys_.push_back(base);
      zs_.push_back(p.generator(a)(base));
    }
  }

  [[nodiscard]] int genus() const { return params_.genus(); }
  [[nodiscard]] int weight() const { return 1; }
  [[nodiscard]] cplx base_point() const { return base_; }
  [[nodiscard]] const SchottkyParams& params() const { return params_; }

  /// All g values nu_1(x), ..., nu_g(x).
  [[nodiscard]] std::vector<cplx> evaluate(cplx x) const {
    const auto t = detail::build_orbit(*enumeration_, x, [](cplx, cplx dg) { return dg; });
    return detail::cauchy_kernel(t, ys_, zs_).total;
  }

  [[nodiscard]] cplx value(cplx x, int a) const {
    if (a < 1 || a > genus()) throw IndexError("nu index out of range");
    return evaluate(x)[static_cast<std::size_t>(a - 1)];
  }

 private:
  SchottkyParams params_;
  SeriesConfig cfg_;
  cplx base_;
  std::shared_ptr<const Enumeration> enumeration_;
  std::vector<cplx> ys_, zs_;
};

// ---------------------------------------------------------------------------
// Shell report

enum class SeriesKind { bers, third_kind };

struct ShellStat {
  int length;
  std::size_t words;
  double max_term;
};

/// Largest single term magnitude per word length at the probe pair (x, y).
inline std::vector<ShellStat> shell_report(const SchottkyParams& p, SeriesKind kind, int N,
                                           const SeriesConfig& cfg, cplx x, cplx y) {
  require_valid(p, "shell_report");
  const Enumeration e(p, cfg.L, cfg.cap);
  LimitPointSet A;
  if (kind == SeriesKind::bers) A = limit_points(p, 2 * N - 1);
  std::vector<ShellStat> out;
  for (int len = 0; len <= cfg.L; ++len) {
    ShellStat st{len, e.shell_begin(len + 1) - e.shell_begin(len), 0.0};
    for (std::size_t i = e.shell_begin(len); i < e.shell_begin(len + 1); ++i) {
      const MoebiusMap& m = e[i].map;
      const cplx u = m(x);
      const cplx dg = m.deriv(x);
      cplx term;
      if (kind == SeriesKind::bers) {
        term = detail::ipow(dg, N) / (u - y);
        for (const cplx& a : A.points)
          term = std::abs(u - a) < limit_point_floor * (1.0 + std::abs(a)) ? cplx{} : term * (y - a) / (u - a);
      } else {
        term = dg * (1.0 / (u - y) - 1.0 / u);
      }
      st.max_term = std::max(st.max_term, std::abs(term));
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace schottky
