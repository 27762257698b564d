#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "schottky/contour.hpp"
#include "schottky/eichler.hpp"
#include "schottky/group.hpp"
#include "schottky/poincare.hpp"
#include "schottky/types.hpp"

namespace schottky {

inline constexpr double quasi_period_tolerance = 1e-8;
inline constexpr double rank_threshold = 1e-7;
inline constexpr double rank_gap_minimum = 1e6;
inline constexpr double dual_condition_limit = 1e10;
inline constexpr double correction_fit_tolerance = 1e-8;

inline int handle_dimension(int N) { return 2 * N - 1; }
inline int differential_dimension(int g, int N) { return (g - 1) * (2 * N - 1); }

// ---------------------------------------------------------------------------
// Quasi-periods

/// Delta(y) = Psi(x, gamma_a y) gamma_a'(y)^{1-N} - Psi(x, y) expanded as
/// sum_k coeffs[k] (y - w_a)^k.
struct QuasiPeriod {
  int a = 0;
  std::vector<cplx> coeffs;
  double residual = 0.0;  // held-out misfit relative to the size of the two terms
};

/// Sample points for the quasi-periods of every generator at once: 2N-1
/// equally spaced fitting nodes and 2 held-out nodes on a circle about w_a,
/// then their images under gamma_a. One evaluator call at these points gives
/// all g quasi-periods.
class QuasiPeriodNodes {
 public:
  QuasiPeriodNodes() = default;
  QuasiPeriodNodes(const SchottkyParams& p, int N) : g_(p.genus()), N_(N) {
    const int m = handle_dimension(N);
    for (int a = 1; a <= g_; ++a) {
      const cplx w = p.center(a);
      double gap = INFINITY;
      for (int c : p.circle_indices())
        if (c != a) gap = std::min(gap, std::abs(w - p.center(c)) - p.radius(c));
      const double r = 0.5 * gap;
      centers_.push_back(w);
      radii_.push_back(r);
      for (int j = 0; j < m + 2; ++j) {
        const double th = j < m ? 2.0 * std::numbers::pi * j / m
                                : 2.0 * std::numbers::pi * (j - m + 0.5) / m;
        const cplx y = w + std::polar(r, th);
        if (!in_fundamental_domain(p, y))
          throw InvalidParamsError("quasi-period node falls outside the fundamental domain");
        pts_.push_back(y);
      }
    }
    const std::size_t half = pts_.size();
    for (std::size_t i = 0; i < half; ++i) {
      const int a = static_cast<int>(i) / (m + 2) + 1;
      const MoebiusMap ga = p.generator(a);
      pts_.push_back(ga(pts_[i]));
      factor_.push_back(detail_pow(1.0 / ga.deriv(pts_[i]), N - 1));
    }
  }

  [[nodiscard]] int genus() const { return g_; }
  [[nodiscard]] int weight() const { return N_; }
  [[nodiscard]] const std::vector<cplx>& points() const { return pts_; }
  [[nodiscard]] std::size_t size() const { return pts_.size(); }

  /// Fits every generator's quasi-period from evaluator values at points().
  [[nodiscard]] std::vector<QuasiPeriod> fit(std::span<const cplx> vals,
                                             double tol = quasi_period_tolerance) const {
    if (vals.size() != pts_.size()) throw ConfigError("quasi-period fit needs one value per node");
    const int m = handle_dimension(N_);
    const std::size_t half = pts_.size() / 2;
    std::vector<QuasiPeriod> out;
    for (int a = 1; a <= g_; ++a) {
      const std::size_t base = static_cast<std::size_t>((a - 1) * (m + 2));
      std::vector<cplx> delta(static_cast<std::size_t>(m + 2));
      double scale = 0.0;
      for (int j = 0; j < m + 2; ++j) {
        const std::size_t i = base + static_cast<std::size_t>(j);
        const cplx moved = vals[half + i] * factor_[i];
        delta[static_cast<std::size_t>(j)] = moved - vals[i];
        scale = std::max(scale, std::abs(moved) + std::abs(vals[i]));
      }
      QuasiPeriod q;
      q.a = a;
      const double r = radii_[static_cast<std::size_t>(a - 1)];
      for (int k = 0; k < m; ++k) {
        cplx acc{};
        for (int j = 0; j < m; ++j)
          acc += delta[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / m);
        q.coeffs.push_back(acc / (static_cast<double>(m) * std::pow(r, k)));
      }
      const cplx w = centers_[static_cast<std::size_t>(a - 1)];
      double miss = 0.0;
      for (int j = m; j < m + 2; ++j) {
        const cplx y = pts_[base + static_cast<std::size_t>(j)];
        cplx fitv{}, yk{1.0};
        for (int k = 0; k < m; ++k) {
          fitv += q.coeffs[static_cast<std::size_t>(k)] * yk;
          yk *= (y - w);
        }
        miss = std::max(miss, std::abs(fitv - delta[static_cast<std::size_t>(j)]));
      }
      q.residual = miss / std::max(scale, 1e-300);
      if (tol > 0.0 && q.residual > tol) {
        std::ostringstream os;
        os << "quasi-period of generator " << a << " is not polynomial: held-out residual "
           << q.residual << " (truncation too low?)";
        throw ResidualError(os.str());
      }
      out.push_back(std::move(q));
    }
    return out;
  }

 private:
  int g_ = 0;
  int N_ = 2;
  std::vector<cplx> centers_;
  std::vector<double> radii_;
  std::vector<cplx> pts_;
  std::vector<cplx> factor_;  // gamma_a'(y)^{1-N} at each fitting/held-out node
};

/// Quasi-period of generator a for any two-point evaluator exposing
/// params(), weight() and values(x, ys).
template <typename Evaluator>
QuasiPeriod quasi_periods(const Evaluator& psi, int a, cplx x, double tol = quasi_period_tolerance) {
  if (a < 1 || a > psi.params().genus()) throw IndexError("generator index out of range");
  const QuasiPeriodNodes nodes(psi.params(), psi.weight());
  const auto vals = psi.values(x, nodes.points());
  return nodes.fit(vals, tol)[static_cast<std::size_t>(a - 1)];
}

template <typename Evaluator>
std::vector<QuasiPeriod> all_quasi_periods(const Evaluator& psi, cplx x,
                                           double tol = quasi_period_tolerance) {
  const QuasiPeriodNodes nodes(psi.params(), psi.weight());
  return nodes.fit(psi.values(x, nodes.points()), tol);
}

// ---------------------------------------------------------------------------
// Spanning set of holomorphic N-differentials

inline int theta_index(int N, int a, int k) { return (a - 1) * handle_dimension(N) + k; }
inline std::pair<int, int> theta_label(int N, int r) {
  return {r / handle_dimension(N) + 1, r % handle_dimension(N)};
}

/// Theta_{a,k}(x) = c_{a,k}(x), the quasi-period coefficients of the raw Bers
/// form, flattened as r = (a-1)(2N-1) + k.
class SpanningTheta {
 public:
  explicit SpanningTheta(std::shared_ptr<const BersSeries> bers)
      : bers_(std::move(bers)), nodes_(bers_->params(), bers_->weight()) {}

  SpanningTheta(const SchottkyParams& p, int N, SeriesConfig cfg = {})
      : SpanningTheta(std::make_shared<const BersSeries>(p, N, cfg)) {}

  [[nodiscard]] const BersSeries& bers() const { return *bers_; }
  [[nodiscard]] std::shared_ptr<const BersSeries> bers_ptr() const { return bers_; }
  [[nodiscard]] const QuasiPeriodNodes& nodes() const { return nodes_; }
  [[nodiscard]] int weight() const { return bers_->weight(); }
  [[nodiscard]] int genus() const { return bers_->params().genus(); }
  [[nodiscard]] int size() const { return genus() * handle_dimension(weight()); }

  /// Theta(x) together with Psi^Bers(x, ys) from a single orbit.
  struct Sample {
    std::vector<cplx> theta;
    std::vector<cplx> bers;
  };

  [[nodiscard]] Sample sample(cplx x, std::span<const cplx> ys) const {
    std::vector<cplx> all(nodes_.points().begin(), nodes_.points().end());
    all.insert(all.end(), ys.begin(), ys.end());
    auto vals = bers_->values(x, all);
    const std::size_t nq = nodes_.size();
    Sample s;
    for (const auto& q : nodes_.fit(std::span<const cplx>(vals.data(), nq)))
      s.theta.insert(s.theta.end(), q.coeffs.begin(), q.coeffs.end());
    s.bers.assign(vals.begin() + static_cast<std::ptrdiff_t>(nq), vals.end());
    return s;
  }

  [[nodiscard]] std::vector<cplx> values(cplx x) const { return sample(x, {}).theta; }

 private:
  std::shared_ptr<const BersSeries> bers_;
  QuasiPeriodNodes nodes_;
};

// ---------------------------------------------------------------------------
// GEM forms

/// Psi(x, y) = Psi^Bers(x, y) - sum_i Theta_{r_i}(x) Q_i(y) over an
/// independent subset {r_i} of the spanning set. With d_N rows and
/// polynomials of degree <= 2N-2 this is the full (2N-1) d_N dimensional
/// family of GEM forms.
class GemForm {
 public:
  GemForm() = default;
  GemForm(std::shared_ptr<const SpanningTheta> theta, std::vector<int> rows, std::vector<PolyForm> q)
      : theta_(std::move(theta)), rows_(std::move(rows)), q_(std::move(q)) {
    if (rows_.size() != q_.size()) throw ConfigError("one correction polynomial per row");
    for (int r : rows_)
      if (r < 0 || r >= theta_->size()) throw IndexError("GEM row index out of range");
    for (const auto& p : q_)
      if (p.weight() != theta_->weight()) throw ConfigError("correction weight mismatch");
  }

  /// The uncorrected Bers form.
  explicit GemForm(std::shared_ptr<const SpanningTheta> theta) : theta_(std::move(theta)) {}

  /// Parameterization by a flat coefficient vector: rows.size() * (2N-1)
  /// monomial coefficients, row-major.
  static GemForm from_coefficients(std::shared_ptr<const SpanningTheta> theta, std::vector<int> rows,
                                   const std::vector<cplx>& coeffs) {
    const int N = theta->weight();
    const std::size_t m = static_cast<std::size_t>(handle_dimension(N));
    if (coeffs.size() != rows.size() * m) {
      std::ostringstream os;
      os << "GEM correction needs exactly " << rows.size() * m << " coefficients, got " << coeffs.size();
      throw ConfigError(os.str());
    }
    std::vector<PolyForm> q;
    for (std::size_t i = 0; i < rows.size(); ++i)
      q.emplace_back(N, std::vector<cplx>(coeffs.begin() + static_cast<std::ptrdiff_t>(i * m),
                                          coeffs.begin() + static_cast<std::ptrdiff_t>((i + 1) * m)));
    return GemForm(std::move(theta), std::move(rows), std::move(q));
  }

  [[nodiscard]] int weight() const { return theta_->weight(); }
  [[nodiscard]] const SchottkyParams& params() const { return theta_->bers().params(); }
  [[nodiscard]] const SpanningTheta& spanning() const { return *theta_; }
  [[nodiscard]] const std::vector<int>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<PolyForm>& corrections() const { return q_; }
  [[nodiscard]] std::size_t free_parameters() const {
    return rows_.size() * static_cast<std::size_t>(handle_dimension(weight()));
  }

  /// Psi - Theta_r(x) P(y) for a row r already in the form.
  [[nodiscard]] GemForm shifted(int r, const PolyForm& P) const {
    GemForm out = *this;
    const auto it = std::find(rows_.begin(), rows_.end(), r);
    if (it == rows_.end()) {
      out.rows_.push_back(r);
      out.q_.push_back(P);
    } else {
      out.q_[static_cast<std::size_t>(it - rows_.begin())] += P;
    }
    return out;
  }

  [[nodiscard]] std::vector<cplx> values(cplx x, std::span<const cplx> ys) const {
    if (rows_.empty()) return theta_->bers().values(x, ys);
    const auto s = theta_->sample(x, ys);
    std::vector<cplx> out = s.bers;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const cplx t = s.theta[static_cast<std::size_t>(rows_[i])];
      for (std::size_t k = 0; k < ys.size(); ++k) out[k] -= t * q_[i].eval(ys[k]);
    }
    return out;
  }

  [[nodiscard]] cplx value(cplx x, cplx y) const {
    const cplx ys[1] = {y};
    return values(x, ys)[0];
  }

 private:
  std::shared_ptr<const SpanningTheta> theta_;
  std::vector<int> rows_;
  std::vector<PolyForm> q_;
};

// ---------------------------------------------------------------------------
// Basis selection and the dual basis

struct BasisSelection {
  int N = 2;
  int genus = 2;
  std::vector<std::pair<int, int>> J;  // (a, k)
  std::vector<int> rows;               // independent spanning indices
  std::vector<double> singular_values;
  int rank = 0;
  double gap = 0.0;  // sigma_d / sigma_{d+1}
  Eigen::MatrixXcd pairing;  // rows: spanning index r, columns: (a,k) flattened alike

  [[nodiscard]] std::vector<int> columns() const {
    std::vector<int> c;
    for (auto [a, k] : J) c.push_back(theta_index(N, a, k));
    return c;
  }
};

inline Eigen::MatrixXcd to_matrix(const std::vector<cplx>& flat, int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
  return m;
}

/// Singular values, numerical rank and gap of a g(2N-1) square pairing
/// matrix, without selecting a basis.
inline BasisSelection pairing_spectrum(const Eigen::MatrixXcd& M, int g, int N) {
  const int n = g * handle_dimension(N);
  if (M.rows() != n || M.cols() != n) throw ConfigError("pairing matrix has the wrong shape");
  const int d = differential_dimension(g, N);
  if (d < 1) throw ConfigError("no holomorphic N-differentials in genus one");
  BasisSelection sel;
  sel.N = N;
  sel.genus = g;
  sel.pairing = M;
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  for (int i = 0; i < sv.size(); ++i) sel.singular_values.push_back(sv(i));
  sel.rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rank_threshold * sv(0)) ++sel.rank;
  sel.gap = d < sv.size() ? (sv(d) > 0.0 ? sv(d - 1) / sv(d) : INFINITY) : INFINITY;
  return sel;
}

/// Rank, J and independent rows from a g(2N-1) square pairing matrix. A
/// non-empty `J` fixes the index set instead of pivoting for it; the rows
/// are then pivoted on those columns alone.
inline BasisSelection select_basis(const Eigen::MatrixXcd& M, int g, int N,
                                   const std::vector<std::pair<int, int>>& J = {}) {
  BasisSelection sel = pairing_spectrum(M, g, N);
  const int d = differential_dimension(g, N);
  if (sel.rank != d || sel.gap < rank_gap_minimum) {
    std::ostringstream os;
    os << "pairing matrix rank " << sel.rank << " (expected " << d << "), singular-value gap "
       << sel.gap << "; truncation too low or degenerate surface";
    throw RankError(os.str());
  }
  std::vector<int> cols, rows;
  if (J.empty()) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qc(M);
    for (int i = 0; i < d; ++i) cols.push_back(qc.colsPermutation().indices()(i));
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M.transpose());
    for (int i = 0; i < d; ++i) rows.push_back(qr.colsPermutation().indices()(i));
  } else {
    if (static_cast<int>(J.size()) != d) {
      std::ostringstream os;
      os << "J override has " << J.size() << " entries, expected " << d;
      throw ConfigError(os.str());
    }
    for (auto [a, k] : J) {
      if (a < 1 || a > g || k < 0 || k >= handle_dimension(N)) throw ConfigError("J override entry out of range");
      const int c = theta_index(N, a, k);
      if (std::find(cols.begin(), cols.end(), c) != cols.end()) throw ConfigError("J override repeats an entry");
      cols.push_back(c);
    }
    Eigen::MatrixXcd MJ(M.rows(), d);
    for (int j = 0; j < d; ++j) MJ.col(j) = M.col(cols[static_cast<std::size_t>(j)]);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(MJ.transpose());
    for (int i = 0; i < d; ++i) rows.push_back(qr.colsPermutation().indices()(i));
  }
  std::sort(cols.begin(), cols.end());
  std::sort(rows.begin(), rows.end());
  for (int c : cols) sel.J.push_back(theta_label(N, c));
  sel.rows = rows;
  return sel;
}

/// A with Phi^vee_J = A Theta_rows: the inverse of the rows x J block.
inline Eigen::MatrixXcd dual_coefficients(const BasisSelection& sel, double* condition = nullptr) {
  const auto cols = sel.columns();
  const int d = static_cast<int>(cols.size());
  Eigen::MatrixXcd B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = sel.pairing(sel.rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
  const auto& sv = svd.singularValues();
  const double cond = sv(d - 1) > 0.0 ? sv(0) / sv(d - 1) : INFINITY;
  if (condition) *condition = cond;
  if (!(cond < dual_condition_limit)) {
    std::ostringstream os;
    os << "dual-basis solve is ill-conditioned: condition number " << cond;
    throw ConditionError(os.str());
  }
  return B.fullPivLu().inverse();
}

// ---------------------------------------------------------------------------
// Canonical GEM

struct GemConfig {
  SeriesConfig series{};
  int contour_nodes = 256;
  double gate_tol = contour_gate_tolerance;
  int check_nodes = 128;     // independent duality check
  double check_scale = 1.1;  // contour radius factor for that check
  std::vector<std::pair<int, int>> J;  // empty: chosen by pivoting
};

/// Points where the canonical correction polynomials are sampled: 2N-1
/// fitting nodes plus 2 held-out nodes on a circle about a probe point of
/// the fundamental domain.
struct CorrectionNodes {
  cplx center;
  double radius = 0.0;
  std::vector<cplx> points;

  CorrectionNodes() = default;
  CorrectionNodes(const SchottkyParams& p, int N) {
    center = domain_probe_point(p);
    radius = 0.5 * clearance(p, center);
    const int m = handle_dimension(N);
    for (int j = 0; j < m; ++j) points.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * j / m));
    for (int j = 0; j < 2; ++j)
      points.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * (j + 0.5) / m));
  }

  /// Degree 2N-2 polynomial through the fitting values; the held-out misfit
  /// relative to max(1, |values|) is written to `residual`.
  [[nodiscard]] PolyForm fit(int N, std::span<const cplx> vals, double& residual) const {
    const int m = handle_dimension(N);
    std::vector<cplx> s;
    for (int k = 0; k < m; ++k) {
      cplx acc{};
      for (int j = 0; j < m; ++j)
        acc += vals[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / m);
      s.push_back(acc / (static_cast<double>(m) * std::pow(radius, k)));
    }
    const PolyForm P = PolyForm::from_shifted(N, center, s);
    double scale = 1.0, miss = 0.0;
    for (const cplx& v : vals) scale = std::max(scale, std::abs(v));
    for (int j = m; j < m + 2; ++j)
      miss = std::max(miss, std::abs(P.eval(points[static_cast<std::size_t>(j)]) - vals[static_cast<std::size_t>(j)]));
    residual = miss / scale;
    return P;
  }
};

struct CanonicalGem {
  BasisSelection selection;
  Eigen::MatrixXcd dual;  // A: Phi^vee_J = A Theta_rows
  double dual_condition = 0.0;
  std::vector<PolyForm> corrections;  // P_J(y), in J order
  double correction_residual = 0.0;
  std::shared_ptr<const SpanningTheta> theta;
  GemForm form;

  [[nodiscard]] const SchottkyParams& params() const { return theta->bers().params(); }
  [[nodiscard]] int weight() const { return theta->weight(); }
  [[nodiscard]] std::vector<cplx> values(cplx x, std::span<const cplx> ys) const { return form.values(x, ys); }
  [[nodiscard]] cplx value(cplx x, cplx y) const { return form.value(x, y); }

  /// Phi^vee_J(x) from spanning values Theta(x).
  [[nodiscard]] std::vector<cplx> dual_from_theta(const std::vector<cplx>& th) const {
    std::vector<cplx> out;
    for (Eigen::Index i = 0; i < dual.rows(); ++i) {
      cplx acc{};
      for (Eigen::Index j = 0; j < dual.cols(); ++j)
        acc += dual(i, j) * th[static_cast<std::size_t>(selection.rows[static_cast<std::size_t>(j)])];
      out.push_back(acc);
    }
    return out;
  }
  [[nodiscard]] std::vector<cplx> dual_values(cplx x) const { return dual_from_theta(theta->values(x)); }
};

/// Pairing matrix M_{r,(a,k)} = (1/2 pi i) oint_{C_a} Theta_r(x) (x - w_a)^k dx
/// and, from the same contour pass, the correction integrals
/// (1/2 pi i) oint_{C_a} Psi^Bers(x, y_m) (x - w_a)^l dx at `ys`.
struct ContourPass {
  Eigen::MatrixXcd pairing;
  std::vector<std::vector<cplx>> correction;  // [theta_index(a,l)][m]
};

inline ContourPass contour_pass(const SpanningTheta& th, std::span<const cplx> ys, int n_nodes,
                                double gate_tol, double scale = 1.0) {
  const SchottkyParams& p = th.bers().params();
  const int N = th.weight();
  const int m = handle_dimension(N);
  const int n = th.size();
  const std::size_t ny = ys.size();
  const std::size_t width = static_cast<std::size_t>(n * m) + static_cast<std::size_t>(m) * ny;
  ContourPass out;
  out.pairing = Eigen::MatrixXcd::Zero(n, n);
  out.correction.assign(static_cast<std::size_t>(n), std::vector<cplx>(ny));
  for (int a = 1; a <= p.genus(); ++a) {
    CircleContour c = CircleContour::isometric(p, a, n_nodes);
    c.scale = scale;
    const cplx w = p.center(a);
    const auto I = circle_integrals(c, width, [&](cplx x) {
      const auto s = th.sample(x, ys);
      std::vector<cplx> v(width);
      cplx xk{1.0};
      for (int k = 0; k < m; ++k) {
        for (int r = 0; r < n; ++r) v[static_cast<std::size_t>(r * m + k)] = s.theta[static_cast<std::size_t>(r)] * xk;
        for (std::size_t j = 0; j < ny; ++j)
          v[static_cast<std::size_t>(n * m) + static_cast<std::size_t>(k) * ny + j] = s.bers[j] * xk;
        xk *= (x - w);
      }
      return v;
    }, gate_tol);
    for (int k = 0; k < m; ++k) {
      const int col = theta_index(N, a, k);
      for (int r = 0; r < n; ++r) out.pairing(r, col) = I[static_cast<std::size_t>(r * m + k)] / two_pi_i;
      for (std::size_t j = 0; j < ny; ++j)
        out.correction[static_cast<std::size_t>(col)][j] =
            I[static_cast<std::size_t>(n * m) + static_cast<std::size_t>(k) * ny + j] / two_pi_i;
    }
  }
  return out;
}

/// Pairing matrix of the spanning set alone.
inline Eigen::MatrixXcd pairing_matrix(const SpanningTheta& th, int n_nodes = 256,
                                       double gate_tol = contour_gate_tolerance) {
  return contour_pass(th, {}, n_nodes, gate_tol).pairing;
}

/// Psi^can(x, y) = Psi^Bers(x, y) - sum_J Phi^vee_J(x) P_J(y), where
/// P_J(y) = (1/2 pi i) oint_{C_b} Psi^Bers(x, y) (x - w_b)^l dx for J = (b, l).
inline CanonicalGem canonical_gem(const SchottkyParams& p, int N, const GemConfig& cfg = {}) {
  require_valid(p, "canonical_gem");
  auto theta = std::make_shared<const SpanningTheta>(p, N, cfg.series);
  const CorrectionNodes cn(p, N);
  const auto pass = contour_pass(*theta, cn.points, cfg.contour_nodes, cfg.gate_tol);
  CanonicalGem out;
  out.theta = theta;
  out.selection = select_basis(pass.pairing, p.genus(), N, cfg.J);
  out.dual = dual_coefficients(out.selection, &out.dual_condition);
  for (int col : out.selection.columns()) {
    double res = 0.0;
    out.corrections.push_back(cn.fit(N, pass.correction[static_cast<std::size_t>(col)], res));
    out.correction_residual = std::max(out.correction_residual, res);
  }
  if (out.correction_residual > correction_fit_tolerance) {
    std::ostringstream os;
    os << "correction polynomial fit residual " << out.correction_residual;
    throw ResidualError(os.str());
  }
  // sum_J Phi^vee_J P_J = sum_rows Theta_row (sum_J A_{J,row} P_J)
  const int d = static_cast<int>(out.selection.rows.size());
  std::vector<PolyForm> q;
  for (int i = 0; i < d; ++i) {
    PolyForm acc = PolyForm::zero(N);
    for (int j = 0; j < d; ++j) acc += out.dual(j, i) * out.corrections[static_cast<std::size_t>(j)];
    q.push_back(acc);
  }
  out.form = GemForm(theta, out.selection.rows, std::move(q));
  return out;
}

// ---------------------------------------------------------------------------
// Checks

/// max |(1/2 pi i) oint_{C_a} Phi^vee_J (x - w_a)^k - delta| over J x J on
/// contours independent of the construction (different radius and nodes).
inline double duality_error(const CanonicalGem& G, int n_nodes, double scale,
                            double gate_tol = contour_gate_tolerance) {
  const auto pass = contour_pass(*G.theta, {}, n_nodes, gate_tol, scale);
  const auto cols = G.selection.columns();
  double err = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      cplx acc{};
      for (std::size_t r = 0; r < G.selection.rows.size(); ++r)
        acc += G.dual(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) *
               pass.pairing(G.selection.rows[r], cols[j]);
      err = std::max(err, std::abs(acc - (i == j ? 1.0 : 0.0)));
    }
  return err;
}

/// Largest |pairing(Theta_r, Xi_P)| over the spanning set for the monomial
/// P = z^j, relative to the magnitude of the summands.
inline double coboundary_annihilation(const SchottkyParams& p, const Eigen::MatrixXcd& M, int N, int j) {
  const auto x = canonical_coordinates(p, coboundary(p, PolyForm::monomial(N, j)));
  const int m = handle_dimension(N);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    cplx acc{};
    double scale = 0.0;
    for (int a = 1; a <= p.genus(); ++a)
      for (int k = 0; k < m; ++k) {
        const cplx t = M(r, theta_index(N, a, k)) * x[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(k)];
        acc += t;
        scale += std::abs(t);
      }
    worst = std::max(worst, std::abs(acc) / std::max(1.0, scale));
  }
  return worst;
}

/// (1/2 pi i) sum_a oint_{C_a} Psi(x, y) Xi_{bl}[gamma_a](x) dx for each J
/// index (b, l) and each y; only C_b contributes.
template <typename Evaluator>
std::vector<std::vector<cplx>> cocycle_contour(const Evaluator& psi, const std::vector<std::pair<int, int>>& J,
                                               std::span<const cplx> ys, int n_nodes = 256,
                                               double gate_tol = contour_gate_tolerance) {
  const SchottkyParams& p = psi.params();
  std::vector<std::vector<cplx>> out(J.size(), std::vector<cplx>(ys.size()));
  for (int b = 1; b <= p.genus(); ++b) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < J.size(); ++i)
      if (J[i].first == b) idx.push_back(i);
    if (idx.empty()) continue;
    const cplx w = p.center(b);
    const auto I = circle_integrals(CircleContour::isometric(p, b, n_nodes), idx.size() * ys.size(), [&](cplx x) {
      const auto v = psi.values(x, ys);
      std::vector<cplx> f;
      for (std::size_t i : idx)
        for (std::size_t k = 0; k < ys.size(); ++k) f.push_back(v[k] * detail_pow(x - w, J[i].second));
      return f;
    }, gate_tol);
    for (std::size_t t = 0; t < idx.size(); ++t)
      for (std::size_t k = 0; k < ys.size(); ++k) out[idx[t]][k] = I[t * ys.size() + k] / two_pi_i;
  }
  return out;
}

}  // namespace schottky
