#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "schottky/group.hpp"
#include "schottky/types.hpp"

namespace schottky {

/// p(z) dz^{1-N} with deg p <= 2N-2, stored as monomial coefficients
/// p_0 .. p_{2N-2}.
class PolyForm {
 public:
  PolyForm() = default;
  explicit PolyForm(int N) : N_(N), c_(static_cast<std::size_t>(2 * N - 1)) {
    if (N < 1) throw ConfigError("PolyForm needs N >= 1");
  }
  PolyForm(int N, std::vector<cplx> coeffs) : N_(N), c_(std::move(coeffs)) {
    if (N < 1) throw ConfigError("PolyForm needs N >= 1");
    if (c_.size() != static_cast<std::size_t>(2 * N - 1))
      throw ConfigError("PolyForm needs exactly 2N-1 coefficients");
  }

  static PolyForm zero(int N) { return PolyForm(N); }
  static PolyForm monomial(int N, int k) {
    PolyForm p(N);
    p.c_.at(static_cast<std::size_t>(k)) = 1.0;
    return p;
  }

  /// sum_k s_k (z - w)^k from coefficients in the shifted basis.
  static PolyForm from_shifted(int N, cplx w, const std::vector<cplx>& s) {
    PolyForm p(N);
    const int n = p.size();
    if (static_cast<int>(s.size()) != n) throw ConfigError("shifted coefficients need length 2N-1");
    for (int k = 0; k < n; ++k) {
      // (z - w)^k = sum_j C(k, j) z^j (-w)^{k-j}
      cplx pw{1.0};
      double binom = 1.0;
      for (int j = k; j >= 0; --j) {
        p.c_[static_cast<std::size_t>(j)] += s[static_cast<std::size_t>(k)] * binom * pw;
        pw *= -w;
        binom = binom * j / (k - j + 1);
      }
    }
    return p;
  }

  [[nodiscard]] int weight() const { return N_; }
  [[nodiscard]] int size() const { return static_cast<int>(c_.size()); }
  [[nodiscard]] const std::vector<cplx>& coeffs() const { return c_; }
  [[nodiscard]] cplx operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  cplx& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

  [[nodiscard]] cplx eval(cplx z) const {
    cplx acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Coefficients s_k with p(z) = sum_k s_k (z - w)^k.
  [[nodiscard]] std::vector<cplx> shifted(cplx w) const {
    const int n = size();
    std::vector<cplx> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      // s_k = sum_{j >= k} C(j, k) p_j w^{j-k}
      cplx pw{1.0};
      double binom = 1.0;
      cplx acc{};
      for (int j = k; j < n; ++j) {
        acc += binom * c_[static_cast<std::size_t>(j)] * pw;
        pw *= w;
        binom = binom * (j + 1) / (j + 1 - k);
      }
      s[static_cast<std::size_t>(k)] = acc;
    }
    return s;
  }

  /// max_k |p_k| R^k: the sup of |p| on |z| = R up to a factor 2N-1.
  [[nodiscard]] double weighted_norm(double R) const {
    double m = 0.0, rk = 1.0;
    for (const cplx& c : c_) {
      m = std::max(m, std::abs(c) * rk);
      rk *= R;
    }
    return m;
  }

  PolyForm& operator+=(const PolyForm& o) {
    check_same(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  PolyForm& operator-=(const PolyForm& o) {
    check_same(o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  PolyForm& operator*=(cplx s) {
    for (auto& c : c_) c *= s;
    return *this;
  }
  friend PolyForm operator+(PolyForm a, const PolyForm& b) { return a += b; }
  friend PolyForm operator-(PolyForm a, const PolyForm& b) { return a -= b; }
  friend PolyForm operator*(cplx s, PolyForm a) { return a *= s; }
  friend PolyForm operator-(PolyForm a) { return a *= -1.0; }

 private:
  void check_same(const PolyForm& o) const {
    if (o.N_ != N_) throw ConfigError("PolyForm weight mismatch");
  }

  int N_ = 1;
  std::vector<cplx> c_{cplx{}};
};

inline cplx detail_pow(cplx z, int n) {
  cplx r{1.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

/// Radius of the interpolation circle used by `poly_pullback`.
inline double pullback_radius(const SchottkyParams& p) { return 2.0 * p.max_center_modulus() + 2.0; }

inline constexpr double pullback_residual_tolerance = 1e-9;

/// P|_M(z) = p(Mz) (M'z)^{1-N} = p(Mz) (cz+d)^{2N-2}, recovered by
/// interpolation at the 2N-1 roots of unity on |z| = R and checked at one
/// rotated node. Evaluating through Mz avoids the cancellation of the
/// expanded form sum_k p_k (az+b)^k (cz+d)^{2N-2-k} for long words.
inline PolyForm poly_pullback(const PolyForm& P, const MoebiusMap& M, double R) {
  const int N = P.weight();
  const int n = P.size();
  // Value and its rounding scale sum_k |p_k| |Mz|^k |cz+d|^{2N-2}.
  auto exact = [&](cplx z, double& mag) {
    const cplx den = M.c() * z + M.d();
    const cplx u = M(z);
    const double dpow = std::pow(std::abs(den), 2 * N - 2);
    double m = 0.0, uk = 1.0;
    for (int k = 0; k < n; ++k) {
      m += std::abs(P[k]) * uk;
      uk *= std::abs(u);
    }
    mag = m * dpow;
    return P.eval(u) * detail_pow(den, 2 * N - 2);
  };
  std::vector<cplx> vals(static_cast<std::size_t>(n));
  double scale = 0.0, mag = 0.0;
  for (int j = 0; j < n; ++j) {
    const cplx z = std::polar(R, 2.0 * std::numbers::pi * j / n);
    vals[static_cast<std::size_t>(j)] = exact(z, mag);
    scale = std::max(scale, mag);
  }
  PolyForm out(N);
  for (int k = 0; k < n; ++k) {
    cplx acc{};
    for (int j = 0; j < n; ++j)
      acc += vals[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * j * k / n);
    out[k] = acc / (static_cast<double>(n) * std::pow(R, k));
  }
  const cplx zc = std::polar(R, std::numbers::pi / n);
  const double resid = std::abs(out.eval(zc) - exact(zc, mag));
  scale = std::max(scale, mag);
  if (resid > pullback_residual_tolerance * scale) {
    std::ostringstream os;
    os << "pullback interpolation residual " << resid << " exceeds gate (scale " << scale << ")";
    throw ResidualError(os.str());
  }
  return out;
}

/// Rounding scale of `poly_pullback`: max over the interpolation circle of
/// sum_k |p_k| |Mz|^k |cz+d|^{2N-2}. Pullbacks that cancel (P nearly zero
/// on the image of the circle) are only determined to eps times this.
inline double pullback_scale(const PolyForm& P, const MoebiusMap& M, double R) {
  const int n = P.size();
  double scale = 0.0;
  for (int j = 0; j <= n; ++j) {
    const cplx z = std::polar(R, std::numbers::pi * j / n);
    const cplx u = M(z);
    double m = 0.0, uk = 1.0;
    for (int k = 0; k < n; ++k) {
      m += std::abs(P[k]) * uk;
      uk *= std::abs(u);
    }
    scale = std::max(scale, m * std::pow(std::abs(M.c() * z + M.d()), n - 1));
  }
  return scale;
}

// ---------------------------------------------------------------------------
// Cocycles

/// An Eichler cocycle, determined by its values on the generators.
struct Cocycle {
  int N = 2;
  std::vector<PolyForm> generator_values;  // Xi[gamma_1] .. Xi[gamma_g]

  static Cocycle zero(int N, int g) {
    return {N, std::vector<PolyForm>(static_cast<std::size_t>(g), PolyForm::zero(N))};
  }
  [[nodiscard]] int genus() const { return static_cast<int>(generator_values.size()); }
  [[nodiscard]] const PolyForm& on_generator(int a) const {
    if (a < 1 || a > genus()) throw IndexError("cocycle generator index out of range");
    return generator_values[static_cast<std::size_t>(a - 1)];
  }

  Cocycle& operator+=(const Cocycle& o) {
    for (std::size_t i = 0; i < generator_values.size(); ++i) generator_values[i] += o.generator_values[i];
    return *this;
  }
  Cocycle& operator*=(cplx s) {
    for (auto& v : generator_values) v *= s;
    return *this;
  }
};

/// Xi[gamma_letter]: the stored value for a > 0, -Xi[gamma_a]|_{gamma_a^-1}
/// for the inverse letter.
inline PolyForm cocycle_letter(const SchottkyParams& p, const Cocycle& X, int letter) {
  const PolyForm& v = X.on_generator(std::abs(letter));
  if (letter > 0) return v;
  return -poly_pullback(v, p.generator(letter), pullback_radius(p));
}

/// Xi[w], extended letter by letter: Xi[w l] = Xi[w]|_{gamma_l} + Xi[gamma_l].
inline PolyForm cocycle_eval(const SchottkyParams& p, const Cocycle& X, const GroupWord& w) {
  if (X.genus() != p.genus()) throw ConfigError("cocycle genus does not match the surface");
  const double R = pullback_radius(p);
  PolyForm acc = PolyForm::zero(X.N);
  for (int l : w.letters) {
    if (l == 0 || std::abs(l) > p.genus()) throw IndexError("letter out of range");
    acc = poly_pullback(acc, p.generator(l), R) + cocycle_letter(p, X, l);
  }
  return acc;
}

/// Xi_{ak}[gamma_b] = delta_ab (z - w_a)^k.
inline Cocycle canonical_cocycle(const SchottkyParams& p, int N, int a, int k) {
  if (a < 1 || a > p.genus()) throw IndexError("canonical cocycle handle out of range");
  if (k < 0 || k > 2 * N - 2) throw IndexError("canonical cocycle degree out of range");
  Cocycle X = Cocycle::zero(N, p.genus());
  std::vector<cplx> s(static_cast<std::size_t>(2 * N - 1));
  s[static_cast<std::size_t>(k)] = 1.0;
  X.generator_values[static_cast<std::size_t>(a - 1)] = PolyForm::from_shifted(N, p.handle(a).w_plus, s);
  return X;
}

/// Xi_P[gamma] = P|_gamma - P.
inline Cocycle coboundary(const SchottkyParams& p, const PolyForm& P) {
  Cocycle X;
  X.N = P.weight();
  const double R = pullback_radius(p);
  for (int a = 1; a <= p.genus(); ++a) X.generator_values.push_back(poly_pullback(P, p.generator(a), R) - P);
  return X;
}

/// Coefficients x_{ak} with X = sum_{a,k} x_{ak} Xi_{ak}, indexed
/// [a-1][k]; read off the shifted expansion of each generator value.
inline std::vector<std::vector<cplx>> canonical_coordinates(const SchottkyParams& p, const Cocycle& X) {
  std::vector<std::vector<cplx>> out;
  for (int a = 1; a <= X.genus(); ++a) out.push_back(X.on_generator(a).shifted(p.handle(a).w_plus));
  return out;
}

inline Cocycle from_canonical_coordinates(const SchottkyParams& p, int N,
                                          const std::vector<std::vector<cplx>>& x) {
  Cocycle X = Cocycle::zero(N, p.genus());
  for (int a = 1; a <= p.genus(); ++a) {
    for (int k = 0; k <= 2 * N - 2; ++k) {
      Cocycle t = canonical_cocycle(p, N, a, k);
      t *= x[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(k)];
      X += t;
    }
  }
  return X;
}


/// |Xi[w1 w2] - Xi[w1]|_{w2} - Xi[w2]| in the R-weighted coefficient norm,
/// relative to the size of the terms before cancellation.
inline double cocycle_law_residual(const SchottkyParams& p, const Cocycle& X, const GroupWord& w1,
                                   const GroupWord& w2) {
  const double R = pullback_radius(p);
  const PolyForm x1 = cocycle_eval(p, X, w1);
  const MoebiusMap m2 = word_map(p, w2);
  const PolyForm lhs = cocycle_eval(p, X, w1.times(w2));
  const PolyForm a = poly_pullback(x1, m2, R);
  const PolyForm b = cocycle_eval(p, X, w2);
  const double scale = pullback_scale(x1, m2, R) + b.weighted_norm(R) + lhs.weighted_norm(R);
  return (lhs - a - b).weighted_norm(R) / std::max(1.0, scale);
}

/// Largest generator-value discrepancy between X and its reconstruction from
/// canonical coordinates, relative to max(1, |X|).
inline double canonical_reconstruction_error(const SchottkyParams& p, const Cocycle& X) {
  const double R = pullback_radius(p);
  const Cocycle Y = from_canonical_coordinates(p, X.N, canonical_coordinates(p, X));
  double err = 0.0;
  for (int a = 1; a <= X.genus(); ++a) {
    const PolyForm& u = X.on_generator(a);
    err = std::max(err, (u - Y.on_generator(a)).weighted_norm(R) / std::max(1.0, u.weighted_norm(R)));
  }
  return err;
}

}  // namespace schottky
