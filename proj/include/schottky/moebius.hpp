#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "schottky/types.hpp"

namespace schottky {

/// A point of the Riemann sphere: a finite complex value or infinity.
class SpherePoint {
 public:
  SpherePoint(cplx z) : z_(z) {}  // NOLINT(google-explicit-constructor)
  SpherePoint(double x) : z_(cplx{x, 0.0}) {}  // NOLINT
  static SpherePoint infinity() { return SpherePoint(); }

  [[nodiscard]] bool is_infinity() const { return !z_.has_value(); }
  [[nodiscard]] bool is_finite() const { return z_.has_value(); }

  /// Throws PoleError for the point at infinity.
  [[nodiscard]] cplx value() const {
    if (!z_) throw PoleError("point at infinity has no finite value");
    return *z_;
  }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) { return a.z_ == b.z_; }

 private:
  SpherePoint() = default;
  std::optional<cplx> z_;
};

/// Möbius map z -> (az+b)/(cz+d), stored with determinant one.
class MoebiusMap {
 public:
  MoebiusMap() = default;

  /// Normalizes by the principal square root of the determinant.
  MoebiusMap(cplx a, cplx b, cplx c, cplx d) {
    const cplx det = a * d - b * c;
    if (std::abs(det) == 0.0 || !std::isfinite(std::abs(det)))
      throw DegenerateError("Moebius matrix is singular");
    const cplx s = 1.0 / std::sqrt(det);
    a_ = a * s;
    b_ = b * s;
    c_ = c * s;
    d_ = d * s;
  }

  static MoebiusMap identity() { return {}; }

  /// Entries taken as given; the caller guarantees ad - bc = 1 up to rounding.
  static MoebiusMap unnormalized(cplx a, cplx b, cplx c, cplx d) {
    MoebiusMap m;
    m.a_ = a;
    m.b_ = b;
    m.c_ = c;
    m.d_ = d;
    return m;
  }

  [[nodiscard]] cplx a() const { return a_; }
  [[nodiscard]] cplx b() const { return b_; }
  [[nodiscard]] cplx c() const { return c_; }
  [[nodiscard]] cplx d() const { return d_; }
  [[nodiscard]] cplx det() const { return a_ * d_ - b_ * c_; }
  [[nodiscard]] cplx trace() const { return a_ + d_; }

  [[nodiscard]] SpherePoint apply(const SpherePoint& p) const {
    if (p.is_infinity()) {
      if (c_ == cplx{}) return SpherePoint::infinity();
      return a_ / c_;
    }
    const cplx z = p.value();
    const cplx den = c_ * z + d_;
    if (den == cplx{}) return SpherePoint::infinity();
    return (a_ * z + b_) / den;
  }

  /// Finite-only fast path; the caller guarantees cz+d != 0.
  [[nodiscard]] cplx operator()(cplx z) const { return (a_ * z + b_) / (c_ * z + d_); }

  /// Derivative 1/(cz+d)^2.
  [[nodiscard]] cplx deriv(cplx z) const {
    const cplx den = c_ * z + d_;
    if (std::abs(den) < 1e-300) throw PoleError("derivative evaluated at the pole of the map");
    return 1.0 / (den * den);
  }

  [[nodiscard]] MoebiusMap inverse() const { return unnormalized(d_, -b_, -c_, a_); }

  /// Matrix product (this * rhs), i.e. z -> this(rhs(z)). Not renormalized:
  /// for long words ad - bc cancels catastrophically.
  [[nodiscard]] MoebiusMap compose(const MoebiusMap& rhs) const {
    return unnormalized(a_ * rhs.a_ + b_ * rhs.c_, a_ * rhs.b_ + b_ * rhs.d_, c_ * rhs.a_ + d_ * rhs.c_,
                        c_ * rhs.b_ + d_ * rhs.d_);
  }

  friend MoebiusMap operator*(const MoebiusMap& l, const MoebiusMap& r) { return l.compose(r); }

 private:
  cplx a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0};
};

inline SpherePoint apply(const MoebiusMap& m, const SpherePoint& z) { return m.apply(z); }
inline cplx deriv(const MoebiusMap& m, cplx z) { return m.deriv(z); }
inline MoebiusMap compose(const MoebiusMap& m1, const MoebiusMap& m2) { return m1.compose(m2); }
inline MoebiusMap inverse(const MoebiusMap& m) { return m.inverse(); }

/// Largest entrywise distance between two maps modulo the overall sign.
inline double distance_mod_sign(const MoebiusMap& m, const MoebiusMap& n) {
  auto dist = [&](double s) {
    return std::max({std::abs(m.a() - s * n.a()), std::abs(m.b() - s * n.b()),
                     std::abs(m.c() - s * n.c()), std::abs(m.d() - s * n.d())});
  };
  return std::min(dist(1.0), dist(-1.0));
}

struct FixedPoints {
  SpherePoint attracting;
  SpherePoint repelling;
  cplx multiplier;  // derivative at the attracting point, |q| < 1
};

inline constexpr double loxodromy_tolerance = 1e-10;

/// Fixed points of a loxodromic map. Throws ParabolicError when the
/// eigenvalues have modulus one within `loxodromy_tolerance` (elliptic,
/// parabolic and identity maps).
inline FixedPoints fixed_points(const MoebiusMap& m) {
  const cplx tr = m.trace();
  const cplx disc = std::sqrt(tr * tr - 4.0);
  cplx lam_big = 0.5 * (tr + disc);
  if (std::abs(lam_big) < std::abs(0.5 * (tr - disc))) lam_big = 0.5 * (tr - disc);
  const cplx lam_small = 1.0 / lam_big;
  if (std::abs(lam_big) - 1.0 <= loxodromy_tolerance)
    throw ParabolicError("map is not loxodromic (|trace| criterion)");
  const cplx q = lam_small * lam_small;

  const cplx a = m.a(), b = m.b(), c = m.c(), d = m.d();
  if (std::abs(c) < 1e-300) {
    // z -> (a/d) z + b/d fixes infinity and b/(d-a).
    const SpherePoint finite = b / (d - a);
    if (std::abs(a / d) < 1.0) return {finite, SpherePoint::infinity(), q};
    return {SpherePoint::infinity(), finite, q};
  }
  // c z^2 + (d - a) z - b = 0, solved without cancellation.
  const cplx p = d - a;
  const cplx root = std::sqrt(p * p + 4.0 * b * c);
  const cplx s = std::abs(p + root) >= std::abs(p - root) ? p + root : p - root;
  const cplx qq = -0.5 * s;
  const cplx z1 = qq / c;
  const cplx z2 = std::abs(qq) > 0.0 ? -b / qq : -d / c;
  // At a fixed point cz+d equals an eigenvalue; the attracting point has the
  // larger one, since the derivative there is 1/(cz+d)^2.
  if (std::abs(c * z1 + d) >= std::abs(c * z2 + d)) return {z1, z2, q};
  return {z2, z1, q};
}

/// One handle in canonical Schottky parameters: the isometric circle C_a is
/// centred at `w_plus` and its partner C_{-a} at `w_minus`, both of radius
/// sqrt|rho|.
struct HandleParams {
  cplx w_plus;
  cplx w_minus;
  cplx rho;

  [[nodiscard]] double radius() const { return std::sqrt(std::abs(rho)); }
};

/// Generator z -> w_minus + rho / (z - w_plus).
inline MoebiusMap handle_map(const HandleParams& h) {
  if (h.rho == cplx{}) throw DegenerateError("handle with rho = 0");
  return {h.w_minus, h.rho - h.w_plus * h.w_minus, 1.0, -h.w_plus};
}

}  // namespace schottky
