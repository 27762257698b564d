#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "schottky/eichler.hpp"
#include "schottky/group.hpp"
#include "schottky/kahan.hpp"
#include "schottky/parallel.hpp"
#include "schottky/types.hpp"

namespace schottky {

/// Counterclockwise circle z(t) = center + radius*scale*e^{it}.
struct CircleContour {
  cplx center;
  double radius = 1.0;
  int n_nodes = 256;
  double scale = 1.0;

  [[nodiscard]] double effective_radius() const { return radius * scale; }

  void check() const {
    if (!(effective_radius() > 0.0)) throw ConfigError("contour radius must be positive");
    if (n_nodes < 16 || n_nodes % 2 != 0) throw ConfigError("contour needs an even node count >= 16");
  }

  [[nodiscard]] cplx node(int j) const {
    return center + std::polar(effective_radius(), 2.0 * std::numbers::pi * j / n_nodes);
  }

  /// Isometric circle C_c.
  static CircleContour isometric(const SchottkyParams& p, int c, int n_nodes = 256) {
    return {p.center(c), p.radius(c), n_nodes, 1.0};
  }
};

inline constexpr double contour_gate_tolerance = 1e-10;

/// Trapezoid values of a vector-valued integrand: integral_n and the
/// same rule on the even-indexed half of the nodes.
struct ContourSums {
  std::vector<cplx> full;
  std::vector<cplx> half;
  std::vector<double> l1;  // sum |f| |dz|, the scale the gate is measured against
};

/// Runs f at every node (concurrently) and sums in node order. `f(z)` returns
/// a vector of fixed length `width`.
template <typename Fn>
ContourSums circle_sums(const CircleContour& c, std::size_t width, Fn&& f) {
  c.check();
  const auto n = static_cast<std::size_t>(c.n_nodes);
  std::vector<std::vector<cplx>> vals(n);
  parallel_for(n, [&](std::size_t j) {
    vals[j] = f(c.node(static_cast<int>(j)));
    if (vals[j].size() != width) throw ConfigError("integrand returned the wrong width");
  });
  const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::vector<KahanSum> full(width), half(width);
  ContourSums out;
  out.l1.assign(width, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx z = c.node(static_cast<int>(j));
    const cplx dz = cplx{0.0, 1.0} * (z - c.center);
    for (std::size_t i = 0; i < width; ++i) {
      const cplx t = vals[j][i] * dz;
      full[i] += w * t;
      if (j % 2 == 0) half[i] += 2.0 * w * t;
      out.l1[i] += w * std::abs(t);
    }
  }
  for (std::size_t i = 0; i < width; ++i) {
    out.full.push_back(full[i].value());
    out.half.push_back(half[i].value());
  }
  return out;
}

/// Node-count stability gate: the n-node and n/2-node rules agree to
/// `tol` relative to max(1, integral of |f dz|).
inline void check_contour_gate(const ContourSums& s, double tol) {
  if (tol <= 0.0) return;
  for (std::size_t i = 0; i < s.full.size(); ++i) {
    const double diff = std::abs(s.full[i] - s.half[i]);
    if (diff > tol * std::max(1.0, s.l1[i])) {
      std::ostringstream os;
      os << "contour quadrature not converged: |I(n) - I(n/2)| = " << diff;
      throw ConvergenceError(os.str());
    }
  }
}

/// Integrals of every component of a vector-valued integrand.
template <typename Fn>
std::vector<cplx> circle_integrals(const CircleContour& c, std::size_t width, Fn&& f,
                                   double gate_tol = contour_gate_tolerance) {
  auto s = circle_sums(c, width, std::forward<Fn>(f));
  check_contour_gate(s, gate_tol);
  return std::move(s.full);
}

/// Contour integral of f(z) dz.
inline cplx circle_integral(const std::function<cplx(cplx)>& f, const CircleContour& c,
                            double gate_tol = contour_gate_tolerance) {
  return circle_integrals(c, 1, [&](cplx z) { return std::vector<cplx>{f(z)}; }, gate_tol)[0];
}

/// (1/2 pi i) sum_a oint_{C_a} T(z) Xi[gamma_a](z) dz.
inline cplx pairing(const SchottkyParams& p, const std::function<cplx(cplx)>& T, const Cocycle& X,
                    int n_nodes = 256, double gate_tol = contour_gate_tolerance) {
  if (X.genus() != p.genus()) throw ConfigError("cocycle genus does not match the surface");
  cplx total{};
  for (int a = 1; a <= p.genus(); ++a) {
    const PolyForm& xi = X.on_generator(a);
    bool zero = true;
    for (const cplx& c : xi.coeffs()) zero = zero && c == cplx{};
    if (zero) continue;
    total += circle_integral([&](cplx z) { return T(z) * xi.eval(z); },
                             CircleContour::isometric(p, a, n_nodes), gate_tol);
  }
  return total / two_pi_i;
}

}  // namespace schottky
