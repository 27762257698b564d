#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "schottky/moebius.hpp"
#include "schottky/types.hpp"

namespace schottky {

/// Marked Schottky group in canonical parameters (w_a, w_{-a}, rho_a).
/// Circles are addressed by signed index c in {+-1, ..., +-g}: C_{+a} is
/// centred at handles[a-1].w_plus, C_{-a} at handles[a-1].w_minus.
struct SchottkyParams {
  std::vector<HandleParams> handles;

  [[nodiscard]] int genus() const { return static_cast<int>(handles.size()); }

  [[nodiscard]] const HandleParams& handle(int a) const {
    if (a < 1 || a > genus()) throw IndexError("handle index out of range");
    return handles[static_cast<std::size_t>(a - 1)];
  }
  HandleParams& handle(int a) {
    if (a < 1 || a > genus()) throw IndexError("handle index out of range");
    return handles[static_cast<std::size_t>(a - 1)];
  }

  [[nodiscard]] cplx center(int c) const {
    const auto& h = handle(std::abs(c));
    return c > 0 ? h.w_plus : h.w_minus;
  }
  [[nodiscard]] double radius(int c) const { return handle(std::abs(c)).radius(); }

  /// gamma_a for a > 0, its inverse for a < 0.
  [[nodiscard]] MoebiusMap generator(int letter) const {
    const MoebiusMap m = handle_map(handle(std::abs(letter)));
    return letter > 0 ? m : m.inverse();
  }

  /// Signed circle indices in the order 1, -1, 2, -2, ...
  [[nodiscard]] std::vector<int> circle_indices() const {
    std::vector<int> out;
    for (int a = 1; a <= genus(); ++a) {
      out.push_back(a);
      out.push_back(-a);
    }
    return out;
  }

  [[nodiscard]] double max_center_modulus() const {
    double m = 0.0;
    for (const auto& h : handles) m = std::max({m, std::abs(h.w_plus), std::abs(h.w_minus)});
    return m;
  }
};

/// Classical parameters: repelling fixed point W_a, attracting W_{-a},
/// multiplier q.
struct ClassicalHandle {
  cplx W_plus;
  cplx W_minus;
  cplx q;
};

inline HandleParams from_classical(const ClassicalHandle& h) {
  if (std::abs(1.0 - h.q) < 1e-14) throw DegenerateError("classical handle with q = 1");
  if (h.W_plus == h.W_minus) throw DegenerateError("coincident fixed points");
  const cplx one_m_q = 1.0 - h.q;
  const cplx diff = h.W_plus - h.W_minus;
  return {(h.W_plus - h.q * h.W_minus) / one_m_q, (h.W_minus - h.q * h.W_plus) / one_m_q,
          -h.q * diff * diff / (one_m_q * one_m_q)};
}

inline ClassicalHandle to_classical(const HandleParams& h) {
  const FixedPoints fp = fixed_points(handle_map(h));
  return {fp.repelling.value(), fp.attracting.value(), fp.multiplier};
}

// ---------------------------------------------------------------------------
// Validation

struct DiscOverlap {
  int circle_u;
  int circle_v;
  double distance;  // |center_u - center_v|
  double required;  // r_u + r_v
};

struct ValidationReport {
  std::vector<DiscOverlap> violations;
  std::vector<int> zero_rho;  // handles with rho = 0
  [[nodiscard]] bool valid() const { return violations.empty() && zero_rho.empty(); }
};

inline ValidationReport validate(const SchottkyParams& p) {
  ValidationReport rep;
  for (int a = 1; a <= p.genus(); ++a)
    if (p.handle(a).rho == cplx{}) rep.zero_rho.push_back(a);
  const auto idx = p.circle_indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const double dist = std::abs(p.center(idx[i]) - p.center(idx[j]));
      const double req = p.radius(idx[i]) + p.radius(idx[j]);
      if (!(dist > req)) rep.violations.push_back({idx[i], idx[j], dist, req});
    }
  return rep;
}

inline void require_valid(const SchottkyParams& p, const std::string& what) {
  const auto rep = validate(p);
  if (rep.valid()) return;
  std::ostringstream os;
  os << what << ": parameters violate disc disjointness";
  for (const auto& v : rep.violations)
    os << " [C" << v.circle_u << ",C" << v.circle_v << ": " << v.distance << " <= " << v.required
       << "]";
  if (!rep.zero_rho.empty()) os << " [zero rho]";
  throw InvalidParamsError(os.str());
}

inline constexpr double boundary_epsilon = 1e-9;

/// Strict exterior of all 2g closed discs, with margin `eps`.
inline bool in_fundamental_domain(const SchottkyParams& p, cplx z, double eps = boundary_epsilon) {
  for (int c : p.circle_indices())
    if (std::abs(z - p.center(c)) <= p.radius(c) + eps) return false;
  return true;
}

/// Distance from z to the nearest circle (negative inside a disc).
inline double clearance(const SchottkyParams& p, cplx z) {
  double best = INFINITY;
  for (int c : p.circle_indices()) best = std::min(best, std::abs(z - p.center(c)) - p.radius(c));
  return best;
}

// ---------------------------------------------------------------------------
// Words

/// Letter order used everywhere: 1 < -1 < 2 < -2 < ...
inline int letter_rank(int letter) { return 2 * (std::abs(letter) - 1) + (letter < 0 ? 1 : 0); }
inline int letter_from_rank(int rank) { return (rank % 2 == 0) ? rank / 2 + 1 : -(rank / 2 + 1); }

struct GroupWord {
  std::vector<int> letters;

  [[nodiscard]] std::size_t length() const { return letters.size(); }
  [[nodiscard]] bool empty() const { return letters.empty(); }

  [[nodiscard]] bool is_reduced() const {
    for (std::size_t i = 1; i < letters.size(); ++i)
      if (letters[i] == -letters[i - 1]) return false;
    return true;
  }

  [[nodiscard]] GroupWord inverse() const {
    GroupWord w;
    w.letters.assign(letters.rbegin(), letters.rend());
    for (int& l : w.letters) l = -l;
    return w;
  }

  /// Free reduction of this * rhs.
  [[nodiscard]] GroupWord times(const GroupWord& rhs) const {
    GroupWord w = *this;
    for (int l : rhs.letters) {
      if (!w.letters.empty() && w.letters.back() == -l)
        w.letters.pop_back();
      else
        w.letters.push_back(l);
    }
    return w;
  }

  friend bool operator==(const GroupWord&, const GroupWord&) = default;

  [[nodiscard]] std::string str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < letters.size(); ++i) os << (i ? "," : "") << letters[i];
    os << ')';
    return os.str();
  }
};

/// Ordered product of the generators named by the word (leftmost letter is
/// applied last).
inline MoebiusMap word_map(const SchottkyParams& p, const GroupWord& w) {
  MoebiusMap m;
  for (int l : w.letters) {
    if (l == 0 || std::abs(l) > p.genus()) throw IndexError("letter out of range");
    m = m * p.generator(l);
  }
  return m;
}

struct GroupElement {
  GroupWord word;
  MoebiusMap map;
};

inline std::size_t word_count(int genus, int max_len) {
  std::size_t total = 1, shell = static_cast<std::size_t>(2 * genus);
  for (int l = 1; l <= max_len; ++l) {
    total += shell;
    shell *= static_cast<std::size_t>(2 * genus - 1);
  }
  return total;
}

inline constexpr std::size_t default_word_cap = 4'000'000;

/// All reduced words of length 0..max_len, grouped into shells by length and
/// ordered lexicographically within a shell. Maps are built by suffix
/// extension, one matrix product per word.
class Enumeration {
 public:
  Enumeration(const SchottkyParams& p, int max_len, std::size_t cap = default_word_cap)
      : genus_(p.genus()), max_len_(max_len) {
    if (max_len < 0) throw ConfigError("negative word length");
    if (genus_ < 1) throw ConfigError("genus must be positive");
    const std::size_t count = word_count(genus_, max_len);
    if (count > cap) {
      std::ostringstream os;
      os << "enumeration of " << count << " words exceeds cap " << cap;
      throw CapacityError(os.str());
    }
    elements_.reserve(count);
    std::vector<MoebiusMap> gens;
    for (int r = 0; r < 2 * genus_; ++r) gens.push_back(p.generator(letter_from_rank(r)));

    elements_.push_back({GroupWord{}, MoebiusMap::identity()});
    shell_begin_ = {0, 1};
    for (int len = 1; len <= max_len; ++len) {
      const std::size_t lo = shell_begin_[static_cast<std::size_t>(len - 1)];
      const std::size_t hi = shell_begin_[static_cast<std::size_t>(len)];
      for (std::size_t i = lo; i < hi; ++i) {
        for (int r = 0; r < 2 * genus_; ++r) {
          const int l = letter_from_rank(r);
          const auto& parent = elements_[i];
          if (!parent.word.empty() && parent.word.letters.back() == -l) continue;
          GroupElement e;
          e.word.letters = parent.word.letters;
          e.word.letters.push_back(l);
          e.map = parent.map * gens[static_cast<std::size_t>(r)];
          elements_.push_back(std::move(e));
        }
      }
      shell_begin_.push_back(elements_.size());
    }
    coeffs_.reserve(8 * elements_.size());
    for (const auto& e : elements_)
      for (const cplx v : {e.map.a(), e.map.b(), e.map.c(), e.map.d()}) {
        coeffs_.push_back(v.real());
        coeffs_.push_back(v.imag());
      }
  }

  [[nodiscard]] int genus() const { return genus_; }
  [[nodiscard]] int max_len() const { return max_len_; }
  [[nodiscard]] std::size_t size() const { return elements_.size(); }
  [[nodiscard]] const std::vector<GroupElement>& elements() const { return elements_; }
  [[nodiscard]] const GroupElement& operator[](std::size_t i) const { return elements_[i]; }
  /// Index range [shell_begin(l), shell_begin(l+1)) holds the words of length l.
  [[nodiscard]] std::size_t shell_begin(int len) const {
    return shell_begin_[static_cast<std::size_t>(len)];
  }
  /// Matrix entries of word i as re/im pairs of a, b, c, d at [8i, 8i+8).
  [[nodiscard]] const double* coefficients() const { return coeffs_.data(); }

 private:
  int genus_;
  int max_len_;
  std::vector<GroupElement> elements_;
  std::vector<std::size_t> shell_begin_;
  std::vector<double> coeffs_;
};

inline std::vector<GroupElement> enumerate(const SchottkyParams& p, int max_len,
                                           std::size_t cap = default_word_cap) {
  require_valid(p, "enumerate");
  return Enumeration(p, max_len, cap).elements();
}

// ---------------------------------------------------------------------------
// Fundamental-domain reduction

struct Reduction {
  GroupWord word;  // lambda, with lambda(y) = image
  cplx image;
};

inline constexpr int reduce_max_iter = 200;

inline constexpr double reduce_cycle_tolerance = 1e-10;

/// Finds lambda with lambda(y) in the fundamental domain by repeatedly
/// ejecting y from the disc that contains it: gamma_c sends the interior of
/// the disc at C_c to the exterior of the disc at C_{-c}. An orbit that
/// returns to a visited point means y is fixed by a group element, i.e. a
/// limit point; that is reported as non-termination straight away.
inline Reduction reduce(const SchottkyParams& p, cplx y, double eps = boundary_epsilon) {
  std::vector<int> applied;
  std::vector<cplx> visited;
  cplx z = y;
  for (int iter = 0; iter <= reduce_max_iter; ++iter) {
    int inside = 0;
    for (int c : p.circle_indices()) {
      const double d = std::abs(z - p.center(c)) - p.radius(c);
      if (std::abs(d) < eps) throw BoundaryError("point lies within eps of an isometric circle");
      if (d < 0.0) {
        inside = c;
        break;
      }
    }
    if (inside == 0) {
      GroupWord w;
      w.letters.assign(applied.rbegin(), applied.rend());
      return {w, z};
    }
    for (const cplx& v : visited)
      if (std::abs(v - z) <= reduce_cycle_tolerance * (1.0 + std::abs(z)))
        throw NonTerminationError("reduction orbit is periodic; point is a limit point");
    if (iter == reduce_max_iter) break;
    visited.push_back(z);
    z = p.generator(inside)(z);
    applied.push_back(inside);
  }
  throw NonTerminationError("reduction did not terminate; point is in or near the limit set");
}

// ---------------------------------------------------------------------------
// SL2(C) action on parameters

/// Conjugates every generator by M (gamma -> M gamma M^{-1}) using the
/// closed-form parameter action; throws InvalidParamsError when the result
/// leaves the parameter space.
inline SchottkyParams transport(const SchottkyParams& p, const MoebiusMap& m) {
  const cplx A = m.a(), B = m.b(), C = m.c(), D = m.d();
  SchottkyParams out;
  for (const auto& h : p.handles) {
    const cplx cp = C * h.w_plus + D;
    const cplx cm = C * h.w_minus + D;
    const cplx den = cp * cm - h.rho * C * C;
    if (std::abs(den) < 1e-300) throw InvalidParamsError("transport sends a circle centre to infinity");
    HandleParams t;
    t.w_plus = ((A * h.w_plus + B) * cm - h.rho * A * C) / den;
    t.w_minus = ((A * h.w_minus + B) * cp - h.rho * A * C) / den;
    t.rho = h.rho / (den * den);
    out.handles.push_back(t);
  }
  require_valid(out, "transport");
  return out;
}

}  // namespace schottky
