#pragma once

#include "schottky/types.hpp"

namespace schottky {

/// Compensated (Kahan) accumulator over complex values, componentwise.
class KahanSum {
 public:
  void add(double re, double im) {
    const double yr = re - cr_;
    const double tr = sr_ + yr;
    cr_ = (tr - sr_) - yr;
    sr_ = tr;
    const double yi = im - ci_;
    const double ti = si_ + yi;
    ci_ = (ti - si_) - yi;
    si_ = ti;
  }
  void add(cplx z) { add(z.real(), z.imag()); }
  KahanSum& operator+=(cplx z) {
    add(z);
    return *this;
  }
  [[nodiscard]] cplx value() const { return {sr_, si_}; }

 private:
  double sr_ = 0.0, si_ = 0.0, cr_ = 0.0, ci_ = 0.0;
};

}  // namespace schottky
