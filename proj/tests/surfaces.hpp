#pragma once

#include <random>

#include "schottky/group.hpp"

namespace testing_surfaces {

using schottky::cplx;
using schottky::SchottkyParams;

// Two handles on the real axis; the reference surface for most checks.
inline SchottkyParams reference() { return {{{-6.0, -2.0, 0.09}, {2.0, 6.0, 0.09}}}; }

inline SchottkyParams single_handle() { return {{{-2.0, 2.0, 0.25}}}; }

inline SchottkyParams genus_three() {
  return {{{-6.0, -2.0, 0.09}, {2.0, 6.0, 0.09}, {cplx{-2.0, 4.0}, cplx{2.0, 4.0}, 0.09}}};
}

inline cplx random_point(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng)};
}

inline schottky::GroupWord random_word(std::mt19937_64& rng, int genus, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> letter(1, genus);
  std::bernoulli_distribution sign(0.5);
  schottky::GroupWord w;
  const int n = len(rng);
  while (static_cast<int>(w.length()) < n) {
    const int l = sign(rng) ? letter(rng) : -letter(rng);
    if (!w.letters.empty() && w.letters.back() == -l) continue;
    w.letters.push_back(l);
  }
  return w;
}

}  // namespace testing_surfaces
