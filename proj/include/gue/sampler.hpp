#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "gue/hermitian_matrix.hpp"
#include "gue/rng.hpp"

namespace gue {

/**
 * Draws an n-by-n GUE matrix with density proportional to exp(-tr X^2).
 *
 * Diagonal entries are real N(0, 1/2). Each above-diagonal entry has
 * independent real and imaginary parts N(0, 1/4), since the entry enters
 * tr X^2 twice; the spectrum then fills [-sqrt(2N), sqrt(2N)]. The lower
 * triangle is filled by conjugation so the result is exactly Hermitian. Entries are drawn row by row over the upper triangle, which
 * fixes the mapping from seed to matrix.
 */
inline HermitianMatrix sample_gue(std::size_t n, SeedSpec seed) {
  if (n == 0) throw std::invalid_argument("sample_gue: n must be positive");
  const double diag_sd = std::sqrt(0.5);
  const double off_sd = 0.5;

  NormalSource normal(seed);
  HermitianMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = complex(diag_sd * normal(), 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double re = off_sd * normal();
      const double im = off_sd * normal();
      m(i, j) = complex(re, im);
      m(j, i) = complex(re, -im);
    }
  }
  return m;
}

}  // namespace gue
