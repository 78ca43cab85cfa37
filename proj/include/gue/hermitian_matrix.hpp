#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gue {

using complex = std::complex<double>;

/// Dense square complex matrix, row-major. Holds GUE samples and their
/// principal minors; Hermitian symmetry is maintained by the producers
/// (sampler, principal_minor) and checked by consumers that rely on it.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(std::size_t n) : n_(n), data_(n * n) {
    if (n == 0) throw std::invalid_argument("HermitianMatrix: dimension must be positive");
  }

  std::size_t size() const noexcept { return n_; }

  complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  const complex& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * n_ + j];
  }

  const std::vector<complex>& data() const noexcept { return data_; }

  /// Largest |a_ij - conj(a_ji)|.
  double hermitian_defect() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  double trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i).real();
    return t;
  }

  /// tr(A^2) = sum |a_ij|^2 for Hermitian A.
  double trace_of_square() const noexcept {
    double t = 0.0;
    for (const auto& z : data_) t += std::norm(z);
    return t;
  }

  friend bool operator==(const HermitianMatrix&, const HermitianMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<complex> data_;
};

/// Top-left k-by-k block.
inline HermitianMatrix principal_minor(const HermitianMatrix& m, std::size_t k) {
  if (k == 0 || k > m.size())
    throw std::invalid_argument("principal_minor: k must satisfy 1 <= k <= n");
  HermitianMatrix out(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace gue
