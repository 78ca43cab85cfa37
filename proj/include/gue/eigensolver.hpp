#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gue/hermitian_matrix.hpp"

namespace gue {

/// Thrown when an iterative method exceeds its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ascending eigenvalues of one matrix.
struct Spectrum {
  std::size_t n = 0;
  std::vector<double> values;

  /// 1-based access, matching lambda_1 <= ... <= lambda_N.
  double lambda(std::size_t i) const { return values.at(i - 1); }
};

/// Real symmetric tridiagonal matrix.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // size diag.size() - 1
};

inline constexpr int kQlIterationCap = 50;
inline constexpr double kHermitianTolerance = 1e-12;

/**
 * Reduces a Hermitian matrix to real symmetric tridiagonal form by complex
 * Householder reflectors applied to the trailing block in place. The
 * off-diagonal produced by the reflectors is complex; a diagonal unitary
 * similarity rotates each entry onto the nonnegative real axis, so the
 * returned offdiag holds magnitudes.
 */
inline Tridiagonal householder_tridiagonalize(const HermitianMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("householder_tridiagonalize: empty matrix");
  const double scale = m.max_abs();
  if (m.hermitian_defect() > kHermitianTolerance * std::max(scale, 1e-300))
    throw std::invalid_argument("householder_tridiagonalize: matrix is not Hermitian");

  std::vector<complex> a = m.data();
  auto at = [&a, n](std::size_t i, std::size_t j) -> complex& { return a[i * n + j]; };

  Tridiagonal t;
  t.diag.resize(n);
  t.offdiag.resize(n > 0 ? n - 1 : 0);

  std::vector<complex> v(n), p(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t len = n - k - 1;  // rows k+1 .. n-1
    double tail = 0.0;
    for (std::size_t r = 1; r < len; ++r) tail += std::norm(at(k + 1 + r, k));
    const complex x0 = at(k + 1, k);

    if (tail == 0.0) {
      t.offdiag[k] = std::abs(x0);
      continue;
    }

    const double xnorm = std::sqrt(tail + std::norm(x0));
    const double ax0 = std::abs(x0);
    const complex phase = ax0 > 0.0 ? x0 / ax0 : complex(1.0, 0.0);
    const complex alpha = -phase * xnorm;

    for (std::size_t r = 0; r < len; ++r) v[r] = at(k + 1 + r, k);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (std::size_t r = 0; r < len; ++r) vnorm += std::norm(v[r]);
    vnorm = std::sqrt(vnorm);
    for (std::size_t r = 0; r < len; ++r) v[r] /= vnorm;

    // p = B v on the trailing block B = A[k+1.., k+1..]. The loops spell out
    // the complex products; std::complex multiplication goes through the
    // NaN-recovering libgcc path and is several times slower here.
    const std::size_t off = k + 1;
    const double* vd = reinterpret_cast<const double*>(v.data());
    double vp = 0.0;
    for (std::size_t r = 0; r < len; ++r) {
      const double* row = reinterpret_cast<const double*>(&a[(off + r) * n + off]);
      double re = 0.0, im = 0.0;
      for (std::size_t c = 0; c < len; ++c) {
        re += row[2 * c] * vd[2 * c] - row[2 * c + 1] * vd[2 * c + 1];
        im += row[2 * c] * vd[2 * c + 1] + row[2 * c + 1] * vd[2 * c];
      }
      p[r] = complex(re, im);
      vp += v[r].real() * re + v[r].imag() * im;
    }
    // B <- H B H = B - 2 (v w* + w v*), w = p - (v* p) v
    for (std::size_t r = 0; r < len; ++r) p[r] -= vp * v[r];
    const double* pd = reinterpret_cast<const double*>(p.data());
    for (std::size_t r = 0; r < len; ++r) {
      double* row = reinterpret_cast<double*>(&a[(off + r) * n + off]);
      const double vr = 2.0 * vd[2 * r], vi = 2.0 * vd[2 * r + 1];
      const double wr = 2.0 * pd[2 * r], wi = 2.0 * pd[2 * r + 1];
      for (std::size_t c = 0; c < len; ++c) {
        const double pr = pd[2 * c], pi = pd[2 * c + 1];
        const double xr = vd[2 * c], xi = vd[2 * c + 1];
        row[2 * c] -= vr * pr + vi * pi + wr * xr + wi * xi;
        row[2 * c + 1] -= vi * pr - vr * pi + wi * xr - wr * xi;
      }
    }

    t.offdiag[k] = xnorm;  // |alpha|
  }
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = at(i, i).real();
  return t;
}

/**
 * Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL with
 * Wilkinson-type shifts. An off-diagonal entry is deflated once
 * |e_i| <= eps (|d_i| + |d_{i+1}|). Throws ConvergenceError after
 * kQlIterationCap sweeps on one eigenvalue.
 */
inline Spectrum tridiagonal_eigenvalues(const Tridiagonal& t) {
  const int n = static_cast<int>(t.diag.size());
  if (n == 0) throw std::invalid_argument("tridiagonal_eigenvalues: empty matrix");
  if (t.offdiag.size() + 1 != t.diag.size())
    throw std::invalid_argument("tridiagonal_eigenvalues: offdiag must have n-1 entries");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<double> d = t.diag;
  std::vector<double> e(n, 0.0);
  std::copy(t.offdiag.begin(), t.offdiag.end(), e.begin());

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == kQlIterationCap)
          throw ConvergenceError("tridiagonal_eigenvalues: no convergence after " +
                                 std::to_string(kQlIterationCap) + " sweeps at index " +
                                 std::to_string(l));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::sort(d.begin(), d.end());
  return Spectrum{static_cast<std::size_t>(n), std::move(d)};
}

inline Spectrum hermitian_eigenvalues(const HermitianMatrix& m) {
  return tridiagonal_eigenvalues(householder_tridiagonalize(m));
}

}  // namespace gue
