#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "stableid/matrix.hpp"
#include "stableid/spectrum.hpp"

namespace test_support {

using stableid::Matrix;

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return stableid::max_abs(a - b);
}

inline Matrix randn(std::size_t rows, std::size_t cols, std::uint64_t seed,
                    double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * g(rng);
  return m;
}

// SPD matrix G G^T + ridge * I with standard normal G.
inline Matrix random_spd(std::size_t n, std::uint64_t seed, double ridge = 0.5) {
  const Matrix g = randn(n, n, seed);
  return stableid::symmetrize(g * stableid::transpose(g) +
                              ridge * Matrix::identity(n));
}

// Random matrix rescaled to the requested spectral radius.
inline Matrix random_with_radius(std::size_t n, std::uint64_t seed, double rho) {
  Matrix g = randn(n, n, seed);
  const double r = stableid::spectral_radius(g);
  if (r == 0.0) {
    g(0, 0) = rho;
    return g;
  }
  return (rho / r) * g;
}

inline Matrix random_stable(std::size_t n, std::uint64_t seed,
                            double rho_max = 0.9) {
  std::mt19937_64 mix(seed);
  std::uniform_real_distribution<double> u(0.1, rho_max);
  return random_with_radius(n, mix(), u(mix));
}

inline Matrix random_unstable(std::size_t n, std::uint64_t seed,
                              double rho_min = 1.05, double rho_max = 2.5) {
  std::mt19937_64 mix(seed);
  std::uniform_real_distribution<double> u(rho_min, rho_max);
  return random_with_radius(n, mix(), u(mix));
}

// det(A - lambda I) by complex Gaussian elimination; oracle for
// characteristic-polynomial residual checks on small matrices.
inline std::complex<double> charpoly_at(const Matrix& a,
                                        std::complex<double> lambda) {
  const std::size_t n = a.rows();
  std::vector<std::complex<double>> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      m[i * n + j] = std::complex<double>(a(i, j), 0.0);
      if (i == j) m[i * n + j] -= lambda;
    }
  std::complex<double> det(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(m[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(m[i * n + k]) > best) {
        best = std::abs(m[i * n + k]);
        piv = i;
      }
    }
    if (best == 0.0) return {0.0, 0.0};
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      det = -det;
    }
    det *= m[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::complex<double> f = m[i * n + k] / m[k * n + k];
      for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return det;
}

// Greedy multiset match of two eigenvalue lists; returns the largest
// pairing distance.
inline double spectrum_distance(std::vector<std::complex<double>> a,
                                std::vector<std::complex<double>> b) {
  double worst = 0.0;
  for (const auto& x : a) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double d = std::abs(x - b[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    worst = std::max(worst, best_d);
    b.erase(b.begin() + static_cast<long>(best));
  }
  return worst;
}

// Smallest eigenvalue of a symmetric matrix.
inline double min_eig_sym(const Matrix& s) {
  return stableid::symmetric_eigen(stableid::symmetrize(s)).values.front();
}

}  // namespace test_support
