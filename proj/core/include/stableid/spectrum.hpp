#pragma once

#include <complex>
#include <vector>

#include "stableid/matrix.hpp"

namespace stableid {

// Half-width of the floating-point band around the unit spectral radius.
// The set of stable matrices is open, so radii inside [1 - band, 1 + band]
// are classified as "boundary" and treated conservatively by callers.
inline constexpr double kStabilityBand = 1e-12;

enum class StabilityClass { stable, boundary, unstable };

StabilityClass classify_stability(double rho);

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  int qr_sweeps = 0;
};

// All eigenvalues of a general square matrix: balancing, Householder
// reduction to upper Hessenberg form, then the implicitly shifted double
// QR iteration with 2x2 deflation (real Schur reduction, values only).
// A subdiagonal entry deflates once it drops below
// 1e-12 * (|h_ii| + |h_(i+1)(i+1)|); the iteration errors out after 100*n
// sweeps. Conjugate pairs are exact for real input.
Spectrum eigenvalues(const Matrix& a);

double spectral_radius(const Matrix& a);
bool is_stable(const Matrix& a);  // rho(A) < 1 - kStabilityBand

// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// Values ascend; vectors.col(i) is the unit eigenvector of values[i].
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
};

SymmetricEigen symmetric_eigen(const Matrix& s);

// Largest singular value, computed as sqrt(rho(A^T A)).
double operator_norm(const Matrix& a);

// sigma_max / sigma_min; with symmetric_pd set, lambda_max / lambda_min.
double condition_number(const Matrix& a, bool symmetric_pd = false);

// Symmetric square root R of an SPD matrix, R R = S.
Matrix sqrt_spd(const Matrix& s);

// Full eigenbasis of a diagonalizable real matrix. Eigenvectors are found
// by inverse iteration with the computed eigenvalues as shifts; values and
// vectors are stored column-major. Throws DefectiveMatrixError if the
// basis is numerically singular (condition estimate >= 1e10).
struct EigenBasis {
  std::vector<std::complex<double>> values;
  std::vector<std::complex<double>> vectors;  // column-major n x n
  double basis_condition = 0.0;

  std::complex<double> vec(std::size_t i, std::size_t col) const {
    return vectors[col * values.size() + i];
  }
};

EigenBasis eigen_basis(const Matrix& a);

}  // namespace stableid
