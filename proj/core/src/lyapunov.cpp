#include "stableid/lyapunov.hpp"

#include <cmath>
#include <string>

#include "stableid/errors.hpp"
#include "stableid/spectrum.hpp"

namespace stableid {

namespace {

constexpr std::size_t kKronCutoff = 40;
constexpr int kDoublingCap = 200;

Matrix dlyap_kron(const Matrix& theta, const Matrix& s_w) {
  const std::size_t n = theta.rows();
  const std::size_t n2 = n * n;
  // (I - theta (x) theta) vec(S) = vec(S_w), with column-stacked vec:
  // vec(theta S theta^T)[i + j n] = sum_{k,l} theta(i,k) theta(j,l) S(k,l).
  Matrix m(n2, n2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i + j * n;
      for (std::size_t k = 0; k < n; ++k) {
        const double tik = theta(i, k);
        if (tik == 0.0) continue;
        for (std::size_t l = 0; l < n; ++l) {
          m(row, k + l * n) -= tik * theta(j, l);
        }
      }
      m(row, row) += 1.0;
    }
  Matrix rhs(n2, 1);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) rhs(k + l * n, 0) = s_w(k, l);
  const Matrix x = solve_linear(m, rhs);
  Matrix s(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) s(k, l) = x(k + l * n, 0);
  return s;
}

Matrix dlyap_doubling(const Matrix& theta, const Matrix& s_w) {
  Matrix a = theta;
  Matrix s = s_w;
  for (int it = 0; it < kDoublingCap; ++it) {
    const Matrix incr = a * s * transpose(a);
    const Matrix next = symmetrize(s + incr);
    const double step = frobenius_norm(next - s);
    s = next;
    if (step <= 1e-14 * std::max(frobenius_norm(s), 1e-300)) return s;
    a = a * a;
  }
  throw ConvergenceError("discrete Lyapunov doubling did not converge in " +
                         std::to_string(kDoublingCap) + " iterations");
}

}  // namespace

StationaryCovariance solve_dlyap(const Matrix& theta, const Matrix& s_w,
                                 DlyapMethod method) {
  if (!theta.square()) {
    throw DimensionError("solve_dlyap requires a square system matrix");
  }
  if (s_w.rows() != theta.rows() || s_w.cols() != theta.cols()) {
    throw DimensionError("solve_dlyap: S_w shape does not match theta");
  }
  if (!is_spd(s_w)) {
    throw NonSpdError("solve_dlyap: S_w must be symmetric positive definite");
  }
  const double rho = spectral_radius(theta);
  if (!(rho < 1.0 - kStabilityBand)) {
    throw UnstableInputError("solve_dlyap: spectral radius " +
                             std::to_string(rho) +
                             " is not strictly inside the unit disc");
  }

  DlyapMethod chosen = method;
  if (chosen == DlyapMethod::automatic) {
    chosen = theta.rows() <= kKronCutoff ? DlyapMethod::kron : DlyapMethod::doubling;
  }
  Matrix s = (chosen == DlyapMethod::kron) ? dlyap_kron(theta, s_w)
                                           : dlyap_doubling(theta, s_w);
  s = symmetrize(s);

  StationaryCovariance out;
  out.residual = frobenius_norm(s - theta * s * transpose(theta) - s_w) /
                 std::max(frobenius_norm(s), 1e-300);
  out.S = std::move(s);
  out.method = chosen;
  return out;
}

}  // namespace stableid
