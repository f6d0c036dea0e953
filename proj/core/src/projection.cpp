#include "stableid/projection.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include "stableid/errors.hpp"
#include "stableid/lyapunov.hpp"
#include "stableid/riccati.hpp"
#include "stableid/spectrum.hpp"

namespace stableid {

namespace {

void require_square_match(const Matrix& theta_prime, const Matrix& s_w,
                          const char* who) {
  if (!theta_prime.square()) {
    throw DimensionError(std::string(who) + ": matrix must be square");
  }
  if (s_w.rows() != theta_prime.rows() || s_w.cols() != theta_prime.cols()) {
    throw DimensionError(std::string(who) + ": S_w shape mismatch");
  }
}

}  // namespace

RateValue rate_function(const Matrix& theta_prime, const Matrix& theta,
                        const Matrix& s_w) {
  require_square_match(theta_prime, s_w, "rate_function");
  if (theta.rows() != theta_prime.rows() || theta.cols() != theta_prime.cols()) {
    throw DimensionError("rate_function: theta shape mismatch");
  }
  if (!is_spd(s_w)) throw NonSpdError("rate_function: S_w must be SPD");

  RateValue out;
  out.theta_prime = theta_prime;
  out.theta = theta;
  const double rho = spectral_radius(theta);
  if (!(rho < 1.0 - kStabilityBand)) {
    out.infinite = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  const Matrix s_theta = solve_dlyap(theta, s_w).S;
  const Matrix diff = theta_prime - theta;
  const Matrix m = symmetrize(diff * s_theta * transpose(diff));
  out.value = std::max(0.5 * trace(solve_linear(s_w, m)), 0.0);
  return out;
}

ProjectionResult project_to_stable(const Matrix& theta_prime, const Matrix& s_w,
                                   const Matrix& q, double delta) {
  require_square_match(theta_prime, s_w, "project_to_stable");
  if (q.rows() != theta_prime.rows() || q.cols() != theta_prime.cols()) {
    throw DimensionError("project_to_stable: Q shape mismatch");
  }
  if (!is_spd(s_w)) throw NonSpdError("project_to_stable: S_w must be SPD");
  if (!is_spd(q)) throw NonSpdError("project_to_stable: Q must be SPD");
  if (!(delta > 0.0)) {
    throw InvalidArgumentError("project_to_stable: delta must be positive");
  }

  const std::size_t n = theta_prime.rows();
  ProjectionResult out;
  out.delta = delta;
  out.S_w = s_w;

  const double rho = spectral_radius(theta_prime);
  if (rho < 1.0 - kStabilityBand) {
    // Inputs already in the open stable set pass through unchanged.
    out.theta_star = theta_prime;
    out.P_delta = Matrix(n, n);
    out.gain = Matrix(n, n);
    out.spectral_radius_star = rho;
    out.was_already_stable = true;
    return out;
  }

  const Matrix g = symmetrize((2.0 * delta) * s_w);
  const DareSolution dare = solve_dare_inverse_weight(theta_prime, g, q);
  out.theta_star = theta_prime + dare.K;
  out.P_delta = dare.P;
  out.gain = dare.K;
  out.spectral_radius_star = dare.closed_loop_radius;
  out.dare_residual = dare.residual;
  out.dare_iterations = dare.iterations;

  out.rate_at_star = rate_function(theta_prime, out.theta_star, s_w).value;
  const double kappa = condition_number(s_w, /*symmetric_pd=*/true);
  out.epsilon = std::sqrt(2.0 * kappa * out.rate_at_star);
  out.epsilon_single_kappa = std::sqrt(kappa * out.rate_at_star);
  return out;
}

DeltaSweepResult delta_sweep(const Matrix& theta_prime, const Matrix& s_w,
                             const Matrix& q, const std::vector<double>& deltas) {
  if (deltas.empty()) {
    throw InvalidArgumentError("delta_sweep: delta list must be non-empty");
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) {
      throw InvalidArgumentError("delta_sweep: deltas must be positive");
    }
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw InvalidArgumentError("delta_sweep: deltas must be strictly decreasing");
    }
  }

  DeltaSweepResult out;
  out.projections.reserve(deltas.size());
  out.trace_objectives.reserve(deltas.size());
  for (double d : deltas) {
    ProjectionResult proj = project_to_stable(theta_prime, s_w, q, d);
    const Matrix s_star = solve_dlyap(proj.theta_star, s_w).S;
    out.trace_objectives.push_back(trace(q * s_star));
    out.projections.push_back(std::move(proj));
  }

  // Rates must be nondecreasing and trace objectives nonincreasing in
  // delta; the input list descends, so the recorded sequences run the
  // other way. Anything beyond 1e-7 relative slack is a solver defect.
  for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
    const double rate_hi = out.projections[i].rate_at_star;     // larger delta
    const double rate_lo = out.projections[i + 1].rate_at_star;  // smaller delta
    if (rate_lo > rate_hi + 1e-7 * std::max(std::fabs(rate_hi), 1.0)) {
      throw MonotonicityViolationError(
          "delta_sweep: rate increased from " + std::to_string(rate_hi) +
          " to " + std::to_string(rate_lo) + " as delta decreased");
    }
    const double tr_hi = out.trace_objectives[i];
    const double tr_lo = out.trace_objectives[i + 1];
    if (tr_lo < tr_hi - 1e-7 * std::max(std::fabs(tr_hi), 1.0)) {
      throw MonotonicityViolationError(
          "delta_sweep: trace objective decreased from " + std::to_string(tr_hi) +
          " to " + std::to_string(tr_lo) + " as delta decreased");
    }
  }

  const std::size_t n = theta_prime.rows();
  out.bracket.r_upper = rate_function(theta_prime, Matrix(n, n), s_w).value;
  double r_lower = out.projections.front().rate_at_star;
  for (const auto& p : out.projections) r_lower = std::min(r_lower, p.rate_at_star);
  out.bracket.r_lower = r_lower;
  out.bracket.delta_grid.reserve(deltas.size());
  for (std::size_t i = deltas.size(); i-- > 0;) {
    out.bracket.delta_grid.push_back({deltas[i], out.projections[i].rate_at_star});
  }
  return out;
}

double epsilon_bound(const Matrix& theta_hat, const ProjectionResult& projection,
                     const Matrix& s_w) {
  if (projection.was_already_stable) return 0.0;
  const RateValue rate = rate_function(theta_hat, projection.theta_star, s_w);
  if (rate.infinite) {
    throw StructureViolationError("epsilon_bound: projection is not stable");
  }
  const double kappa = condition_number(s_w, /*symmetric_pd=*/true);
  return std::sqrt(2.0 * kappa * rate.value);
}

Matrix clip_eigenvalues(const Matrix& theta_prime, double radius_cap) {
  if (!theta_prime.square()) {
    throw DimensionError("clip_eigenvalues: matrix must be square");
  }
  if (!(radius_cap > 0.0) || !(radius_cap < 1.0)) {
    throw InvalidArgumentError("clip_eigenvalues: radius cap must lie in (0, 1)");
  }
  if (spectral_radius(theta_prime) <= radius_cap) return theta_prime;

  const std::size_t n = theta_prime.rows();
  const EigenBasis basis = eigen_basis(theta_prime);
  std::vector<std::complex<double>> clipped(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> lambda = basis.values[i];
    const double mod = std::abs(lambda);
    clipped[i] = mod > radius_cap ? lambda * (radius_cap / mod) : lambda;
  }

  // Reassemble Re(V diag(clipped) V^-1) by solving V^T X = (V diag)^T.
  std::vector<std::complex<double>> vt(n * n), rhs(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      vt[j * n + i] = basis.vec(i, j);
      rhs[j * n + i] = basis.vec(i, j) * clipped[j];
    }
  // Gaussian elimination with partial pivoting on the n x (n) complex system
  // with n right-hand sides.
  std::vector<std::complex<double>> x(n * n);
  {
    std::vector<std::complex<double>> m = vt, r = rhs;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(m[k * n + k]);
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(m[i * n + k]) > best) {
          best = std::abs(m[i * n + k]);
          piv = i;
        }
      }
      if (best == 0.0) {
        throw DefectiveMatrixError("clip_eigenvalues: eigenvector basis singular");
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) {
          std::swap(m[k * n + j], m[piv * n + j]);
          std::swap(r[k * n + j], r[piv * n + j]);
        }
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const std::complex<double> f = m[i * n + k] / m[k * n + k];
        if (f == std::complex<double>(0.0, 0.0)) continue;
        for (std::size_t j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
        for (std::size_t j = 0; j < n; ++j) r[i * n + j] -= f * r[k * n + j];
      }
    }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> acc = r[ii * n + j];
        for (std::size_t k = ii + 1; k < n; ++k) acc -= m[ii * n + k] * x[k * n + j];
        x[ii * n + j] = acc / m[ii * n + ii];
      }
    }
  }
  // X solves V^T X = (V diag)^T, so the clipped matrix is X^T.
  std::vector<double> result(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) result[i * n + j] = x[j * n + i].real();
  return Matrix(n, n, std::move(result));
}

StructureReport check_structure(const Matrix& theta_prime,
                                const ProjectionResult& projection) {
  if (!theta_prime.square()) {
    throw DimensionError("check_structure: matrix must be square");
  }
  const std::size_t n = theta_prime.rows();
  StructureReport report;
  report.already_stable = projection.was_already_stable;

  report.lambda = Matrix::identity(n) +
                  (2.0 * projection.delta) * (projection.S_w * projection.P_delta);
  report.det_lambda = determinant(report.lambda);
  if (!(std::fabs(report.det_lambda) > 1e-6)) {
    throw StructureViolationError("check_structure: Lambda is numerically singular "
                                  "(det " + std::to_string(report.det_lambda) + ")");
  }

  const double theta_scale = std::max(frobenius_norm(theta_prime), 1e-300);
  report.reconstruction_rel_error =
      frobenius_norm(report.lambda * projection.theta_star - theta_prime) /
      theta_scale;
  if (report.reconstruction_rel_error > 1e-8) {
    throw StructureViolationError(
        "check_structure: Lambda * theta_star deviates from theta_prime by " +
        std::to_string(report.reconstruction_rel_error) + " relative");
  }

  // Numerical kernel of theta_prime: candidate directions come from the
  // eigendecomposition of theta_prime^T theta_prime, whose small
  // eigenvalues are only resolved to eps * sigma_max^2, so membership is
  // confirmed directly on ||theta_prime v|| at the 1e-10 tolerance.
  const SymmetricEigen gram =
      symmetric_eigen(symmetrize(transpose(theta_prime) * theta_prime));
  const double sigma_max = std::sqrt(std::max(gram.values.back(), 0.0));
  const double kernel_tol = 1e-10 * std::max(sigma_max, 1e-300);
  const double candidate_tol = 1e-6 * std::max(sigma_max, 1e-300);
  auto norm2 = [](const std::vector<double>& x) {
    double acc = 0.0;
    for (double c : x) acc += c * c;
    return std::sqrt(acc);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const double sigma = std::sqrt(std::max(gram.values[k], 0.0));
    if (sigma > candidate_tol) continue;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = gram.vectors(i, k);
    if (norm2(theta_prime * v) > kernel_tol) continue;
    ++report.kernel_dim;
    report.max_kernel_image =
        std::max(report.max_kernel_image, norm2(projection.theta_star * v));
  }
  if (report.max_kernel_image > 1e-8) {
    throw StructureViolationError(
        "check_structure: kernel vector mapped to norm " +
        std::to_string(report.max_kernel_image) + " by theta_star");
  }
  return report;
}

}  // namespace stableid
