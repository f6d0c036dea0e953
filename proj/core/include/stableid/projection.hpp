#pragma once

#include <vector>

#include "stableid/matrix.hpp"

namespace stableid {

inline constexpr double kDefaultDelta = 1e-9;
inline constexpr double kDefaultRadiusCap = 0.99;

// Discrepancy between an arbitrary matrix A' and a stable matrix A:
//   1/2 tr(S_w^-1 (A' - A) S (A' - A)^T),
// where S is the stationary covariance solving S = A S A^T + S_w. The
// value is zero iff A' == A and diverges as A approaches the stability
// boundary; `infinite` is set (value = +inf) when A is not strictly
// stable, since no stationary covariance exists there.
struct RateValue {
  double value = 0.0;
  bool infinite = false;
  Matrix theta_prime;
  Matrix theta;
};

RateValue rate_function(const Matrix& theta_prime, const Matrix& theta,
                        const Matrix& s_w);

// Result of projecting theta_prime onto the set of strictly stable
// matrices. Stable inputs pass through unchanged (was_already_stable set,
// P_delta and gain zero). Unstable inputs are shifted by the LQR gain
// K = dlqr(theta_prime, I, Q, (2 delta S_w)^-1), which solves the
// rate-function projection to within O(delta^p); equivalently
// theta_star = (I + 2 delta S_w P_delta)^-1 theta_prime.
struct ProjectionResult {
  Matrix theta_star;
  double delta = 0.0;
  Matrix P_delta;  // Riccati fixed point; zero matrix on the stable branch
  Matrix gain;     // theta_star - theta_prime
  double rate_at_star = 0.0;          // rate_function(theta_prime, theta_star)
  double spectral_radius_star = 0.0;  // < 1 always
  double epsilon = 0.0;               // sqrt(2 kappa(S_w) * rate_at_star)
  double epsilon_single_kappa = 0.0;  // sqrt(kappa(S_w) * rate_at_star)
  bool was_already_stable = false;
  Matrix S_w;  // noise covariance the projection was computed with
  double dare_residual = 0.0;
  int dare_iterations = 0;
};

ProjectionResult project_to_stable(const Matrix& theta_prime, const Matrix& s_w,
                                   const Matrix& q, double delta = kDefaultDelta);

// One point of a delta sweep: the penalty parameter and the rate value of
// the corresponding projection.
struct DeltaRatePoint {
  double delta = 0.0;
  double rate = 0.0;
};

// Feasible-radius bracket accumulated over a delta sweep. r_upper is the
// rate to the zero matrix (always feasible); r_lower is the smallest rate
// observed along the sweep. Grid points are stored by ascending delta, so
// rates are nondecreasing along the grid.
struct RadiusBracket {
  double r_lower = 0.0;
  double r_upper = 0.0;
  std::vector<DeltaRatePoint> delta_grid;
};

struct DeltaSweepResult {
  RadiusBracket bracket;
  std::vector<ProjectionResult> projections;  // in input (descending) order
  std::vector<double> trace_objectives;       // tr(Q S_theta*) per projection
};

// Projects theta_prime for every delta in `deltas` (which must be strictly
// decreasing and positive) and validates the solver-quality monotonicity:
// rates nondecreasing and trace objectives nonincreasing in delta, both
// with 1e-7 relative slack. Violations raise MonotonicityViolationError.
DeltaSweepResult delta_sweep(const Matrix& theta_prime, const Matrix& s_w,
                             const Matrix& q, const std::vector<double>& deltas);

// A-posteriori error radius sqrt(2 kappa(S_w) * rate(theta_hat, theta_star)).
// The operator-norm distance between theta_hat and its projection never
// exceeds this value.
double epsilon_bound(const Matrix& theta_hat, const ProjectionResult& projection,
                     const Matrix& s_w);

// Baseline stabilization: rescales every eigenvalue with modulus above
// radius_cap onto the cap (preserving its argument) in the eigenbasis of
// theta_prime, then reassembles the real matrix. Requires theta_prime to
// be numerically diagonalizable; throws DefectiveMatrixError otherwise.
Matrix clip_eigenvalues(const Matrix& theta_prime,
                        double radius_cap = kDefaultRadiusCap);

// Structural identities of a projection: Lambda = I + 2 delta S_w P_delta
// is invertible, Lambda theta_star reproduces theta_prime, and every
// numerical kernel vector of theta_prime is annihilated by theta_star.
struct StructureReport {
  Matrix lambda;
  double det_lambda = 0.0;
  double reconstruction_rel_error = 0.0;
  int kernel_dim = 0;
  double max_kernel_image = 0.0;  // max ||theta_star v|| over unit kernel v
  bool already_stable = false;
};

// Verifies the identities above and throws StructureViolationError when
// any of them fails (which signals a solver bug, not bad input).
StructureReport check_structure(const Matrix& theta_prime,
                                const ProjectionResult& projection);

}  // namespace stableid
