#pragma once

#include "stableid/matrix.hpp"

namespace stableid {

enum class DlyapMethod { automatic, kron, doubling };

// Stationary state covariance S solving S = theta S theta^T + S_w.
struct StationaryCovariance {
  Matrix S;
  double residual = 0.0;  // ||S - theta S theta^T - S_w||_F / ||S||_F
  DlyapMethod method = DlyapMethod::automatic;
};

// Solves the discrete Lyapunov equation S = theta S theta^T + S_w for a
// strictly stable theta and SPD S_w.
//
// Two backends: Kronecker vectorization, which solves
// (I - theta (x) theta) vec(S) = vec(S_w) exactly and is used for n <= 40,
// and the squaring iteration S <- S + A S A^T, A <- A^2 for larger n,
// which converges quadratically when rho(theta) < 1. The result is
// symmetrized before returning and satisfies the residual bound
// residual <= 1e-9 relative.
//
// Throws UnstableInputError when rho(theta) >= 1 - kStabilityBand,
// NonSpdError for an invalid S_w, and ConvergenceError when the doubling
// iteration fails to settle within 200 steps.
StationaryCovariance solve_dlyap(const Matrix& theta, const Matrix& S_w,
                                 DlyapMethod method = DlyapMethod::automatic);

}  // namespace stableid
