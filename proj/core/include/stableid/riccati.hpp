#pragma once

#include "stableid/matrix.hpp"

namespace stableid {

enum class DareMethod { doubling, fixed_point };

// Stabilizing solution of the discrete algebraic Riccati equation
//   P = Q + A^T P A - A^T P B (R + B^T P B)^-1 B^T P A
// together with the feedback gain K = -(R + B^T P B)^-1 B^T P A, so the
// closed loop is A + B K.
struct DareSolution {
  Matrix P;
  Matrix K;
  double residual = 0.0;  // relative residual of the defining equation
  int iterations = 0;
  double closed_loop_radius = 0.0;  // rho(A + B K), strictly below one
};

// Solves the DARE for SPD Q and R. The default backend is the
// structure-preserving doubling algorithm (quadratically convergent); the
// fixed-point backend iterates P <- Q + A^T P (I + B R^-1 B^T P)^-1 A from
// P = Q and exists as a slow independent reference.
DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, DareMethod method = DareMethod::doubling);

// Same equation with B = I and the input weight given through its inverse
// G = R^-1. Intended for weights of the form R = (2 delta S_w)^-1 with
// tiny delta, where forming R itself would lose precision: every internal
// step uses G only, and the gain satisfies A + K = (I + G P)^-1 A.
DareSolution solve_dare_inverse_weight(const Matrix& a, const Matrix& r_inverse,
                                       const Matrix& q,
                                       DareMethod method = DareMethod::doubling);

// LQR gain only; closed loop is A + B * dlqr(A, B, Q, R).
Matrix dlqr(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r);

// Relative residual of the inverse-form Riccati identity
//   P = Q + A^T P (I + 2 delta S_w P)^-1 A,
// used to cross-check solutions of the standard form with B = I and
// R = (2 delta S_w)^-1 against the equivalent resolvent form.
double riccati_inverse_form_residual(const Matrix& a, const Matrix& p,
                                     const Matrix& q, double delta,
                                     const Matrix& s_w);

}  // namespace stableid
