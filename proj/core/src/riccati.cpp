#include "stableid/riccati.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "stableid/errors.hpp"
#include "stableid/lyapunov.hpp"
#include "stableid/spectrum.hpp"

namespace stableid {

namespace {

constexpr double kStepTol = 1e-12;       // relative ||P_{k+1} - P_k||_F stop
constexpr double kResidualBound = 1e-9;  // contract on the returned solution
constexpr int kDoublingCap = 200;
constexpr int kFixedPointCap = 10000;

struct CoreResult {
  Matrix p;
  int iterations = 0;
};

// Structure-preserving doubling for the DARE in the (A, G, Q) form with
// G = B R^-1 B^T. See E. K.-W. Chu, H.-Y. Fan, W.-W. Lin and C.-S. Wang,
// "Structure-Preserving Algorithms for Periodic Discrete-Time Algebraic
// Riccati Equations", Int. J. Control 77(8), 2004.
CoreResult dare_doubling(const Matrix& a, const Matrix& g0, const Matrix& q) {
  const std::size_t n = a.rows();
  Matrix a_k = a;
  Matrix g_k = g0;
  Matrix h = q;
  for (int it = 1; it <= kDoublingCap; ++it) {
    const Matrix w = Matrix::identity(n) + g_k * h;
    const LuDecomposition w_lu = lu_decompose(w);
    if (w_lu.singular) {
      throw ConvergenceError("DARE doubling: I + G H became singular");
    }
    const Matrix v1 = w_lu.solve(a_k);                      // W V1 = A_k
    const Matrix v2 = transpose(w_lu.solve(transpose(g_k)));  // V2 W^T = G_k
    g_k = symmetrize(g_k + a_k * v2 * transpose(a_k));
    const Matrix h_next = symmetrize(h + transpose(v1) * (h * a_k));
    a_k = a_k * v1;
    const double step = frobenius_norm(h_next - h);
    h = h_next;
    if (step <= kStepTol * std::max(frobenius_norm(h), 1e-300)) {
      return {std::move(h), it};
    }
  }
  throw ConvergenceError("DARE doubling did not converge in " +
                         std::to_string(kDoublingCap) + " iterations");
}

// Plain fixed-point (value) iteration P <- Q + A^T P (I + G P)^-1 A from
// P = Q. Linear convergence; kept as an independent reference backend.
CoreResult dare_fixed_point(const Matrix& a, const Matrix& g, const Matrix& q) {
  const std::size_t n = a.rows();
  Matrix p = q;
  for (int it = 1; it <= kFixedPointCap; ++it) {
    const Matrix w = Matrix::identity(n) + g * p;
    const Matrix x = solve_linear(w, a);  // (I + G P)^-1 A
    const Matrix p_next = symmetrize(q + transpose(a) * (p * x));
    const double step = frobenius_norm(p_next - p);
    p = p_next;
    if (step <= kStepTol * std::max(frobenius_norm(p), 1e-300)) {
      return {std::move(p), it};
    }
  }
  throw ConvergenceError("DARE fixed-point iteration did not converge in " +
                         std::to_string(kFixedPointCap) + " iterations");
}

double residual_g_form(const Matrix& a, const Matrix& g, const Matrix& q,
                       const Matrix& p) {
  const Matrix w = Matrix::identity(a.rows()) + g * p;
  const Matrix x = solve_linear(w, a);  // (I + G P)^-1 A
  return frobenius_norm(p - q - transpose(a) * (p * x)) /
         std::max(frobenius_norm(p), 1e-300);
}

// Newton refinement (Hewer's iteration) in the G form with B = I. Doubling
// can bake transient rounding noise of order eps * max_k ||A_k||^2 into H
// when the plant is strongly unstable; each Newton step solves the Stein
// equation P = Ac^T P Ac + Q + K^T G^-1 K for the current closed loop Ac
// and converges quadratically from any stabilizing iterate.
void newton_refine(const Matrix& a, const Matrix& g, const Matrix& q,
                   CoreResult& core) {
  constexpr double target = 1e-10;
  const std::size_t n = a.rows();
  double resid = residual_g_form(a, g, q, core.p);
  for (int step = 0; step < 5 && resid > target; ++step) {
    const Matrix w = Matrix::identity(n) + g * core.p;
    const Matrix closed = solve_linear(w, a);
    if (!(spectral_radius(closed) < 1.0 - 1e-9)) return;
    const Matrix gain = closed - a;
    Matrix p_next;
    try {
      // K^T G^-1 K needs an invertible G; skip the refinement otherwise
      // (rank-deficient B R^-1 B^T).
      const Matrix cost = symmetrize(q + transpose(gain) * solve_linear(g, gain));
      p_next = solve_dlyap(transpose(closed), cost).S;
    } catch (const Error&) {
      return;  // keep the current iterate; the residual contract decides
    }
    const double resid_next = residual_g_form(a, g, q, p_next);
    if (!(resid_next < resid)) return;
    core.p = std::move(p_next);
    resid = resid_next;
    ++core.iterations;
  }
}

CoreResult run_core(const Matrix& a, const Matrix& g, const Matrix& q,
                    DareMethod method) {
  CoreResult core = method == DareMethod::doubling ? dare_doubling(a, g, q)
                                                   : dare_fixed_point(a, g, q);
  newton_refine(a, g, q, core);
  return core;
}

void check_residual(double residual) {
  if (!(residual <= kResidualBound)) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "DARE residual %.3e exceeds bound %.0e",
                  residual, kResidualBound);
    throw ConvergenceError(buf);
  }
}

void check_closed_loop(double rho) {
  if (!(rho < 1.0)) {
    throw ConvergenceError("DARE closed loop has spectral radius " +
                           std::to_string(rho) + " >= 1");
  }
}

}  // namespace

DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q,
                        const Matrix& r, DareMethod method) {
  if (!a.square()) throw DimensionError("solve_dare: A must be square");
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  if (b.rows() != n) throw DimensionError("solve_dare: B rows must match A");
  if (q.rows() != n || q.cols() != n) {
    throw DimensionError("solve_dare: Q shape must match A");
  }
  if (r.rows() != m || r.cols() != m) {
    throw DimensionError("solve_dare: R must be m x m for B with m columns");
  }
  if (!is_spd(q)) throw NonSpdError("solve_dare: Q must be SPD");
  if (!is_spd(r)) throw NonSpdError("solve_dare: R must be SPD");

  const Matrix bt = transpose(b);
  const Matrix g = symmetrize(b * solve_linear(r, bt));  // B R^-1 B^T
  CoreResult core = run_core(a, g, q, method);

  const Matrix btpa = bt * (core.p * a);
  const Matrix gain_denominator = symmetrize(r + bt * (core.p * b));
  const Matrix k = -1.0 * solve_linear(gain_denominator, btpa);

  DareSolution out;
  out.P = std::move(core.p);
  out.iterations = core.iterations;
  const Matrix reconstructed =
      q + transpose(a) * (out.P * a) + transpose(btpa) * k;  // K = -(.)^-1 btpa
  out.residual = frobenius_norm(out.P - reconstructed) /
                 std::max(frobenius_norm(out.P), 1e-300);
  check_residual(out.residual);
  out.K = k;
  out.closed_loop_radius = spectral_radius(a + b * out.K);
  check_closed_loop(out.closed_loop_radius);
  return out;
}

DareSolution solve_dare_inverse_weight(const Matrix& a, const Matrix& r_inverse,
                                       const Matrix& q, DareMethod method) {
  if (!a.square()) throw DimensionError("solve_dare_inverse_weight: A must be square");
  const std::size_t n = a.rows();
  if (r_inverse.rows() != n || r_inverse.cols() != n || q.rows() != n ||
      q.cols() != n) {
    throw DimensionError("solve_dare_inverse_weight: shapes must match A");
  }
  if (!is_spd(r_inverse)) {
    throw NonSpdError("solve_dare_inverse_weight: R^-1 must be SPD");
  }
  if (!is_spd(q)) throw NonSpdError("solve_dare_inverse_weight: Q must be SPD");

  const Matrix g = symmetrize(r_inverse);
  CoreResult core = run_core(a, g, q, method);

  DareSolution out;
  out.P = std::move(core.p);
  out.iterations = core.iterations;
  const Matrix w = Matrix::identity(n) + g * out.P;
  const Matrix closed = solve_linear(w, a);  // (I + G P)^-1 A = A + K
  out.K = closed - a;
  out.residual = frobenius_norm(out.P - q - transpose(a) * (out.P * closed)) /
                 std::max(frobenius_norm(out.P), 1e-300);
  check_residual(out.residual);
  out.closed_loop_radius = spectral_radius(closed);
  check_closed_loop(out.closed_loop_radius);
  return out;
}

Matrix dlqr(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  return solve_dare(a, b, q, r).K;
}

double riccati_inverse_form_residual(const Matrix& a, const Matrix& p,
                                     const Matrix& q, double delta,
                                     const Matrix& s_w) {
  if (!a.square() || p.rows() != a.rows() || p.cols() != a.cols() ||
      q.rows() != a.rows() || q.cols() != a.cols() ||
      s_w.rows() != a.rows() || s_w.cols() != a.cols()) {
    throw DimensionError("riccati_inverse_form_residual: shape mismatch");
  }
  if (!(delta > 0.0)) {
    throw InvalidArgumentError("riccati_inverse_form_residual: delta must be positive");
  }
  const std::size_t n = a.rows();
  const Matrix w = Matrix::identity(n) + (2.0 * delta) * (s_w * p);
  const LuDecomposition w_lu = lu_decompose(w);
  if (w_lu.singular) {
    throw SingularMatrixError(
        "riccati_inverse_form_residual: I + 2 delta S_w P is singular");
  }
  const Matrix x = w_lu.solve(a);
  return frobenius_norm(p - q - transpose(a) * (p * x)) /
         std::max(frobenius_norm(p), 1e-300);
}

}  // namespace stableid
