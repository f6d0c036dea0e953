#pragma once

#include <cstdint>
#include <vector>

#include "stableid/matrix.hpp"

namespace stableid {

enum class InitMode { stationary, zero, given };

// Autonomous linear system x_{t+1} = theta x_t + w_t with Gaussian noise
// w_t ~ N(0, S_w). The initial state is drawn from the stationary
// distribution N(0, S_theta) by default, which requires theta to be
// strictly stable; `zero` and `given` initializations work for any theta.
struct LinearSystem {
  LinearSystem(Matrix theta, Matrix s_w, InitMode init = InitMode::stationary,
               std::vector<double> x0 = {});

  std::size_t dim() const { return theta.rows(); }
  std::uint64_t digest() const;

  Matrix theta;
  Matrix S_w;
  InitMode init;
  std::vector<double> x0;  // used when init == given
};

// State sequence x_0..x_T plus the seed and a digest of the generating
// system, so records can be traced back to their source.
struct Trajectory {
  std::vector<std::vector<double>> states;
  std::uint64_t seed = 0;
  std::uint64_t system_digest = 0;

  std::size_t dim() const { return states.empty() ? 0 : states.front().size(); }
  long horizon() const { return static_cast<long>(states.size()) - 1; }
};

// Simulates T steps. A pure function of (system, T, seed): identical
// arguments reproduce the trajectory bit for bit on one platform.
Trajectory simulate(const LinearSystem& system, long T, std::uint64_t seed);

struct LeastSquaresEstimate {
  Matrix theta_hat;
  Matrix gram;  // sum of x_{t-1} x_{t-1}^T over the regression pairs
  long T = 0;
  double gram_min_eig = 0.0;
};

// Least squares estimator
//   theta_hat = (sum x_t x_{t-1}^T)(sum x_{t-1} x_{t-1}^T)^-1
// over a single trajectory. Requires T >= n and an invertible Gram
// matrix (min eigenvalue above 1e-12 * trace/n); throws SingularGramError
// carrying the offending eigenvalue otherwise.
LeastSquaresEstimate least_squares(const Trajectory& trajectory);

// Pooled variant concatenating the (x_{t-1}, x_t) regression pairs of
// several trajectories of the same dimension.
LeastSquaresEstimate least_squares(const std::vector<Trajectory>& trajectories);

// sqrt(T / a_T) (theta_hat - theta) + theta.
Matrix transformed_estimate(const Matrix& theta_hat, const Matrix& theta_true,
                            long T, double a_T);

}  // namespace stableid
