#include "stableid/sysid.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>
#include <utility>

#include "stableid/errors.hpp"
#include "stableid/lyapunov.hpp"
#include "stableid/rng.hpp"
#include "stableid/spectrum.hpp"

namespace stableid {

namespace {

std::uint64_t fnv1a_bytes(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t fnv1a_doubles(std::uint64_t h, const std::vector<double>& v) {
  return fnv1a_bytes(h, v.data(), v.size() * sizeof(double));
}

}  // namespace

LinearSystem::LinearSystem(Matrix theta_in, Matrix s_w_in, InitMode init_in,
                           std::vector<double> x0_in)
    : theta(std::move(theta_in)),
      S_w(std::move(s_w_in)),
      init(init_in),
      x0(std::move(x0_in)) {
  if (!theta.square()) {
    throw DimensionError("LinearSystem: theta must be square");
  }
  if (S_w.rows() != theta.rows() || S_w.cols() != theta.cols()) {
    throw DimensionError("LinearSystem: S_w shape must match theta");
  }
  if (!is_spd(S_w)) {
    throw NonSpdError("LinearSystem: S_w must be symmetric positive definite");
  }
  if (init == InitMode::given && x0.size() != theta.rows()) {
    throw DimensionError("LinearSystem: x0 length must match the state dimension");
  }
  if (init == InitMode::stationary && !is_stable(theta)) {
    throw UnstableInputError(
        "LinearSystem: stationary initialization requires a strictly stable theta");
  }
}

std::uint64_t LinearSystem::digest() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  const std::uint64_t n = theta.rows();
  h = fnv1a_bytes(h, &n, sizeof(n));
  h = fnv1a_doubles(h, theta.entries());
  h = fnv1a_doubles(h, S_w.entries());
  const int mode = static_cast<int>(init);
  h = fnv1a_bytes(h, &mode, sizeof(mode));
  if (init == InitMode::given) h = fnv1a_doubles(h, x0);
  return h;
}

Trajectory simulate(const LinearSystem& system, long T, std::uint64_t seed) {
  if (T < 1) throw InvalidArgumentError("simulate: T must be at least 1");
  const std::size_t n = system.dim();

  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](const Matrix& root) {
    std::vector<double> z(n);
    for (auto& v : z) v = gauss(rng);
    return root * z;
  };

  const Matrix noise_root = sqrt_spd(system.S_w);

  Trajectory traj;
  traj.seed = seed;
  traj.system_digest = system.digest();
  traj.states.reserve(static_cast<std::size_t>(T) + 1);

  switch (system.init) {
    case InitMode::stationary: {
      const Matrix s_theta = solve_dlyap(system.theta, system.S_w).S;
      traj.states.push_back(draw(sqrt_spd(s_theta)));
      break;
    }
    case InitMode::zero:
      traj.states.emplace_back(n, 0.0);
      break;
    case InitMode::given:
      traj.states.push_back(system.x0);
      break;
  }

  for (long t = 0; t < T; ++t) {
    std::vector<double> next = system.theta * traj.states.back();
    const std::vector<double> w = draw(noise_root);
    for (std::size_t i = 0; i < n; ++i) next[i] += w[i];
    traj.states.push_back(std::move(next));
  }
  for (const auto& x : traj.states) {
    for (double v : x) {
      if (!std::isfinite(v)) {
        throw Error("simulate: trajectory diverged to non-finite values");
      }
    }
  }
  return traj;
}

namespace {

LeastSquaresEstimate least_squares_pairs(const std::vector<const Trajectory*>& trajs) {
  const std::size_t n = trajs.front()->dim();
  long total_pairs = 0;
  Matrix gram(n, n);
  Matrix cross(n, n);
  for (const Trajectory* traj : trajs) {
    if (traj->dim() != n) {
      throw DimensionError("least_squares: trajectories have mixed dimensions");
    }
    const auto& x = traj->states;
    if (x.size() < 2) {
      throw InvalidArgumentError("least_squares: trajectory has no transitions");
    }
    total_pairs += static_cast<long>(x.size()) - 1;
    for (std::size_t t = 1; t < x.size(); ++t) {
      const auto& prev = x[t - 1];
      const auto& curr = x[t];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          gram(i, j) += prev[i] * prev[j];
          cross(i, j) += curr[i] * prev[j];
        }
    }
  }
  if (total_pairs < static_cast<long>(n)) {
    throw InvalidArgumentError("least_squares: need at least n regression pairs");
  }

  const SymmetricEigen eig = symmetric_eigen(symmetrize(gram));
  const double min_eig = eig.values.front();
  const double threshold = 1e-12 * trace(gram) / static_cast<double>(n);
  if (!(min_eig > threshold)) {
    throw SingularGramError("least_squares: Gram matrix is numerically singular "
                            "(min eigenvalue " + std::to_string(min_eig) + ")",
                            min_eig);
  }

  LeastSquaresEstimate est;
  est.theta_hat = transpose(solve_linear(gram, transpose(cross)));
  est.gram = gram;
  est.T = total_pairs;
  est.gram_min_eig = min_eig;
  return est;
}

}  // namespace

LeastSquaresEstimate least_squares(const Trajectory& trajectory) {
  return least_squares_pairs({&trajectory});
}

LeastSquaresEstimate least_squares(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) {
    throw InvalidArgumentError("least_squares: no trajectories given");
  }
  std::vector<const Trajectory*> ptrs;
  ptrs.reserve(trajectories.size());
  for (const auto& t : trajectories) ptrs.push_back(&t);
  return least_squares_pairs(ptrs);
}

Matrix transformed_estimate(const Matrix& theta_hat, const Matrix& theta_true,
                            long T, double a_T) {
  if (theta_hat.rows() != theta_true.rows() ||
      theta_hat.cols() != theta_true.cols()) {
    throw DimensionError("transformed_estimate: shape mismatch");
  }
  if (!(a_T > 0.0)) {
    throw InvalidArgumentError("transformed_estimate: a_T must be positive");
  }
  const double factor = std::sqrt(static_cast<double>(T) / a_T);
  return factor * (theta_hat - theta_true) + theta_true;
}

}  // namespace stableid
