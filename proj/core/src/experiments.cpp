#include "stableid/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include <json.hpp>

#include "stableid/errors.hpp"
#include "stableid/io.hpp"
#include "stableid/projection.hpp"
#include "stableid/rng.hpp"
#include "stableid/spectrum.hpp"
#include "stableid/sysid.hpp"

namespace stableid {

namespace {

// Seed-stream tags keeping the experiments' random streams disjoint.
constexpr std::uint64_t kStreamSpectral = 0x73706563ull;
constexpr std::uint64_t kStreamRatesSystem = 0x72737973ull;
constexpr std::uint64_t kStreamRatesTrajectory = 0x7274726Aull;
constexpr std::uint64_t kStreamCoverage = 0x636F7672ull;

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 16u));
}

// Runs fn(i) for i in [0, count). Work items must be independent; the
// first exception (if any) is rethrown on the calling thread.
void parallel_for(long count, int workers, const std::function<void(long)>& fn) {
  workers = std::min<long>(resolve_workers(workers), count);
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (long i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Rejection filter: anything not strictly inside the stable set counts as
// unstable, including radii inside the boundary band.
bool estimate_is_unstable(double rho) {
  return classify_stability(rho) != StabilityClass::stable;
}

struct StageTimer {
  double start = now_ms();
  double stop() const { return now_ms() - start; }
};

// Shared per-trial pipeline: least squares on the trajectory, projection,
// clipping baseline, error norms against the true matrix.
ExperimentRecord evaluate_trial(const Matrix& theta_true, const Matrix& s_w,
                                const Matrix& q, const Trajectory& traj,
                                double delta, double radius_cap) {
  ExperimentRecord rec;
  rec.seed = traj.seed;
  rec.T = traj.horizon();
  rec.rho_true = spectral_radius(theta_true);

  StageTimer ls_timer;
  const LeastSquaresEstimate est = least_squares(traj);
  rec.runtime_ms_ls = ls_timer.stop();
  rec.rho_ls = spectral_radius(est.theta_hat);
  rec.ls_was_stable = classify_stability(rec.rho_ls) == StabilityClass::stable;
  rec.err_ls = operator_norm(est.theta_hat - theta_true);

  StageTimer proj_timer;
  const ProjectionResult proj = project_to_stable(est.theta_hat, s_w, q, delta);
  rec.runtime_ms_proj = proj_timer.stop();
  rec.rho_proj = proj.spectral_radius_star;
  rec.err_proj = operator_norm(proj.theta_star - theta_true);
  rec.rate_at_proj = proj.rate_at_star;
  rec.epsilon = proj.epsilon;

  // The estimate never sits further from its projection than epsilon; a
  // violation here is a solver bug, not statistical noise.
  const double proj_dist = operator_norm(est.theta_hat - proj.theta_star);
  if (proj_dist > rec.epsilon * (1.0 + 1e-9) + 1e-9) {
    throw StructureViolationError(
        "trial violates the distance bound: ||theta_hat - theta_star|| = " +
        std::to_string(proj_dist) + " > epsilon = " + std::to_string(rec.epsilon));
  }

  StageTimer clip_timer;
  try {
    const Matrix clipped = clip_eigenvalues(est.theta_hat, radius_cap);
    rec.rho_clip = spectral_radius(clipped);
    rec.err_clip = operator_norm(clipped - theta_true);
  } catch (const DefectiveMatrixError&) {
    rec.rho_clip = std::numeric_limits<double>::quiet_NaN();
    rec.err_clip = std::numeric_limits<double>::quiet_NaN();
  }
  rec.runtime_ms_clip = clip_timer.stop();
  return rec;
}

std::vector<long> log_grid(long t_min, long t_max, int points) {
  if (t_min >= t_max) return {t_max};
  std::vector<long> grid;
  const double lo = std::log(static_cast<double>(t_min));
  const double hi = std::log(static_cast<double>(t_max));
  for (int k = 0; k < points; ++k) {
    const double f = points == 1 ? 1.0 : static_cast<double>(k) / (points - 1);
    const long t = std::lround(std::exp(lo + f * (hi - lo)));
    if (grid.empty() || t > grid.back()) grid.push_back(t);
  }
  if (grid.back() != t_max) grid.push_back(t_max);
  return grid;
}

double fit_loglog_slope(const std::vector<long>& ts, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ys[i] > 0.0)) continue;
    const double x = std::log(static_cast<double>(ts[i]));
    const double y = std::log(ys[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = count * sxx - sx * sx;
  return denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::spectral: return "spectral";
    case ExperimentKind::rates: return "rates";
    case ExperimentKind::coverage: return "coverage";
    case ExperimentKind::project_one: return "project-one";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "spectral") return ExperimentKind::spectral;
  if (name == "rates") return ExperimentKind::rates;
  if (name == "coverage") return ExperimentKind::coverage;
  if (name == "project-one") return ExperimentKind::project_one;
  throw ConfigError("unknown experiment: " + name);
}

std::string to_string(ATRule rule) {
  return rule == ATRule::sqrt_t ? "sqrtT" : "T0.75";
}

ATRule a_t_rule_from_string(const std::string& name) {
  if (name == "sqrtT") return ATRule::sqrt_t;
  if (name == "T0.75") return ATRule::t_pow_075;
  throw ConfigError("unknown a_T rule: " + name + " (expected sqrtT or T0.75)");
}

double a_t_value(ATRule rule, long T) {
  const double t = static_cast<double>(T);
  return rule == ATRule::sqrt_t ? std::sqrt(t) : std::pow(t, 0.75);
}

long ExperimentConfig::effective_T() const {
  switch (experiment) {
    case ExperimentKind::rates:
      return T_max;
    case ExperimentKind::coverage:
      return T > 0 ? T : 500;
    case ExperimentKind::spectral:
    default:
      return T > 0 ? T : std::lround(25.0 * std::sqrt(static_cast<double>(m)));
  }
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("config: n must be >= 1");
  if (m < 1) throw ConfigError("config: m must be >= 1");
  if (trials < 0) throw ConfigError("config: trials must be >= 0");
  if (systems < 1) throw ConfigError("config: systems must be >= 1");
  if (grid_points < 2) throw ConfigError("config: grid_points must be >= 2");
  if (!(delta > 0.0)) throw ConfigError("config: delta must be positive");
  if (!(q_scale > 0.0)) throw ConfigError("config: q_scale must be positive");
  if (!(radius_cap > 0.0 && radius_cap < 1.0)) {
    throw ConfigError("config: radius_cap must lie in (0, 1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ConfigError("config: beta must lie in (0, 1)");
  }
  if (!(oversample_factor >= 1.0)) {
    throw ConfigError("config: oversample_factor must be >= 1");
  }
  if (workers < 0) throw ConfigError("config: workers must be >= 0");
  if (experiment == ExperimentKind::coverage && !(std::fabs(theta0) < 1.0)) {
    throw ConfigError("config: coverage needs |theta0| < 1");
  }
  if (experiment == ExperimentKind::rates &&
      T_max < std::max<long>(16, 4 * n)) {
    throw ConfigError("config: rates needs T_max >= max(16, 4n), got " +
                      std::to_string(T_max));
  }
  const long t_ref = effective_T();
  if (t_ref < 1) throw ConfigError("config: invalid horizon");
  const double ratio = a_t_value(a_t_rule, t_ref) / static_cast<double>(t_ref);
  if (!(ratio <= 0.5)) {
    throw ConfigError("config: a_T rule " + to_string(a_t_rule) + " gives a_T/T = " +
                      std::to_string(ratio) + " > 0.5 at T = " +
                      std::to_string(t_ref) + "; increase the horizon");
  }
}

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << kRecordCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.trial_id << "," << r.seed << "," << r.T << ","
        << format_double(r.rho_true) << "," << format_double(r.rho_ls) << ","
        << format_double(r.rho_proj) << "," << format_double(r.rho_clip) << ","
        << format_double(r.err_ls) << "," << format_double(r.err_proj) << ","
        << format_double(r.err_clip) << "," << format_double(r.rate_at_proj) << ","
        << format_double(r.epsilon) << "," << (r.ls_was_stable ? 1 : 0) << "\n";
  }
}

void write_records_json(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["trial_id"] = r.trial_id;
    j["seed"] = r.seed;
    j["T"] = r.T;
    j["rho_true"] = r.rho_true;
    j["rho_ls"] = r.rho_ls;
    j["rho_proj"] = r.rho_proj;
    j["rho_clip"] = std::isnan(r.rho_clip) ? nlohmann::json() : nlohmann::json(r.rho_clip);
    j["err_ls"] = r.err_ls;
    j["err_proj"] = r.err_proj;
    j["err_clip"] = std::isnan(r.err_clip) ? nlohmann::json() : nlohmann::json(r.err_clip);
    j["rate_at_proj"] = r.rate_at_proj;
    j["epsilon"] = r.epsilon;
    j["ls_was_stable"] = r.ls_was_stable;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << "\n";
}

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_records_csv(out, records);
  } else {
    write_records_json(out, records);
  }
}

Matrix spectral_target(int m) {
  if (m < 1) throw InvalidArgumentError("spectral_target: m must be >= 1");
  const Matrix y{{0.95, 0.1, 1.0}, {-0.1, 0.95, 0.0}, {0.0, 0.0, 0.9}};
  return kron(y, Matrix::identity(static_cast<std::size_t>(m)));
}

Matrix sample_stable_system(int n, std::uint64_t seed, bool scale_down,
                            int max_attempts) {
  if (n < 1) throw InvalidArgumentError("sample_stable_system: n must be >= 1");
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&]() {
    Matrix g(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) = gauss(rng);
    return g;
  };
  if (scale_down) {
    const Matrix g = draw();
    const double rho = spectral_radius(g);
    if (rho == 0.0) return g;
    return (1.0 / (1.05 * rho)) * g;
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix g = draw();
    if (is_stable(g)) return g;
  }
  throw OversamplingError(
      "sample_stable_system: no stable draw in " + std::to_string(max_attempts) +
      " attempts at n = " + std::to_string(n) +
      "; standard-normal matrices of this size are almost never stable, "
      "enable scale_down to rescale draws by 1.05 * rho instead");
}

std::vector<ExperimentRecord> run_spectral(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentRecord> records;
  if (config.trials == 0) return records;

  const Matrix theta = spectral_target(config.m);
  const std::size_t n = theta.rows();
  const Matrix s_w = Matrix::identity(n);
  const Matrix q = config.q_scale * Matrix::identity(n);
  const long T = config.effective_T();
  const LinearSystem system(theta, s_w, InitMode::stationary);

  const long cap = static_cast<long>(
      std::ceil(config.oversample_factor * static_cast<double>(config.trials)));

  struct Candidate {
    bool accepted = false;
    ExperimentRecord record;
  };

  long candidate = 0;
  long accepted = 0;
  const long batch_size = std::max<long>(resolve_workers(config.workers) * 8, 32);
  while (accepted < config.trials && candidate < cap) {
    const long batch = std::min(batch_size, cap - candidate);
    std::vector<Candidate> outcomes(static_cast<std::size_t>(batch));
    parallel_for(batch, config.workers, [&](long c) {
      const std::uint64_t seed =
          derive_seed(config.master_seed, kStreamSpectral,
                      static_cast<std::uint64_t>(candidate + c));
      const Trajectory traj = simulate(system, T, seed);
      const LeastSquaresEstimate est = least_squares(traj);
      if (!estimate_is_unstable(spectral_radius(est.theta_hat))) return;
      Candidate& out = outcomes[static_cast<std::size_t>(c)];
      out.accepted = true;
      out.record = evaluate_trial(theta, s_w, q, traj, config.delta,
                                  config.radius_cap);
    });
    // Acceptance in candidate order keeps the output independent of the
    // worker count.
    for (const auto& outcome : outcomes) {
      if (!outcome.accepted || accepted >= config.trials) continue;
      ExperimentRecord rec = outcome.record;
      rec.trial_id = accepted++;
      records.push_back(std::move(rec));
    }
    candidate += batch;
  }
  if (accepted < config.trials) {
    throw OversamplingError(
        "run_spectral: only " + std::to_string(accepted) + " of " +
        std::to_string(config.trials) + " unstable estimates found within the " +
        std::to_string(cap) + "-candidate budget (oversample_factor " +
        std::to_string(config.oversample_factor) + ")");
  }
  return records;
}

RatesResult run_rates(const ExperimentConfig& config) {
  config.validate();
  if (config.trials < 1) throw ConfigError("run_rates: trials must be >= 1");

  const std::size_t n = static_cast<std::size_t>(config.n);
  const Matrix s_w = Matrix::identity(n);
  const Matrix q = config.q_scale * Matrix::identity(n);

  std::vector<Matrix> thetas;
  thetas.reserve(static_cast<std::size_t>(config.systems));
  for (int s = 0; s < config.systems; ++s) {
    thetas.push_back(sample_stable_system(
        config.n, derive_seed(config.master_seed, kStreamRatesSystem,
                              static_cast<std::uint64_t>(s)),
        config.scale_down));
  }

  const std::vector<long> grid =
      log_grid(std::max<long>(2 * config.n, 8), config.T_max, config.grid_points);
  const long pairs = static_cast<long>(config.systems) * config.trials;
  const long per_pair = static_cast<long>(grid.size());

  RatesResult out;
  out.records.resize(static_cast<std::size_t>(pairs * per_pair));
  parallel_for(pairs, config.workers, [&](long p) {
    const int s = static_cast<int>(p / config.trials);
    const LinearSystem system(thetas[static_cast<std::size_t>(s)], s_w,
                              InitMode::stationary);
    const std::uint64_t seed = derive_seed(config.master_seed, kStreamRatesTrajectory,
                                           static_cast<std::uint64_t>(p));
    const Trajectory full = simulate(system, config.T_max, seed);
    for (long gi = 0; gi < per_pair; ++gi) {
      const long t = grid[static_cast<std::size_t>(gi)];
      Trajectory prefix;
      prefix.seed = seed;
      prefix.system_digest = full.system_digest;
      prefix.states.assign(full.states.begin(),
                           full.states.begin() + (t + 1));
      ExperimentRecord rec =
          evaluate_trial(thetas[static_cast<std::size_t>(s)], s_w, q, prefix,
                         config.delta, config.radius_cap);
      rec.trial_id = p * per_pair + gi;
      out.records[static_cast<std::size_t>(rec.trial_id)] = std::move(rec);
    }
  });

  out.summary.t_grid = grid;
  out.summary.mean_err_ls.assign(grid.size(), 0.0);
  out.summary.mean_err_proj.assign(grid.size(), 0.0);
  out.summary.min_err_proj.assign(grid.size(),
                                  std::numeric_limits<double>::infinity());
  out.summary.max_err_proj.assign(grid.size(), 0.0);
  for (long p = 0; p < pairs; ++p) {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const auto& rec =
          out.records[static_cast<std::size_t>(p) * grid.size() + gi];
      out.summary.mean_err_ls[gi] += rec.err_ls;
      out.summary.mean_err_proj[gi] += rec.err_proj;
      out.summary.min_err_proj[gi] = std::min(out.summary.min_err_proj[gi], rec.err_proj);
      out.summary.max_err_proj[gi] = std::max(out.summary.max_err_proj[gi], rec.err_proj);
    }
  }
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    out.summary.mean_err_ls[gi] /= static_cast<double>(pairs);
    out.summary.mean_err_proj[gi] /= static_cast<double>(pairs);
  }
  out.summary.slope_err_ls = fit_loglog_slope(grid, out.summary.mean_err_ls);
  out.summary.slope_err_proj = fit_loglog_slope(grid, out.summary.mean_err_proj);
  return out;
}

CoverageResult run_coverage(const ExperimentConfig& config) {
  config.validate();
  if (config.trials < 1) throw ConfigError("run_coverage: trials must be >= 1");

  const Matrix theta{{config.theta0}};
  const Matrix s_w = Matrix::identity(1);
  const Matrix q = config.q_scale * Matrix::identity(1);
  const LinearSystem system(theta, s_w, InitMode::stationary);
  const long T = config.effective_T();
  const double a_t = a_t_value(config.a_t_rule, T);
  const double kappa = 1.0;  // S_w = 1
  const double eps_min = std::sqrt(2.0 * kappa * std::log(1.0 / config.beta) / a_t);
  const double radius_factor = std::sqrt(a_t / static_cast<double>(T)) + 1.0;

  CoverageResult out;
  out.records.resize(static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, config.workers, [&](long i) {
    const std::uint64_t seed = derive_seed(config.master_seed, kStreamCoverage,
                                           static_cast<std::uint64_t>(i));
    const Trajectory traj = simulate(system, T, seed);
    ExperimentRecord rec = evaluate_trial(theta, s_w, q, traj, config.delta,
                                          config.radius_cap);
    rec.trial_id = i;
    out.records[static_cast<std::size_t>(i)] = std::move(rec);
  });

  long covered = 0;
  long condition_met = 0;
  for (const auto& rec : out.records) {
    const double radius = std::max(rec.epsilon, eps_min) * radius_factor;
    if (rec.err_proj <= radius) ++covered;
    if (rec.epsilon >= eps_min) ++condition_met;
  }
  out.summary.trials = config.trials;
  out.summary.covered = covered;
  out.summary.frequency = static_cast<double>(covered) / config.trials;
  out.summary.nominal = 1.0 - config.beta;
  out.summary.epsilon_min = eps_min;
  out.summary.condition_met_fraction =
      static_cast<double>(condition_met) / config.trials;
  out.summary.T = T;
  out.summary.a_T = a_t;
  out.summary.passes_slack = out.summary.frequency >= out.summary.nominal - 0.05;
  return out;
}

}  // namespace stableid
