#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stableid/matrix.hpp"

namespace stableid {

enum class ExperimentKind { spectral, rates, coverage, project_one };
enum class ATRule { sqrt_t, t_pow_075 };  // a_T = sqrt(T) or T^0.75
enum class OutputFormat { csv, json };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);
std::string to_string(ATRule rule);
ATRule a_t_rule_from_string(const std::string& name);
double a_t_value(ATRule rule, long T);

// Desk-scale defaults; full-scale trial counts are reachable through
// the same fields. validate() enforces cross-field constraints, including
// a_T/T <= 0.5 at the effective horizon.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::spectral;
  int n = 1;           // state dimension (rates, coverage)
  int m = 1;           // block count of the spectral target (n = 3m)
  int trials = 50;     // spectral/coverage: trials; rates: trajectories per system
  int systems = 20;    // rates: number of sampled systems
  long T = 0;          // coverage horizon (0 = 500); spectral override (0 = 25 sqrt(m))
  long T_max = 200;    // rates: longest horizon
  int grid_points = 8; // rates: log-spaced horizons up to T_max
  double delta = 1e-9;
  double q_scale = 1.0;      // Q = q_scale * I
  double radius_cap = 0.99;  // clipping baseline cap
  std::uint64_t master_seed = 0;
  ATRule a_t_rule = ATRule::sqrt_t;
  double beta = 0.1;         // coverage: confidence parameter
  double theta0 = 0.5;       // coverage: scalar system matrix
  double oversample_factor = 100.0;  // rejection budget multiplier
  bool scale_down = false;   // rates sampler: rescale draws instead of rejecting
  int workers = 0;           // 0 = hardware concurrency
  std::string out;           // output path; empty = stdout
  OutputFormat format = OutputFormat::csv;

  void validate() const;  // throws ConfigError
  long effective_T() const;
};

// One Monte-Carlo trial. The serialized schema (see kRecordCsvHeader)
// excludes the runtime fields so that identical configurations produce
// byte-identical output files.
struct ExperimentRecord {
  long trial_id = 0;
  std::uint64_t seed = 0;
  long T = 0;
  double rho_true = 0.0;
  double rho_ls = 0.0;
  double rho_proj = 0.0;
  double rho_clip = 0.0;
  double err_ls = 0.0;    // ||theta_hat - theta||_2
  double err_proj = 0.0;  // ||theta_star - theta||_2
  double err_clip = 0.0;
  double rate_at_proj = 0.0;
  double epsilon = 0.0;
  bool ls_was_stable = false;
  double runtime_ms_ls = 0.0;
  double runtime_ms_proj = 0.0;
  double runtime_ms_clip = 0.0;
};

inline constexpr int kRecordSchemaVersion = 1;
inline constexpr const char* kRecordCsvHeader =
    "trial_id,seed,T,rho_true,rho_ls,rho_proj,rho_clip,err_ls,err_proj,"
    "err_clip,rate_at_proj,epsilon,ls_was_stable";

void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
void write_records_json(std::ostream& out, const std::vector<ExperimentRecord>& records);
void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records,
                   OutputFormat format);

// The nearly-unstable spectral target Y (x) I_m with
// Y = [[0.95, 0.1, 1], [-0.1, 0.95, 0], [0, 0, 0.9]].
Matrix spectral_target(int m);

// Draws standard-normal matrices until one is strictly stable. With
// scale_down set, a single draw is rescaled by 1.05 * rho instead (normal
// matrices of dimension >= 25 are essentially never stable, so rejection
// alone cannot work there).
Matrix sample_stable_system(int n, std::uint64_t seed, bool scale_down,
                            int max_attempts = 10000);

// Spectral-approximation experiment: simulates the spectral target,
// rejects trials whose least-squares estimate is stable, and records the
// projection and clipping stabilizations of the remaining ones.
std::vector<ExperimentRecord> run_spectral(const ExperimentConfig& config);

struct RatesSummary {
  std::vector<long> t_grid;
  std::vector<double> mean_err_ls;
  std::vector<double> mean_err_proj;
  std::vector<double> min_err_proj;
  std::vector<double> max_err_proj;
  double slope_err_ls = 0.0;    // log-log least squares fit over the grid
  double slope_err_proj = 0.0;
};

struct RatesResult {
  std::vector<ExperimentRecord> records;
  RatesSummary summary;
};

// Statistical-rates experiment: random stable systems, one trajectory per
// (system, trial) pair, estimation error recorded along a log-spaced
// horizon grid.
RatesResult run_rates(const ExperimentConfig& config);

struct CoverageSummary {
  long trials = 0;
  long covered = 0;
  double frequency = 0.0;
  double nominal = 0.0;      // 1 - beta
  double epsilon_min = 0.0;  // sqrt(2 kappa log(1/beta) / a_T)
  double condition_met_fraction = 0.0;
  long T = 0;
  double a_T = 0.0;
  bool passes_slack = false;  // frequency >= nominal - 0.05
};

struct CoverageResult {
  std::vector<ExperimentRecord> records;
  CoverageSummary summary;
};

// Empirical coverage of the a-posteriori error radius for a known scalar
// system: counts trials with
//   |theta - theta_star| <= max(epsilon, epsilon_min) * (sqrt(a_T/T) + 1),
// where epsilon_min is the smallest radius for which the finite-a_T
// condition a_T >= 2 kappa log(1/beta) / eps^2 holds (the o(a_T) term is
// not computable and is dropped).
CoverageResult run_coverage(const ExperimentConfig& config);

}  // namespace stableid
