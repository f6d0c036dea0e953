#include "stableid/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stableid/errors.hpp"
#include "stableid/experiments.hpp"
#include "stableid/io.hpp"
#include "stableid/projection.hpp"
#include "stableid/spectrum.hpp"
#include "stableid/sysid.hpp"

namespace stableid {

namespace {

using nlohmann::json;

struct GlobalOptions {
  double delta = kDefaultDelta;
  double q_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  double radius_cap = kDefaultRadiusCap;
};

void add_global_options(CLI::App* cmd, GlobalOptions& g) {
  cmd->add_option("--delta", g.delta, "Projection penalty parameter")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--q-scale", g.q_scale, "State cost is q_scale * I")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", g.seed, "Master seed");
  cmd->add_option("--out", g.out, "Output file (default: stdout)");
  cmd->add_option("--format", g.format, "Record output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--radius-cap", g.radius_cap,
                  "Eigenvalue clipping cap, in (0, 1)")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json rate_to_json(double value) {
  if (std::isinf(value)) return json("inf");
  if (std::isnan(value)) return json("nan");
  return json(value);
}

void emit(std::ostream& fallback, const std::string& path, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << text;
  if (!file) throw IoError("write failed for " + path);
}

std::string records_text(const std::vector<ExperimentRecord>& records,
                         OutputFormat format) {
  std::ostringstream buf;
  write_records(buf, records, format);
  return buf.str();
}

json projection_to_json(const ProjectionResult& proj, double rho_input) {
  json j;
  j["theta_star"] = matrix_to_json(proj.theta_star);
  j["rho"] = proj.spectral_radius_star;
  j["rho_input"] = rho_input;
  j["rate"] = rate_to_json(proj.rate_at_star);
  j["epsilon"] = proj.epsilon;
  j["epsilon_single_kappa"] = proj.epsilon_single_kappa;
  j["delta"] = proj.delta;
  j["was_already_stable"] = proj.was_already_stable;
  return j;
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err);

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  try {
    return run_parsed(args, out, err);
  } catch (const ConfigError& e) {
    err << json{{"code", 1}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << json{{"code", 1}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const Error& e) {
    err << json{{"code", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << json{{"code", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_run(args, std::cout, std::cerr);
}

namespace {

int run_parsed(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Stable linear system identification toolkit"};
  app.require_subcommand(1);

  // project ------------------------------------------------------------
  GlobalOptions proj_g;
  std::string proj_matrix_path, proj_sw_path, proj_q_path;
  CLI::App* cmd_project =
      app.add_subcommand("project", "Project a matrix onto the stable set");
  cmd_project->add_option("matrix-file", proj_matrix_path, "Matrix text file")
      ->required();
  cmd_project->add_option("--sw", proj_sw_path, "Noise covariance file (default I)");
  cmd_project->add_option("--q", proj_q_path, "State cost file (default q_scale * I)");
  add_global_options(cmd_project, proj_g);

  // estimate -----------------------------------------------------------
  GlobalOptions est_g;
  std::string est_traj_path, est_sw_path;
  CLI::App* cmd_estimate = app.add_subcommand(
      "estimate", "Least-squares estimate of a trajectory plus its projection");
  cmd_estimate->add_option("trajectory-file", est_traj_path, "Trajectory text file")
      ->required();
  cmd_estimate->add_option("--sw", est_sw_path, "Noise covariance file (default I)");
  add_global_options(cmd_estimate, est_g);

  // simulate -----------------------------------------------------------
  GlobalOptions sim_g;
  std::string sim_theta_path, sim_sw_path, sim_init = "stationary";
  long sim_T = 100;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Simulate a trajectory and write it to a file");
  cmd_simulate->add_option("--theta", sim_theta_path, "System matrix file")->required();
  cmd_simulate->add_option("--sw", sim_sw_path, "Noise covariance file (default I)");
  cmd_simulate->add_option("--T", sim_T, "Number of steps")->check(CLI::PositiveNumber);
  cmd_simulate->add_option("--init", sim_init, "Initial state distribution")
      ->check(CLI::IsMember({"stationary", "zero"}));
  add_global_options(cmd_simulate, sim_g);

  // bench --------------------------------------------------------------
  CLI::App* cmd_bench = app.add_subcommand("bench", "Monte-Carlo experiments");
  cmd_bench->require_subcommand(1);

  struct BenchOptions {
    GlobalOptions g;
    int n = 1;
    int m = 1;
    int trials = -1;  // -1 = per-experiment default
    int systems = 20;
    long T = 0;
    long t_max = 200;
    int grid_points = 8;
    double beta = 0.1;
    double theta0 = 0.5;
    std::string a_t_rule = "sqrtT";
    double oversample = 100.0;
    bool scale_down = false;
    int workers = 0;
  };

  BenchOptions spectral_o, rates_o, cov_o;
  auto add_bench_options = [&](CLI::App* cmd, BenchOptions& b, ExperimentKind kind) {
    add_global_options(cmd, b.g);
    cmd->set_config("--config", "", "Config file with flat key = value lines");
    cmd->add_option("--trials", b.trials, "Trial count")->check(CLI::NonNegativeNumber);
    cmd->add_option("--workers", b.workers, "Worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    if (kind == ExperimentKind::spectral) {
      cmd->add_option("--m", b.m, "Block count of the spectral target (n = 3m)")
          ->check(CLI::PositiveNumber);
      cmd->add_option("--T", b.T, "Horizon override (default 25 sqrt(m))")
          ->check(CLI::NonNegativeNumber);
      cmd->add_option("--oversample", b.oversample,
                      "Rejection budget as a multiple of trials")
          ->check(CLI::PositiveNumber);
    }
    if (kind == ExperimentKind::rates) {
      cmd->add_option("--n", b.n, "State dimension")->check(CLI::PositiveNumber);
      cmd->add_option("--systems", b.systems, "Number of sampled systems")
          ->check(CLI::PositiveNumber);
      cmd->add_option("--t-max", b.t_max, "Longest horizon")->check(CLI::PositiveNumber);
      cmd->add_option("--grid-points", b.grid_points, "Horizon grid size")
          ->check(CLI::PositiveNumber);
      cmd->add_flag("--scale-down", b.scale_down,
                    "Rescale normal draws by 1.05 rho instead of rejecting");
    }
    if (kind == ExperimentKind::coverage) {
      cmd->add_option("--T", b.T, "Horizon (default 500)")
          ->check(CLI::NonNegativeNumber);
      cmd->add_option("--beta", b.beta, "Confidence parameter in (0, 1)")
          ->check(CLI::Range(1e-9, 1.0 - 1e-9));
      cmd->add_option("--theta0", b.theta0, "Scalar system matrix, |theta0| < 1");
      cmd->add_option("--a-t-rule", b.a_t_rule, "Speed sequence a_T")
          ->check(CLI::IsMember({"sqrtT", "T0.75"}));
    }
  };

  CLI::App* cmd_spectral =
      cmd_bench->add_subcommand("spectral", "Spectral approximation experiment");
  add_bench_options(cmd_spectral, spectral_o, ExperimentKind::spectral);
  CLI::App* cmd_rates =
      cmd_bench->add_subcommand("rates", "Statistical convergence-rate experiment");
  add_bench_options(cmd_rates, rates_o, ExperimentKind::rates);
  CLI::App* cmd_coverage =
      cmd_bench->add_subcommand("coverage", "Empirical error-bound coverage");
  add_bench_options(cmd_coverage, cov_o, ExperimentKind::coverage);

  // CLI11 wants a mutable argv; build one from the argument list.
  std::vector<std::string> argv_storage = args;
  std::vector<char*> argv;
  std::string prog = "stableid";
  argv.push_back(prog.data());
  for (auto& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"code", 1}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }

  auto fill_config = [](const BenchOptions& b, ExperimentKind kind,
                        int default_trials) {
    ExperimentConfig cfg;
    cfg.experiment = kind;
    cfg.n = b.n;
    cfg.m = b.m;
    cfg.trials = b.trials >= 0 ? b.trials : default_trials;
    cfg.systems = b.systems;
    cfg.T = b.T;
    cfg.T_max = b.t_max;
    cfg.grid_points = b.grid_points;
    cfg.delta = b.g.delta;
    cfg.q_scale = b.g.q_scale;
    cfg.radius_cap = b.g.radius_cap;
    cfg.master_seed = b.g.seed;
    cfg.a_t_rule = a_t_rule_from_string(b.a_t_rule);
    cfg.beta = b.beta;
    cfg.theta0 = b.theta0;
    cfg.oversample_factor = b.oversample;
    cfg.scale_down = b.scale_down;
    cfg.workers = b.workers;
    cfg.out = b.g.out;
    cfg.format = b.g.format == "json" ? OutputFormat::json : OutputFormat::csv;
    return cfg;
  };

  if (cmd_project->parsed()) {
    const Matrix theta_prime = read_matrix_file(proj_matrix_path);
    const std::size_t n = theta_prime.rows();
    const Matrix s_w = proj_sw_path.empty() ? Matrix::identity(n)
                                            : read_matrix_file(proj_sw_path);
    const Matrix q = proj_q_path.empty() ? proj_g.q_scale * Matrix::identity(n)
                                         : read_matrix_file(proj_q_path);
    const ProjectionResult proj =
        project_to_stable(theta_prime, s_w, q, proj_g.delta);
    emit(out, proj_g.out,
         projection_to_json(proj, spectral_radius(theta_prime)).dump(2) + "\n");
    return 0;
  }

  if (cmd_estimate->parsed()) {
    const Trajectory traj = read_trajectory_file(est_traj_path);
    const std::size_t n = traj.dim();
    const Matrix s_w = est_sw_path.empty() ? Matrix::identity(n)
                                           : read_matrix_file(est_sw_path);
    const LeastSquaresEstimate est = least_squares(traj);
    const ProjectionResult proj =
        project_to_stable(est.theta_hat, s_w, est_g.q_scale * Matrix::identity(n),
                          est_g.delta);
    json j;
    j["T"] = est.T;
    j["theta_hat"] = matrix_to_json(est.theta_hat);
    j["rho_hat"] = spectral_radius(est.theta_hat);
    j["gram_min_eig"] = est.gram_min_eig;
    j["projection"] = projection_to_json(proj, spectral_radius(est.theta_hat));
    emit(out, est_g.out, j.dump(2) + "\n");
    return 0;
  }

  if (cmd_simulate->parsed()) {
    const Matrix theta = read_matrix_file(sim_theta_path);
    const std::size_t n = theta.rows();
    const Matrix s_w = sim_sw_path.empty() ? Matrix::identity(n)
                                           : read_matrix_file(sim_sw_path);
    const InitMode init =
        sim_init == "zero" ? InitMode::zero : InitMode::stationary;
    const LinearSystem system(theta, s_w, init);
    const Trajectory traj = simulate(system, sim_T, sim_g.seed);
    if (sim_g.out.empty()) {
      std::ostringstream buf;
      write_trajectory(buf, traj);
      out << buf.str();
    } else {
      write_trajectory_file(sim_g.out, traj);
    }
    return 0;
  }

  if (cmd_spectral->parsed()) {
    const ExperimentConfig cfg =
        fill_config(spectral_o, ExperimentKind::spectral, 50);
    const std::vector<ExperimentRecord> records = run_spectral(cfg);
    emit(out, cfg.out, records_text(records, cfg.format));
    long unstable_ls = 0;
    double mean_rho_proj = 0.0;
    for (const auto& r : records) {
      if (r.rho_ls >= 1.0) ++unstable_ls;
      mean_rho_proj += r.rho_proj;
    }
    json summary;
    summary["experiment"] = "spectral";
    summary["records"] = records.size();
    summary["frac_rho_ls_ge_1"] =
        records.empty() ? 0.0 : static_cast<double>(unstable_ls) / records.size();
    summary["mean_rho_proj"] =
        records.empty() ? 0.0 : mean_rho_proj / static_cast<double>(records.size());
    err << summary.dump() << "\n";
    return 0;
  }

  if (cmd_rates->parsed()) {
    const ExperimentConfig cfg = fill_config(rates_o, ExperimentKind::rates, 20);
    const RatesResult result = run_rates(cfg);
    emit(out, cfg.out, records_text(result.records, cfg.format));
    json summary;
    summary["experiment"] = "rates";
    summary["t_grid"] = result.summary.t_grid;
    summary["mean_err_ls"] = result.summary.mean_err_ls;
    summary["mean_err_proj"] = result.summary.mean_err_proj;
    summary["min_err_proj"] = result.summary.min_err_proj;
    summary["max_err_proj"] = result.summary.max_err_proj;
    summary["slope_err_ls"] = result.summary.slope_err_ls;
    summary["slope_err_proj"] = result.summary.slope_err_proj;
    summary["records"] = result.records.size();
    err << summary.dump() << "\n";
    return 0;
  }

  if (cmd_coverage->parsed()) {
    const ExperimentConfig cfg = fill_config(cov_o, ExperimentKind::coverage, 400);
    const CoverageResult result = run_coverage(cfg);
    emit(out, cfg.out, records_text(result.records, cfg.format));
    json summary;
    summary["experiment"] = "coverage";
    summary["trials"] = result.summary.trials;
    summary["covered"] = result.summary.covered;
    summary["frequency"] = result.summary.frequency;
    summary["nominal"] = result.summary.nominal;
    summary["epsilon_min"] = result.summary.epsilon_min;
    summary["condition_met_fraction"] = result.summary.condition_met_fraction;
    summary["T"] = result.summary.T;
    summary["a_T"] = result.summary.a_T;
    summary["passes_slack"] = result.summary.passes_slack;
    err << summary.dump() << "\n";
    return 0;
  }

  err << json{{"code", 1}, {"message", "no subcommand given"}}.dump() << "\n";
  return 1;
}

}  // namespace

}  // namespace stableid
