#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stableid/errors.hpp"
#include "stableid/experiments.hpp"
#include "stableid/matrix.hpp"
#include "stableid/spectrum.hpp"
#include "test_support.hpp"

using namespace stableid;
using namespace test_support;

namespace {

ExperimentConfig spectral_config(int trials, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::spectral;
  cfg.m = 1;
  cfg.trials = trials;
  cfg.master_seed = seed;
  return cfg;
}

bool records_equal(const std::vector<ExperimentRecord>& a,
                   const std::vector<ExperimentRecord>& b) {
  if (a.size() != b.size()) return false;
  std::ostringstream sa, sb;
  write_records_csv(sa, a);
  write_records_csv(sb, b);
  return sa.str() == sb.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("spectral target reproduces the reference block") {
  const Matrix y = spectral_target(1);
  REQUIRE(y.rows() == 3);
  CHECK(y(0, 2) == 1.0);
  CHECK(y(1, 0) == -0.1);
  CHECK(spectral_radius(y) == doctest::Approx(std::sqrt(0.9125)));
  const Matrix y3 = spectral_target(3);
  REQUIRE(y3.rows() == 9);
  CHECK(y3(0, 0) == 0.95);
  CHECK(y3(0, 6) == 1.0);  // the (0,2) block entry of Y spread over I_3
  CHECK(spectral_radius(y3) == doctest::Approx(std::sqrt(0.9125)));
}

TEST_CASE("stable sampler: rejection for small n, scale-down for large n") {
  const Matrix theta = sample_stable_system(2, 11, false);
  CHECK(is_stable(theta));
  const Matrix big = sample_stable_system(30, 12, true);
  CHECK(is_stable(big));
  CHECK(spectral_radius(big) == doctest::Approx(1.0 / 1.05).epsilon(1e-9));
  CHECK_THROWS_AS(sample_stable_system(30, 13, false, 50), OversamplingError);
}

TEST_CASE("config validation rejects inconsistent settings") {
  ExperimentConfig cfg;
  cfg.trials = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.experiment = ExperimentKind::coverage;
  cfg.theta0 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.experiment = ExperimentKind::coverage;
  cfg.T = 8;
  cfg.a_t_rule = ATRule::t_pow_075;  // a_T / T = 8^-0.25 > 0.5
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.T = 500;
  CHECK_NOTHROW(cfg.validate());
  cfg = ExperimentConfig{};
  cfg.experiment = ExperimentKind::rates;
  cfg.n = 10;
  cfg.T_max = 16;  // horizon too short for the grid at this dimension
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("a_T rules") {
  CHECK(a_t_value(ATRule::sqrt_t, 400) == doctest::Approx(20.0));
  CHECK(a_t_value(ATRule::t_pow_075, 16) == doctest::Approx(8.0));
  CHECK(a_t_rule_from_string("sqrtT") == ATRule::sqrt_t);
  CHECK(a_t_rule_from_string("T0.75") == ATRule::t_pow_075);
  CHECK_THROWS_AS(a_t_rule_from_string("linear"), ConfigError);
}

TEST_CASE("spectral run: every projection is stable, every estimate is not") {
  const std::vector<ExperimentRecord> records = run_spectral(spectral_config(12, 7));
  REQUIRE(records.size() == 12);
  long id = 0;
  for (const auto& rec : records) {
    CHECK(rec.trial_id == id++);
    CHECK(rec.rho_proj < 1.0);
    CHECK(rec.rho_ls >= 1.0 - 1e-12);
    CHECK_FALSE(rec.ls_was_stable);
    CHECK(rec.err_ls >= 0.0);
    CHECK(rec.err_proj >= 0.0);
    CHECK(rec.epsilon >= 0.0);
    CHECK(rec.T == 25);
  }
}

TEST_CASE("spectral run with zero trials produces only the header") {
  const std::vector<ExperimentRecord> records = run_spectral(spectral_config(0, 7));
  CHECK(records.empty());
  std::ostringstream out;
  write_records_csv(out, records);
  CHECK(out.str() == std::string(kRecordCsvHeader) + "\n");
}

TEST_CASE("spectral projections concentrate near the true radius") {
  const std::vector<ExperimentRecord> records = run_spectral(spectral_config(50, 21));
  double mean_rho = 0.0;
  for (const auto& rec : records) mean_rho += rec.rho_proj;
  mean_rho /= static_cast<double>(records.size());
  CHECK(mean_rho >= 0.8);
  CHECK(mean_rho < 1.0);
}

TEST_CASE("spectral oversampling budget errors out loudly") {
  ExperimentConfig cfg = spectral_config(50, 3);
  cfg.T = 4000;  // long horizon: unstable estimates become very rare
  cfg.oversample_factor = 1.0;
  CHECK_THROWS_AS(run_spectral(cfg), OversamplingError);
}

TEST_CASE("determinism: identical configs give identical records") {
  const auto a = run_spectral(spectral_config(8, 99));
  const auto b = run_spectral(spectral_config(8, 99));
  CHECK(records_equal(a, b));
  const auto c = run_spectral(spectral_config(8, 100));
  CHECK_FALSE(records_equal(a, c));
}

TEST_CASE("parallel and serial execution produce identical records") {
  ExperimentConfig serial = spectral_config(10, 5);
  serial.workers = 1;
  ExperimentConfig parallel = spectral_config(10, 5);
  parallel.workers = 4;
  CHECK(records_equal(run_spectral(serial), run_spectral(parallel)));

  ExperimentConfig rates_serial;
  rates_serial.experiment = ExperimentKind::rates;
  rates_serial.n = 1;
  rates_serial.systems = 3;
  rates_serial.trials = 3;
  rates_serial.T_max = 64;
  rates_serial.master_seed = 31;
  rates_serial.workers = 1;
  ExperimentConfig rates_parallel = rates_serial;
  rates_parallel.workers = 4;
  CHECK(records_equal(run_rates(rates_serial).records,
                      run_rates(rates_parallel).records));
}

TEST_CASE("rates run: grid, errors, and the stable-estimate identity") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::rates;
  cfg.n = 1;
  cfg.systems = 5;
  cfg.trials = 4;
  cfg.T_max = 128;
  cfg.master_seed = 17;
  const RatesResult result = run_rates(cfg);
  REQUIRE(!result.summary.t_grid.empty());
  CHECK(result.summary.t_grid.back() == 128);
  CHECK(result.records.size() ==
        result.summary.t_grid.size() * 5 * 4);
  for (const auto& rec : result.records) {
    CHECK(rec.rho_proj < 1.0);
    if (rec.ls_was_stable) {
      // projection is the identity on the stable set
      CHECK(rec.err_proj == doctest::Approx(rec.err_ls).epsilon(1e-12));
      CHECK(rec.rate_at_proj == 0.0);
    }
  }
  // errors shrink with the horizon on average
  CHECK(result.summary.mean_err_proj.back() <
        result.summary.mean_err_proj.front());
}

TEST_CASE("rates run on n = 5 with scale-down improves with data") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::rates;
  cfg.n = 5;
  cfg.systems = 3;
  cfg.trials = 3;
  cfg.T_max = 300;
  cfg.scale_down = true;
  cfg.master_seed = 12;
  const RatesResult result = run_rates(cfg);
  CHECK(result.summary.mean_err_proj.back() <
        result.summary.mean_err_proj.front());
  CHECK(result.summary.slope_err_proj < 0.0);
}

TEST_CASE("coverage run meets the nominal level with slack") {
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::coverage;
  cfg.trials = 200;
  cfg.T = 500;
  cfg.beta = 0.1;
  cfg.theta0 = 0.5;
  cfg.master_seed = 4;
  const CoverageResult result = run_coverage(cfg);
  CHECK(result.summary.trials == 200);
  CHECK(result.summary.frequency >= 0.85);
  CHECK(result.summary.passes_slack);
  CHECK(result.summary.nominal == doctest::Approx(0.9));
  CHECK(result.summary.epsilon_min > 0.0);

  // beta near one makes the assertion trivially satisfiable
  cfg.beta = 0.999;
  const CoverageResult trivial = run_coverage(cfg);
  CHECK(trivial.summary.frequency >= trivial.summary.nominal - 0.05 - 1.0);

  // raising the horizon must not tank the coverage
  cfg.beta = 0.1;
  cfg.T = 100;
  const double cov_small = run_coverage(cfg).summary.frequency;
  cfg.T = 1000;
  const double cov_large = run_coverage(cfg).summary.frequency;
  CHECK(cov_large >= cov_small - 0.05);
}

TEST_CASE("csv schema is fixed and json mirrors the field names") {
  ExperimentRecord rec;
  rec.trial_id = 3;
  rec.seed = 12345;
  rec.T = 25;
  rec.rho_true = 0.95;
  rec.rho_ls = 1.02;
  rec.rho_proj = 0.93;
  rec.rho_clip = 0.99;
  rec.err_ls = 0.5;
  rec.err_proj = 0.25;
  rec.err_clip = 0.75;
  rec.rate_at_proj = 0.01;
  rec.epsilon = 0.2;
  rec.ls_was_stable = false;

  std::ostringstream csv;
  write_records_csv(csv, {rec});
  const std::string text = csv.str();
  CHECK(text.rfind("trial_id,seed,T,rho_true,rho_ls,rho_proj,rho_clip,err_ls,"
                   "err_proj,err_clip,rate_at_proj,epsilon,ls_was_stable\n",
                   0) == 0);
  CHECK(text.find("3,12345,25,") != std::string::npos);
  CHECK(text.find(",0\n") != std::string::npos);

  std::ostringstream js;
  write_records_json(js, {rec});
  for (const char* field :
       {"trial_id", "seed", "T", "rho_true", "rho_ls", "rho_proj", "rho_clip",
        "err_ls", "err_proj", "err_clip", "rate_at_proj", "epsilon",
        "ls_was_stable"}) {
    CHECK(js.str().find(field) != std::string::npos);
  }
}

}  // TEST_SUITE
