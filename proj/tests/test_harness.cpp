#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "itreg/harness.hpp"
#include "itreg/kernels.hpp"
#include "itreg/risk.hpp"
#include "itreg/spectral_oracle.hpp"

using namespace itreg;

namespace {

ExperimentRecord rec(int n, double lambda, std::uint64_t seed, double risk, int t = 1) {
  ExperimentRecord r;
  r.loss_kind = LossKind::logistic;
  r.r = 0.25;
  r.alpha = 2;
  r.t = t;
  r.n = n;
  r.lambda = lambda;
  r.seed = seed;
  r.excess_risk = risk;
  r.std_error = 0.0;
  return r;
}

SweepConfig small_config(LossKind kind) {
  SweepConfig c;
  c.task.loss_kind = kind;
  c.task.r = 0.25;
  c.task.alpha = 2;
  c.task.seed = 3;
  c.task.noise_sigma = kind == LossKind::squared ? 0.5 : 0.0;
  c.n_grid = {16, 24};
  c.lambda_grid = log_spaced(1e-3, 1e-1, 4);
  c.t_list = {1, 3};
  c.repetitions = 2;
  c.mc_samples = 500;
  return c;
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "itreg_harness_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool same_results(std::vector<ExperimentRecord> a, std::vector<ExperimentRecord> b) {
  sort_records(a);
  sort_records(b);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::ostringstream x, y;
    auto ra = a[i], rb = b[i];
    ra.wall_time_ms = rb.wall_time_ms = 0.0;
    write_record(x, ra);
    write_record(y, rb);
    if (x.str() != y.str()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("log-spaced grid") {
  const auto g = log_spaced(1e-4, 1.0, 50);
  REQUIRE(g.size() == 50);
  CHECK(g.front() == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(g.back() == 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e4, 1.0 / 49)));
  CHECK(log_spaced(0.5, 0.5, 1) == std::vector<double>{0.5});
  CHECK_THROWS(log_spaced(0.0, 1.0, 5));
}

TEST_CASE("theoretical rates") {
  CHECK(theoretical_rate(0.25, 2, 1) == doctest::Approx(0.75));
  CHECK(theoretical_rate(0.25, 2, 8) == doctest::Approx(0.75));
  CHECK(theoretical_rate(3.25, 2, 1) == doctest::Approx(0.80));
  CHECK(theoretical_rate(10.25, 2, 8) == doctest::Approx(32.0 / 33.0));
  CHECK(theoretical_lambda_rate(0.25, 2, 1) == doctest::Approx(0.5));
  CHECK(theoretical_lambda_rate(10.25, 2, 8) == doctest::Approx(2.0 / 33.0));
  CHECK(theoretical_lambda_rate(0.25, 2, 1000) == doctest::Approx(2.0 / (1 + 2 * 1.5)));
  // Theoretical exponents for the benchmark grid, rounded to two decimals.
  const double r_values[3] = {0.25, 3.25, 10.25};
  const int t_values[3] = {1, 3, 8};
  const double table[3][3] = {{0.75, 0.80, 0.80}, {0.75, 0.92, 0.92}, {0.75, 0.94, 0.97}};
  for (int ti = 0; ti < 3; ++ti)
    for (int ri = 0; ri < 3; ++ri)
      CHECK(std::round(100 * theoretical_rate(r_values[ri], 2, t_values[ti])) / 100 == doctest::Approx(table[ti][ri]));
  // Both forms of the exponent agree: 2 s alpha / (1 + 2 s alpha), s = min(r + 1/2, t).
  for (double r : r_values)
    for (int t : {1, 2, 5, 20}) {
      const double s = std::min(r + 0.5, static_cast<double>(t));
      CHECK(theoretical_rate(r, 2, t) == doctest::Approx(4 * s / (1 + 4 * s)));
    }
  CHECK_THROWS(theoretical_rate(0.0, 2, 1));
  CHECK_THROWS(theoretical_rate(0.5, 1, 1));
  CHECK_THROWS(theoretical_rate(0.5, 2, 0));
}

TEST_CASE("chosen flags: one per group, ties toward larger lambda, failures skipped") {
  std::vector<ExperimentRecord> rs{rec(10, 0.1, 0, 0.5), rec(10, 0.2, 0, 0.3), rec(10, 0.4, 0, 0.3),
                                   rec(10, 0.8, 0, 0.9), rec(10, 0.1, 1, 0.2), rec(10, 0.2, 1, 0.1)};
  auto broken = rec(10, 0.05, 1, 0.0);
  broken.failed = true;
  broken.excess_risk = std::nan("");
  rs.push_back(broken);
  mark_chosen(rs);
  CHECK(rs[2].chosen);
  CHECK_FALSE(rs[1].chosen);
  CHECK(rs[5].chosen);
  CHECK_FALSE(rs[6].chosen);
  int chosen = 0;
  for (const auto& r : rs) chosen += r.chosen;
  CHECK(chosen == 2);
}

TEST_CASE("rate fit on exact and perturbed power laws") {
  std::vector<ExperimentRecord> rs;
  for (int n : {64, 128, 256, 512, 1024}) {
    rs.push_back(rec(n, 0.1, 0, 3.0 * std::pow(n, -0.75)));
    rs.push_back(rec(n, 0.2, 0, 6.0 * std::pow(n, -0.75)));
  }
  mark_chosen(rs);
  for (auto sel : {RateSelection::per_seed, RateSelection::seed_mean}) {
    const auto fit = fit_rate(rs, {LossKind::logistic, 0.25, 2, 1}, sel);
    CHECK(fit.gamma_hat == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(fit.residual_r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(fit.gamma_theory == doctest::Approx(0.75));
    CHECK(fit.points == 5);
    REQUIRE(fit.lambda_slope.has_value());
    CHECK(*fit.lambda_slope == doctest::Approx(0.0).epsilon(1e-12));
  }

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  std::vector<ExperimentRecord> noisy;
  for (int n : {50, 100, 200, 400, 800, 1600, 3200})
    for (std::uint64_t s = 0; s < 5; ++s) noisy.push_back(rec(n, 0.1, s, 2.0 * std::pow(n, -0.9) * (1 + jitter(gen))));
  mark_chosen(noisy);
  CHECK(std::abs(fit_rate(noisy, {LossKind::logistic, 0.25, 2, 1}, RateSelection::per_seed).gamma_hat - 0.9) <= 0.02);
  CHECK(std::abs(fit_rate(noisy, {LossKind::logistic, 0.25, 2, 1}).gamma_hat - 0.9) <= 0.02);
}

TEST_CASE("seed-mean selection averages before choosing lambda") {
  // lambda 0.1 wins seed 0 and lambda 0.2 wins seed 1, but 0.2 has the lower mean.
  std::vector<ExperimentRecord> rs;
  for (int n : {10, 20, 40}) {
    rs.push_back(rec(n, 0.1, 0, 1.0 / n));
    rs.push_back(rec(n, 0.1, 1, 9.0 / n));
    rs.push_back(rec(n, 0.2, 0, 2.0 / n));
    rs.push_back(rec(n, 0.2, 1, 4.0 / n));
  }
  mark_chosen(rs);
  const auto fit = fit_rate(rs, {LossKind::logistic, 0.25, 2, 1});
  CHECK(fit.gamma_hat == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)));
  CHECK_FALSE(fit.lambda_slope.has_value());
}

TEST_CASE("rate fit rejects too few usable points") {
  std::vector<ExperimentRecord> rs{rec(10, 0.1, 0, 0.1), rec(20, 0.1, 0, 0.05), rec(40, 0.1, 0, -0.01),
                                   rec(80, 0.1, 0, 0.01)};
  mark_chosen(rs);
  const auto fit = fit_rate(rs, {LossKind::logistic, 0.25, 2, 1}, RateSelection::per_seed);
  CHECK(fit.excluded_nonpositive == 1);
  CHECK(fit.points == 3);
  rs.pop_back();
  CHECK_THROWS_AS(fit_rate(rs, {LossKind::logistic, 0.25, 2, 1}, RateSelection::per_seed), std::invalid_argument);
  CHECK(parse_rate_selection(to_string(RateSelection::per_seed)) == RateSelection::per_seed);
  CHECK_THROWS(parse_rate_selection("median"));
}

TEST_CASE("single-cell sweep") {
  SweepConfig c = small_config(LossKind::logistic);
  c.n_grid = {20};
  c.lambda_grid = {1e-2};
  c.t_list = {2};
  c.repetitions = 1;
  const auto rs = run_sweep(c);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].chosen);
  CHECK_FALSE(rs[0].failed);
  CHECK(rs[0].t == 2);
  CHECK(rs[0].seed == 3);
}

TEST_CASE("squared-loss sweep matches the spectral filter cell by cell") {
  SweepConfig c = small_config(LossKind::squared);
  c.solver = {NewtonBackend::coefficient_lu, 0.0, 100};
  const auto rs = run_sweep(c);
  CHECK(rs.size() == 2u * 2u * 4u * 2u);
  for (const auto& r : rs) {
    TaskSpec t = c.task;
    t.n = r.n;
    t.seed = r.seed;
    const auto data = generate(t);
    auto k = std::make_shared<const KernelMatrix>(KernelSpec{2}, data.inputs);
    const Eigen::Map<const Eigen::VectorXd> y(data.labels.data(), r.n);
    const Estimator est = filter_apply({r.t, r.lambda}, k, y);
    const auto want = excess_risk_squared(est.coefficients, KernelSpec{2}, data.inputs, t, c.mc_samples, c.mc_seed);
    CHECK(r.excess_risk == doctest::Approx(want.value).epsilon(1e-6));
  }
}

TEST_CASE("sweep output is independent of the thread count and written incrementally") {
  SweepConfig c = small_config(LossKind::logistic);
  c.r_values = {0.25, 3.25};
  const auto path = temp_file("records.csv");
  c.output_path = path.string();
  const auto one = run_sweep(c);
  const auto from_file = read_records(c.output_path);
  CHECK(same_results(one, from_file));

  c.threads = 3;
  c.output_path.clear();
  const auto three = run_sweep(c);
  CHECK(same_results(one, three));

  // Exactly one chosen record per (r, t, n, seed) group.
  std::map<std::tuple<double, int, int, std::uint64_t>, int> chosen;
  for (const auto& r : one) chosen[{r.r, r.t, r.n, r.seed}] += r.chosen;
  CHECK(chosen.size() == 2u * 2u * 2u * 2u);
  for (const auto& [key, count] : chosen) CHECK(count == 1);
}

TEST_CASE("records files tolerate a truncated final line") {
  const auto path = temp_file("partial.csv");
  std::vector<ExperimentRecord> rs{rec(10, 0.1, 0, 0.5), rec(10, 0.2, 0, 0.25)};
  rs[1].chosen = true;
  write_records(path.string(), rs);
  {
    std::ofstream out(path, std::ios::app);
    out << "logistic,0.25,2,1,10,0.4";
  }
  const auto back = read_records(path.string());
  REQUIRE(back.size() == 2);
  CHECK(back[1].chosen);
  CHECK(back[0].excess_risk == 0.5);

  std::ofstream bad(path);
  bad << "not,a,header\n";
  bad.close();
  CHECK_THROWS(read_records(path.string()));
}

TEST_CASE("failed cells become error rows and the sweep continues") {
  SweepConfig c = small_config(LossKind::logistic);
  c.n_grid = {24};
  c.repetitions = 1;
  c.lambda_grid = {1e-4, 1.0};
  c.target_eps = 1e-12;
  c.solver = {NewtonBackend::coefficient_lu, 0.0, 1};
  const auto rs = run_sweep(c);
  REQUIRE(rs.size() == 4);
  int failed = 0;
  for (const auto& r : rs) failed += r.failed;
  CHECK(failed >= 2);
  for (const auto& r : rs) {
    if (r.failed) {
      CHECK_FALSE(r.chosen);
      std::ostringstream line;
      write_record(line, r);
      CHECK(line.str().find(",nan,nan,error,") != std::string::npos);
    }
  }
}

TEST_CASE("rate tables") {
  std::vector<ExperimentRecord> rs;
  for (int n : {64, 128, 256, 512, 1024}) rs.push_back(rec(n, 1.0 / n, 0, std::pow(n, -0.8)));
  mark_chosen(rs);
  const auto fits = fit_all_rates(rs);
  REQUIRE(fits.size() == 1);
  CHECK(*fits[0].lambda_slope == doctest::Approx(-1.0));
  const auto text = rate_table_text(fits);
  CHECK(text.find("gamma_hat") != std::string::npos);
  CHECK(text.find("0.800") != std::string::npos);
  const auto json = rate_table_json(fits);
  CHECK(json.find("\"gamma_hat\": 0.8") != std::string::npos);
  CHECK(json.find("\"selection\": \"seed-mean\"") != std::string::npos);
}

TEST_CASE("sweep configuration validation") {
  SweepConfig c = small_config(LossKind::logistic);
  c.t_list.clear();
  CHECK_THROWS(run_sweep(c));
  c = small_config(LossKind::logistic);
  c.repetitions = 0;
  CHECK_THROWS(run_sweep(c));
  c = small_config(LossKind::logistic);
  c.r_values = {0.3};
  CHECK_THROWS(run_sweep(c));
}
