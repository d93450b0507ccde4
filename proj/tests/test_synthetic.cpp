#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "itreg/kernels.hpp"
#include "itreg/rng.hpp"
#include "itreg/synthetic.hpp"

using namespace itreg;

namespace {

TaskSpec logistic_task(int n, std::uint64_t seed, double r = 0.25) {
  TaskSpec s;
  s.loss_kind = LossKind::logistic;
  s.r = r;
  s.alpha = 2;
  s.n = n;
  s.seed = seed;
  return s;
}

TaskSpec regression_task(int n, std::uint64_t seed, double sigma) {
  TaskSpec s = logistic_task(n, seed);
  s.loss_kind = LossKind::squared;
  s.noise_sigma = sigma;
  return s;
}

}  // namespace

TEST_CASE("generators match published reference outputs") {
  // splitmix64 from state 0
  std::uint64_t sm = 0;
  CHECK(splitmix64(sm) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(sm) == 0x6E789E6AA1B965F4ULL);
  CHECK(splitmix64(sm) == 0x06C45D188009454FULL);
  // xoshiro256** from state {1, 2, 3, 4}
  Xoshiro256 x(std::array<std::uint64_t, 4>{1, 2, 3, 4});
  CHECK(x.next() == 11520ULL);
  CHECK(x.next() == 0ULL);
  CHECK(x.next() == 1509978240ULL);
  CHECK(x.next() == 1215971899390074240ULL);
}

TEST_CASE("uniform and normal draws") {
  auto rng = make_stream(5, Stream::noise);
  double sum = 0, sum2 = 0, lo = 1, hi = 0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / m == doctest::Approx(0.5).epsilon(0.01));
  sum = 0;
  for (int i = 0; i < m; ++i) {
    const double g = rng.normal();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::abs(sum / m) < 0.01);
  CHECK(sum2 / m == doctest::Approx(1.0).epsilon(0.02));
  // substreams differ
  CHECK(make_stream(5, Stream::inputs).next() != make_stream(5, Stream::labels).next());
  CHECK(make_stream(5, Stream::monte_carlo, 0).next() != make_stream(5, Stream::monte_carlo, 1).next());
}

TEST_CASE("datasets are deterministic per seed") {
  const auto a = generate(logistic_task(500, 9));
  const auto b = generate(logistic_task(500, 9));
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  CHECK(a.theta_star_values == b.theta_star_values);
  const auto c = generate(logistic_task(500, 10));
  CHECK(a.inputs != c.inputs);
  // Inputs depend on the seed only, not on r or the loss.
  CHECK(generate(logistic_task(500, 9, 3.25)).inputs == a.inputs);
  CHECK(generate(regression_task(500, 9, 0.3)).inputs == a.inputs);
}

TEST_CASE("classification labels follow sigmoid(theta*)") {
  const auto d = generate(logistic_task(100000, 3));
  double resid = 0, var = 0;
  for (std::size_t i = 0; i < d.inputs.size(); ++i) {
    CHECK((d.labels[i] == 1.0 || d.labels[i] == -1.0));
    CHECK(d.inputs[i] >= 0.0);
    CHECK(d.inputs[i] < 1.0);
    CHECK(d.theta_star_values[i] == theta_star_eval(0.25, 2, d.inputs[i]));
    const double p = sigmoid(d.theta_star_values[i]);
    resid += (d.labels[i] + 1.0) / 2.0 - p;
    var += p * (1 - p);
  }
  // Frequency of y = +1 against its conditional expectation, 3 binomial std.
  CHECK(std::abs(resid) <= 3.0 * std::sqrt(var));
}

TEST_CASE("regression labels") {
  const auto clean = generate(regression_task(1000, 4, 0.0));
  CHECK(clean.labels == clean.theta_star_values);
  const auto noisy = generate(regression_task(100000, 4, 0.7));
  double m = 0, m2 = 0;
  for (std::size_t i = 0; i < noisy.labels.size(); ++i) {
    const double e = noisy.labels[i] - noisy.theta_star_values[i];
    m += e;
    m2 += e * e;
  }
  const double n = static_cast<double>(noisy.labels.size());
  const double var = m2 / n - (m / n) * (m / n);
  CHECK(var == doctest::Approx(0.49).epsilon(0.05));
}

TEST_CASE("task validation") {
  CHECK_THROWS_AS(generate(logistic_task(0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate(logistic_task(10, 1, 0.3)), std::invalid_argument);
  CHECK_THROWS_AS(generate_regression(logistic_task(10, 1)), std::invalid_argument);
  CHECK_THROWS_AS(generate_classification(regression_task(10, 1, 0.1)), std::invalid_argument);
  TaskSpec bad = logistic_task(10, 1);
  bad.alpha = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("planted optimum minimizes the conditional risk") {
  CHECK(logistic_pointwise_argmin(0.0) == 0.0);
  for (double theta : {30.0, -25.0, 12.5, 1e-3}) {
    CHECK(logistic_pointwise_argmin(theta) == doctest::Approx(theta).epsilon(1e-12));
  }
  std::vector<double> probes;
  auto rng = make_stream(77, Stream::inputs);
  for (int i = 0; i < 20; ++i) probes.push_back(rng.uniform());
  for (double r : {0.25, 3.25, 10.25}) {
    const auto rep = verify_optimality(logistic_task(1, 0, r), probes);
    CHECK(rep.rows.size() == 20);
    CHECK(rep.max_deviation <= 1e-6);
    CHECK(rep.theta_star_order == theta_star_order(r, 2));
  }
}

TEST_CASE("dataset files round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "itreg_synthetic_test";
  std::filesystem::create_directories(dir);
  const std::string prefix = (dir / "set").string();
  for (const auto& spec : {logistic_task(37, 5), regression_task(41, 6, 0.25)}) {
    const auto d = generate(spec);
    write_dataset(d, prefix);
    const auto back = read_dataset(prefix);
    CHECK(back.inputs == d.inputs);
    CHECK(back.labels == d.labels);
    CHECK(back.theta_star_values == d.theta_star_values);
    CHECK(back.spec.loss_kind == spec.loss_kind);
    CHECK(back.spec.r == spec.r);
    CHECK(back.spec.n == spec.n);
    CHECK(back.spec.seed == spec.seed);
    CHECK(back.spec.noise_sigma == spec.noise_sigma);
  }
  CHECK_THROWS(read_dataset((dir / "missing").string()));
  std::filesystem::remove_all(dir);
}
