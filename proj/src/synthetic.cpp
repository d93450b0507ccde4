#include "itreg/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "itreg/kernels.hpp"
#include "itreg/rng.hpp"

namespace itreg {

int TaskSpec::theta_star_order() const { return itreg::theta_star_order(r, alpha); }

void TaskSpec::validate() const {
  if (n < 1) throw std::invalid_argument("task: n must be >= 1");
  if (alpha < 2 || alpha % 2 != 0) throw std::invalid_argument("task: alpha must be a positive even integer");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("task: noise_sigma must be >= 0");
  (void)theta_star_order();
}

std::vector<double> draw_inputs(std::uint64_t seed, int n) {
  auto rng = make_stream(seed, Stream::inputs);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = rng.uniform();
  return x;
}

namespace {

Dataset planted(const TaskSpec& spec) {
  spec.validate();
  Dataset data;
  data.spec = spec;
  data.inputs = draw_inputs(spec.seed, spec.n);
  const KernelSpec optimum{spec.theta_star_order()};
  data.theta_star_values.reserve(data.inputs.size());
  for (double x : data.inputs) data.theta_star_values.push_back(spline_kernel(optimum, 0.0, x));
  return data;
}

}  // namespace

Dataset generate_classification(const TaskSpec& spec) {
  if (spec.loss_kind != LossKind::logistic) {
    throw std::invalid_argument("generate_classification: task loss must be logistic");
  }
  Dataset data = planted(spec);
  auto rng = make_stream(spec.seed, Stream::labels);
  data.labels.reserve(data.inputs.size());
  for (double ts : data.theta_star_values) {
    data.labels.push_back(rng.uniform() < sigmoid(ts) ? 1.0 : -1.0);
  }
  return data;
}

Dataset generate_regression(const TaskSpec& spec) {
  if (spec.loss_kind != LossKind::squared) {
    throw std::invalid_argument("generate_regression: task loss must be squared");
  }
  Dataset data = planted(spec);
  auto rng = make_stream(spec.seed, Stream::noise);
  data.labels.reserve(data.inputs.size());
  for (double ts : data.theta_star_values) {
    const double g = rng.normal();
    data.labels.push_back(spec.noise_sigma == 0.0 ? ts : ts + spec.noise_sigma * g);
  }
  return data;
}

Dataset generate(const TaskSpec& spec) {
  return spec.loss_kind == LossKind::logistic ? generate_classification(spec)
                                              : generate_regression(spec);
}

double logistic_pointwise_argmin(double theta) {
  // h'(z) = (1 - a) sigmoid(z) - a sigmoid(-z), with a and 1 - a each
  // computed without cancellation.
  const double a = sigmoid(theta);
  const double b = sigmoid(-theta);
  double z = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    const double sp = sigmoid(z);
    const double sn = sigmoid(-z);
    const double grad = b * sp - a * sn;
    const double curv = sp * sn;
    const double step = grad / curv;
    z -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

OptimalityReport verify_optimality(const TaskSpec& spec, std::span<const double> x_probe) {
  if (spec.loss_kind != LossKind::logistic) {
    throw std::invalid_argument("verify_optimality: logistic task expected");
  }
  spec.validate();
  OptimalityReport report;
  report.theta_star_order = spec.theta_star_order();
  const KernelSpec optimum{report.theta_star_order};
  for (double x : x_probe) {
    OptimalityRow row;
    row.x = x;
    row.theta_star = spline_kernel(optimum, 0.0, x);
    row.argmin = logistic_pointwise_argmin(row.theta_star);
    row.deviation = std::abs(row.argmin - row.theta_star);
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    report.rows.push_back(row);
  }
  return report;
}

void write_dataset(const Dataset& data, const std::string& prefix) {
  std::ofstream csv(prefix + ".csv");
  if (!csv) throw std::runtime_error("cannot open " + prefix + ".csv for writing");
  csv << std::setprecision(std::numeric_limits<double>::max_digits10);
  csv << "x,y,theta_star\n";
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    csv << data.inputs[i] << ',' << data.labels[i] << ',' << data.theta_star_values[i] << '\n';
  }

  std::ofstream meta(prefix + ".meta");
  if (!meta) throw std::runtime_error("cannot open " + prefix + ".meta for writing");
  meta << std::setprecision(std::numeric_limits<double>::max_digits10);
  meta << "loss=" << to_string(data.spec.loss_kind) << '\n'
       << "r=" << data.spec.r << '\n'
       << "alpha=" << data.spec.alpha << '\n'
       << "n=" << data.spec.n << '\n'
       << "seed=" << data.spec.seed << '\n'
       << "noise_sigma=" << data.spec.noise_sigma << '\n'
       << "theta_star_order=" << data.spec.theta_star_order() << '\n'
       << "rng=xoshiro256** seeded by splitmix64(seed, stream)\n";
}

Dataset read_dataset(const std::string& prefix) {
  std::ifstream meta(prefix + ".meta");
  if (!meta) throw std::runtime_error("cannot open " + prefix + ".meta");
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(meta, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(prefix + ".meta: missing key '" + key + "'");
    return it->second;
  };
  Dataset data;
  data.spec.loss_kind = parse_loss_kind(need("loss"));
  data.spec.r = std::stod(need("r"));
  data.spec.alpha = std::stoi(need("alpha"));
  data.spec.n = std::stoi(need("n"));
  data.spec.seed = std::stoull(need("seed"));
  data.spec.noise_sigma = std::stod(need("noise_sigma"));

  std::ifstream csv(prefix + ".csv");
  if (!csv) throw std::runtime_error("cannot open " + prefix + ".csv");
  std::string line;
  if (!std::getline(csv, line) || line != "x,y,theta_star") {
    throw std::runtime_error(prefix + ".csv: expected header 'x,y,theta_star'");
  }
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw std::runtime_error(prefix + ".csv: malformed row '" + line + "'");
    }
    data.inputs.push_back(std::stod(a));
    data.labels.push_back(std::stod(b));
    data.theta_star_values.push_back(std::stod(c));
  }
  if (data.inputs.size() != static_cast<std::size_t>(data.spec.n)) {
    throw std::runtime_error(prefix + ".csv: row count does not match n in metadata");
  }
  return data;
}

}  // namespace itreg
