#include "itreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "itreg/kernels.hpp"
#include "itreg/risk.hpp"
#include "itreg/summation.hpp"

namespace itreg {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.back() = hi;
  return out;
}

void SweepConfig::validate() const {
  if (n_grid.empty() || lambda_grid.empty() || t_list.empty()) {
    throw std::invalid_argument("sweep: n grid, lambda grid and t list must be nonempty");
  }
  if (repetitions < 1) throw std::invalid_argument("sweep: repetitions must be >= 1");
  if (threads < 1) throw std::invalid_argument("sweep: threads must be >= 1");
  if (mc_samples < 1) throw std::invalid_argument("sweep: mc_samples must be >= 1");
  if (!(target_eps > 0.0)) throw std::invalid_argument("sweep: target_eps must be positive");
  for (int n : n_grid) if (n < 1) throw std::invalid_argument("sweep: n must be >= 1");
  for (int t : t_list) if (t < 1) throw std::invalid_argument("sweep: t must be >= 1");
  for (double l : lambda_grid) if (!(l > 0.0)) throw std::invalid_argument("sweep: lambda must be positive");
  TaskSpec probe = task;
  for (double r : r_values.empty() ? std::vector<double>{task.r} : r_values) {
    probe.r = r;
    probe.validate();
  }
}

namespace {

using GroupKey = std::tuple<LossKind, double, int, int, int, std::uint64_t>;

GroupKey group_of(const ExperimentRecord& r) {
  return {r.loss_kind, r.r, r.alpha, r.t, r.n, r.seed};
}

}  // namespace

void mark_chosen(std::vector<ExperimentRecord>& records) {
  std::map<GroupKey, std::size_t> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    rec.chosen = false;
    if (rec.failed || std::isnan(rec.excess_risk)) continue;
    auto [it, inserted] = best.try_emplace(group_of(rec), i);
    if (inserted) continue;
    const auto& cur = records[it->second];
    if (rec.excess_risk < cur.excess_risk ||
        (rec.excess_risk == cur.excess_risk && rec.lambda > cur.lambda)) {
      it->second = i;
    }
  }
  for (const auto& [key, idx] : best) records[idx].chosen = true;
}

void sort_records(std::vector<ExperimentRecord>& records) {
  std::sort(records.begin(), records.end(), [](const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::tie(a.loss_kind, a.r, a.alpha, a.t, a.n, a.seed, a.lambda) <
           std::tie(b.loss_kind, b.r, b.alpha, b.t, b.n, b.seed, b.lambda);
  });
}

namespace {

using Clock = std::chrono::steady_clock;

struct Unit {
  int n;
  int rep;
};

std::vector<ExperimentRecord> run_unit(const SweepConfig& config, const Unit& unit) {
  const std::uint64_t seed = config.task.seed + static_cast<std::uint64_t>(unit.rep);
  const KernelSpec kspec{config.task.alpha};
  auto kernel = std::make_shared<const KernelMatrix>(kspec, draw_inputs(seed, unit.n));
  RiskEvaluator evaluator(kspec, kernel->inputs(), seed, config.mc_samples, config.mc_seed);

  const LossModel loss{config.task.loss_kind};
  const auto diag = kernel->diagonal();
  const GscRadius radius = gsc_radius(loss, diag);
  const bool enforce = default_enforce_prop2(loss.kind);
  const int t_max = *std::max_element(config.t_list.begin(), config.t_list.end());

  std::vector<ExperimentRecord> out;
  const auto r_values = config.r_values.empty() ? std::vector<double>{config.task.r} : config.r_values;
  for (double r : r_values) {
    TaskSpec task = config.task;
    task.r = r;
    task.n = unit.n;
    task.seed = seed;
    const Dataset data = generate(task);
    evaluator.set_task(task);
    const Eigen::Map<const Eigen::VectorXd> labels(data.labels.data(),
                                                   static_cast<Eigen::Index>(data.labels.size()));

    for (double lambda : config.lambda_grid) {
      ExperimentRecord base;
      base.loss_kind = task.loss_kind;
      base.r = r;
      base.alpha = task.alpha;
      base.n = unit.n;
      base.lambda = lambda;
      base.seed = seed;

      const auto start = Clock::now();
      std::vector<ExperimentRecord> cell;
      try {
        const auto schedule = make_schedule(lambda, t_max, config.target_eps, radius, enforce);
        const auto traj = run_iterated_tikhonov(loss, kernel, labels, schedule, config.solver);
        for (int t : config.t_list) {
          ExperimentRecord rec = base;
          rec.t = t;
          const RiskEstimate risk = evaluator.evaluate(traj.iterates[static_cast<std::size_t>(t)].coefficients);
          rec.excess_risk = risk.value;
          rec.std_error = risk.std_error;
          cell.push_back(rec);
        }
      } catch (const std::exception&) {
        cell.clear();
        for (int t : config.t_list) {
          ExperimentRecord rec = base;
          rec.t = t;
          rec.failed = true;
          rec.excess_risk = std::numeric_limits<double>::quiet_NaN();
          rec.std_error = std::numeric_limits<double>::quiet_NaN();
          cell.push_back(rec);
        }
      }
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      for (auto& rec : cell) {
        rec.wall_time_ms = ms;
        out.push_back(rec);
      }
    }
  }
  mark_chosen(out);
  return out;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep(const SweepConfig& config, std::ostream* log) {
  config.validate();

  // Largest n first so the expensive units do not end up alone at the tail.
  std::vector<Unit> units;
  std::vector<int> ns = config.n_grid;
  std::sort(ns.begin(), ns.end(), std::greater<>());
  for (int n : ns)
    for (int rep = 0; rep < config.repetitions; ++rep) units.push_back({n, rep});

  std::ofstream file;
  if (!config.output_path.empty()) {
    file.open(config.output_path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + config.output_path + " for writing");
    file << kRecordsHeader << '\n' << std::flush;
  }

  std::vector<ExperimentRecord> all;
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t done = 0;
  const auto sweep_start = Clock::now();

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      {
        std::lock_guard lock(writer);
        if (failure) return;
      }
      std::vector<ExperimentRecord> recs;
      try {
        recs = run_unit(config, units[i]);
      } catch (...) {
        std::lock_guard lock(writer);
        if (!failure) failure = std::current_exception();
        return;
      }
      std::lock_guard lock(writer);
      if (file.is_open()) {
        for (const auto& rec : recs) write_record(file, rec);
        file << std::flush;
      }
      all.insert(all.end(), recs.begin(), recs.end());
      ++done;
      if (log) {
        const double s = std::chrono::duration<double>(Clock::now() - sweep_start).count();
        *log << "[sweep] unit " << done << "/" << units.size() << " (n=" << units[i].n
             << ", rep=" << units[i].rep << ") done at " << std::fixed << std::setprecision(1) << s
             << " s" << std::defaultfloat << std::endl;
      }
    }
  };

  const int workers = std::min<int>(config.threads, static_cast<int>(units.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return all;
}

void write_record(std::ostream& out, const ExperimentRecord& rec) {
  std::ostringstream line;
  line << std::setprecision(std::numeric_limits<double>::max_digits10);
  line << to_string(rec.loss_kind) << ',' << rec.r << ',' << rec.alpha << ',' << rec.t << ','
       << rec.n << ',' << rec.lambda << ',' << rec.seed << ',';
  if (rec.failed) {
    line << "nan,nan,error,";
  } else {
    line << rec.excess_risk << ',' << rec.std_error << ',' << (rec.chosen ? 1 : 0) << ',';
  }
  line << std::setprecision(6) << rec.wall_time_ms << '\n';
  out << line.str();
}

void write_records(const std::string& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << kRecordsHeader << '\n';
  for (const auto& rec : records) write_record(out, rec);
}

std::vector<ExperimentRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader) {
    throw std::runtime_error(path + ": unexpected header");
  }
  std::vector<ExperimentRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    if (f.size() != 11) {
      // A crash mid-write can only leave a truncated final line.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 11 fields");
    }
    ExperimentRecord rec;
    rec.loss_kind = parse_loss_kind(f[0]);
    rec.r = std::stod(f[1]);
    rec.alpha = std::stoi(f[2]);
    rec.t = std::stoi(f[3]);
    rec.n = std::stoi(f[4]);
    rec.lambda = std::stod(f[5]);
    rec.seed = std::stoull(f[6]);
    rec.failed = f[9] == "error";
    rec.excess_risk = rec.failed ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[7]);
    rec.std_error = rec.failed ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[8]);
    rec.chosen = f[9] == "1";
    rec.wall_time_ms = std::stod(f[10]);
    out.push_back(rec);
  }
  return out;
}

namespace {

double effective_s(double r, int t) { return std::min(r, t - 0.5); }

void check_rate_args(double r, double alpha, int t) {
  if (!(r > 0.0) || !(alpha > 1.0) || t < 1) {
    throw std::invalid_argument("rate: need r > 0, alpha > 1, t >= 1");
  }
}

struct Ols {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Ols fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

double theoretical_rate(double r, double alpha, int t) {
  check_rate_args(r, alpha, t);
  const double a = alpha * (1.0 + 2.0 * effective_s(r, t));
  return a / (1.0 + a);
}

double theoretical_lambda_rate(double r, double alpha, int t) {
  check_rate_args(r, alpha, t);
  return alpha / (1.0 + alpha * (1.0 + 2.0 * effective_s(r, t)));
}

std::string_view to_string(RateSelection selection) {
  return selection == RateSelection::seed_mean ? "seed-mean" : "per-seed";
}

RateSelection parse_rate_selection(std::string_view name) {
  if (name == "seed-mean") return RateSelection::seed_mean;
  if (name == "per-seed") return RateSelection::per_seed;
  throw std::invalid_argument("unknown rate selection '" + std::string(name) +
                              "' (expected seed-mean or per-seed)");
}

namespace {

bool in_group(const ExperimentRecord& rec, const RateKey& key) {
  return !rec.failed && rec.loss_kind == key.loss_kind && rec.r == key.r && rec.alpha == key.alpha &&
         rec.t == key.t;
}

struct RatePoint {
  int n;
  double risk;
  double lambda;
};

std::vector<RatePoint> per_seed_points(const std::vector<ExperimentRecord>& records, const RateKey& key) {
  std::vector<RatePoint> pts;
  for (const auto& rec : records) {
    if (rec.chosen && in_group(rec, key)) pts.push_back({rec.n, rec.excess_risk, rec.lambda});
  }
  return pts;
}

std::vector<RatePoint> seed_mean_points(const std::vector<ExperimentRecord>& records, const RateKey& key) {
  // (n, lambda) -> risks over seeds, summed in seed order.
  std::map<std::pair<int, double>, std::map<std::uint64_t, double>> cells;
  for (const auto& rec : records) {
    if (in_group(rec, key)) cells[{rec.n, rec.lambda}][rec.seed] = rec.excess_risk;
  }
  std::map<int, RatePoint> best;
  for (const auto& [cell, by_seed] : cells) {
    std::vector<double> v;
    for (const auto& [seed, risk] : by_seed) v.push_back(risk);
    const double mean = pairwise_sum(v) / static_cast<double>(v.size());
    const auto [n, lambda] = cell;
    auto [it, inserted] = best.try_emplace(n, RatePoint{n, mean, lambda});
    // Cells are visited in increasing lambda, so <= moves ties to the larger lambda.
    if (!inserted && mean <= it->second.risk) it->second = {n, mean, lambda};
  }
  std::vector<RatePoint> pts;
  for (const auto& [n, p] : best) pts.push_back(p);
  return pts;
}

}  // namespace

RateFit fit_rate(const std::vector<ExperimentRecord>& records, const RateKey& key,
                 RateSelection selection) {
  RateFit fit;
  fit.key = key;
  fit.selection = selection;
  fit.gamma_theory = theoretical_rate(key.r, key.alpha, key.t);
  fit.lambda_rate_theory = theoretical_lambda_rate(key.r, key.alpha, key.t);

  const auto pts = selection == RateSelection::seed_mean ? seed_mean_points(records, key)
                                                         : per_seed_points(records, key);
  std::vector<double> log_n, log_risk, log_lambda;
  std::set<int> distinct_n;
  for (const auto& p : pts) {
    if (!(p.risk > 0.0)) {
      ++fit.excluded_nonpositive;
      continue;
    }
    log_n.push_back(std::log(static_cast<double>(p.n)));
    log_risk.push_back(std::log(p.risk));
    log_lambda.push_back(std::log(p.lambda));
    distinct_n.insert(p.n);
  }
  if (distinct_n.size() < 3) {
    throw std::invalid_argument("fit_rate: fewer than 3 distinct n with positive excess risk");
  }
  const Ols risk = ols(log_n, log_risk);
  fit.gamma_hat = -risk.slope;
  fit.intercept = risk.intercept;
  fit.residual_r2 = risk.r2;
  fit.points = static_cast<int>(log_n.size());
  if (distinct_n.size() >= 5) fit.lambda_slope = ols(log_n, log_lambda).slope;
  return fit;
}

std::vector<RateFit> fit_all_rates(const std::vector<ExperimentRecord>& records,
                                   RateSelection selection) {
  std::set<RateKey> keys;
  for (const auto& rec : records) keys.insert({rec.loss_kind, rec.r, rec.alpha, rec.t});
  std::vector<RateFit> fits;
  for (const auto& key : keys) fits.push_back(fit_rate(records, key, selection));
  return fits;
}

std::string rate_table_text(const std::vector<RateFit>& fits) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "loss" << std::setw(8) << "r" << std::setw(7) << "alpha"
      << std::setw(5) << "t" << std::setw(11) << "gamma_hat" << std::setw(14) << "gamma_theory"
      << std::setw(8) << "r2" << std::setw(8) << "points" << std::setw(10) << "excluded"
      << std::setw(14) << "lambda_slope" << "lambda_theory\n";
  out << std::fixed;
  for (const auto& f : fits) {
    out << std::setw(10) << to_string(f.key.loss_kind) << std::setw(8) << std::setprecision(2)
        << f.key.r << std::setw(7) << f.key.alpha << std::setw(5) << f.key.t << std::setw(11)
        << std::setprecision(3) << f.gamma_hat << std::setw(14) << f.gamma_theory << std::setw(8)
        << f.residual_r2 << std::setw(8) << f.points << std::setw(10) << f.excluded_nonpositive
        << std::setw(14);
    if (f.lambda_slope) {
      out << *f.lambda_slope;
    } else {
      out << "-";
    }
    out << -f.lambda_rate_theory << '\n';
  }
  return out.str();
}

std::string rate_table_json(const std::vector<RateFit>& fits) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : fits) {
    nlohmann::json row{{"loss", std::string(to_string(f.key.loss_kind))},
                       {"r", f.key.r},
                       {"alpha", f.key.alpha},
                       {"t", f.key.t},
                       {"selection", std::string(to_string(f.selection))},
                       {"gamma_hat", f.gamma_hat},
                       {"gamma_theory", f.gamma_theory},
                       {"intercept", f.intercept},
                       {"residual_r2", f.residual_r2},
                       {"points", f.points},
                       {"excluded_nonpositive", f.excluded_nonpositive},
                       {"lambda_rate_theory", f.lambda_rate_theory}};
    row["lambda_slope"] = f.lambda_slope ? nlohmann::json(*f.lambda_slope) : nlohmann::json(nullptr);
    doc.push_back(std::move(row));
  }
  return doc.dump(2);
}

}  // namespace itreg
