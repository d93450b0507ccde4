// Command-line front end: dataset generation, single fits, sweeps, rate
// tables and the spectral-filter checks.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itreg/harness.hpp"
#include "itreg/iterated_tikhonov.hpp"
#include "itreg/kernels.hpp"
#include "itreg/risk.hpp"
#include "itreg/simd.hpp"
#include "itreg/spectral_oracle.hpp"
#include "itreg/synthetic.hpp"

using namespace itreg;

namespace {

struct TaskFlags {
  std::string loss = "logistic";
  double r = 0.25;
  int alpha = 2;
  int n = 256;
  std::uint64_t seed = 0;
  double noise = 0.5;

  TaskSpec spec() const {
    TaskSpec s;
    s.loss_kind = parse_loss_kind(loss);
    s.r = r;
    s.alpha = alpha;
    s.n = n;
    s.seed = seed;
    s.noise_sigma = s.loss_kind == LossKind::squared ? noise : 0.0;
    return s;
  }
};

void add_task_flags(CLI::App* cmd, TaskFlags& f, bool with_r = true) {
  cmd->add_option("--loss", f.loss, "logistic or squared")
      ->check(CLI::IsMember({"logistic", "squared"}))
      ->capture_default_str();
  if (with_r) cmd->add_option("--r", f.r, "source parameter of the planted optimum")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "capacity (kernel order), even")->capture_default_str();
  cmd->add_option("--n", f.n, "sample size")->capture_default_str();
  cmd->add_option("--seed", f.seed, "dataset seed")->capture_default_str();
  cmd->add_option("--noise", f.noise, "Gaussian noise level (squared loss)")->capture_default_str();
}

NewtonBackend parse_backend(const std::string& name) {
  return name == "lu" ? NewtonBackend::coefficient_lu : NewtonBackend::eigenbasis;
}

int run_generate(const TaskFlags& f, const std::string& out) {
  const Dataset data = generate(f.spec());
  write_dataset(data, out);
  std::cout << "wrote " << out << ".csv and " << out << ".meta (theta* order "
            << data.spec.theta_star_order() << ")\n";
  return 0;
}

int run_fit(const TaskFlags& f, double lambda, int t, double eps, int mc_samples,
            const std::string& backend, double rank_tol, const std::string& coef_out) {
  const TaskSpec task = f.spec();
  const Dataset data = generate(task);
  const KernelSpec kspec{task.alpha};
  auto kernel = std::make_shared<const KernelMatrix>(kspec, data.inputs);
  const LossModel loss{task.loss_kind};
  const Eigen::Map<const Eigen::VectorXd> labels(data.labels.data(), task.n);
  const auto schedule = make_schedule(lambda, t, eps, gsc_radius(loss, kernel->diagonal()),
                                      default_enforce_prop2(loss.kind));
  const auto traj = run_iterated_tikhonov(loss, kernel, labels, schedule,
                                          {parse_backend(backend), rank_tol, 100});
  const Estimator& est = traj.iterates.back();
  const RiskEstimate risk = excess_risk(est.coefficients, kspec, kernel->inputs(), task, mc_samples);

  std::cout << std::setprecision(10);
  std::cout << "loss=" << to_string(task.loss_kind) << " r=" << task.r << " alpha=" << task.alpha
            << " n=" << task.n << " lambda=" << lambda << " t=" << t << '\n';
  for (std::size_t k = 0; k < traj.achieved_decrements.size(); ++k) {
    std::cout << "step " << k + 1 << ": decrement " << traj.achieved_decrements[k] << " <= "
              << schedule.schedule[k] << " after " << traj.newton_iterations[k]
              << " Newton iterations\n";
  }
  std::cout << "excess_risk=" << risk.value << " std_error=" << risk.std_error
            << " mc_samples=" << risk.mc_samples << '\n';
  std::cout << "empirical_risk=" << empirical_risk(loss, est, labels)
            << " gradient_norm=" << empirical_gradient_norm(loss, est, labels) << '\n';

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!coef_out.empty()) {
    file.open(coef_out);
    if (!file) throw std::runtime_error("cannot open " + coef_out);
    out = &file;
  } else {
    std::cout << "coefficients:\n";
  }
  *out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < est.coefficients.size(); ++i) *out << est.coefficients[i] << '\n';
  return 0;
}

int run_rate(const std::string& in, const std::string& json_out, const std::string& selection) {
  const auto records = read_records(in);
  const auto fits = fit_all_rates(records, parse_rate_selection(selection));
  std::cout << rate_table_text(fits);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw std::runtime_error("cannot open " + json_out);
    out << rate_table_json(fits) << '\n';
  }
  return 0;
}

int run_oracle_check(const TaskFlags& f, const std::vector<double>& lambdas,
                     const std::vector<int>& t_list, double tol) {
  TaskFlags sq = f;
  sq.loss = "squared";
  const TaskSpec task = sq.spec();
  const Dataset data = generate(task);
  auto kernel = std::make_shared<const KernelMatrix>(KernelSpec{task.alpha}, data.inputs);
  const Eigen::Map<const Eigen::VectorXd> labels(data.labels.data(), task.n);
  const LossModel loss{LossKind::squared};
  double worst = 0.0;
  std::cout << std::setprecision(4) << std::scientific;
  for (double lambda : lambdas) {
    for (int t : t_list) {
      ProxRunConfig cfg{lambda, t, tol, std::vector<double>(static_cast<std::size_t>(t), tol)};
      const auto traj = run_iterated_tikhonov(loss, kernel, labels, cfg);
      const Estimator oracle = filter_apply({t, lambda}, kernel, labels);
      const double rel = (traj.iterates.back().coefficients - oracle.coefficients).norm() /
                         oracle.coefficients.norm();
      worst = std::max(worst, rel);
      std::cout << "lambda=" << lambda << " t=" << t << " relative_l2_error=" << rel << '\n';
    }
  }
  std::cout << "max_relative_l2_error=" << worst << '\n';
  return 0;
}

int run_qualification(const std::vector<int>& t_list, const std::vector<double>& nus,
                      const std::vector<double>& lambdas, int grid_points, double sigma_max) {
  const auto sigmas = log_spaced(1e-12, sigma_max, grid_points);
  bool all_ok = true;
  std::cout << std::setprecision(6) << std::scientific;
  for (int t : t_list) {
    for (double nu : nus) {
      const auto report = qualification_check(t, nu, lambdas, sigmas);
      for (const auto& row : report.rows) {
        std::cout << "t=" << t << " nu=" << nu << " lambda=" << row.lambda
                  << " sup=" << row.numeric_sup << " at sigma=" << row.argmax_sigma
                  << " bound=" << row.analytic_bound << (row.violated ? " VIOLATED" : " ok") << '\n';
      }
      all_ok = all_ok && report.ok();
    }
  }
  std::cout << (all_ok ? "all bounds hold\n" : "bound violated\n");
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated Tikhonov regularization in RKHS: experiments and checks"};
  app.require_subcommand(1);

  TaskFlags gen_flags;
  std::string gen_out = "dataset";
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset (<out>.csv, <out>.meta)");
  add_task_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "output prefix")->capture_default_str();

  TaskFlags fit_flags;
  double fit_lambda = 1e-2, fit_eps = 1e-6, fit_rank_tol = 0.0;
  int fit_t = 1, fit_mc = kDefaultMcSamples;
  std::string fit_backend = "lu", fit_out;
  auto* fit = app.add_subcommand("fit", "one (lambda, t) run: decrements, risk and coefficients");
  add_task_flags(fit, fit_flags);
  fit->add_option("--lambda", fit_lambda)->capture_default_str();
  fit->add_option("--t", fit_t, "number of proximal steps")->capture_default_str();
  fit->add_option("--eps", fit_eps, "target accuracy")->capture_default_str();
  fit->add_option("--mc-samples", fit_mc)->capture_default_str();
  fit->add_option("--backend", fit_backend, "Newton solver: lu or eigen")
      ->check(CLI::IsMember({"lu", "eigen"}))
      ->capture_default_str();
  fit->add_option("--rank-tol", fit_rank_tol, "eigenbasis truncation (eigen backend)")->capture_default_str();
  fit->add_option("--out", fit_out, "write coefficients here instead of stdout");

  TaskFlags sw_flags;
  std::vector<double> sw_r{0.25};
  std::vector<int> sw_t{1, 3, 8};
  std::vector<int> sw_n{64, 128, 256, 512, 1024, 2048};
  double lmin = 1e-4, lmax = 1.0;
  int lcount = 50, reps = 20, sw_mc = kDefaultMcSamples, threads = 1;
  double sw_eps = 1e-6, sw_rank_tol = 1e-3;
  std::string sw_out = "records.csv", sw_backend = "eigen";
  auto* sw = app.add_subcommand("sweep", "grid over (r, n, lambda, t, seed) to a records file");
  add_task_flags(sw, sw_flags, false);
  sw->add_option("--r", sw_r, "one or more source parameters")->delimiter(',')->capture_default_str();
  sw->add_option("--t-list", sw_t)->delimiter(',')->capture_default_str();
  sw->add_option("--n-grid", sw_n)->delimiter(',')->capture_default_str();
  sw->add_option("--lambda-min", lmin)->capture_default_str();
  sw->add_option("--lambda-max", lmax)->capture_default_str();
  sw->add_option("--lambda-count", lcount)->capture_default_str();
  sw->add_option("--reps", reps)->capture_default_str();
  sw->add_option("--eps", sw_eps, "target accuracy of the final iterate")->capture_default_str();
  sw->add_option("--mc-samples", sw_mc)->capture_default_str();
  sw->add_option("--threads", threads)->capture_default_str();
  sw->add_option("--backend", sw_backend, "Newton solver: lu or eigen")
      ->check(CLI::IsMember({"lu", "eigen"}))
      ->capture_default_str();
  sw->add_option("--rank-tol", sw_rank_tol, "eigenbasis truncation")->capture_default_str();
  sw->add_option("--out", sw_out, "records file")->capture_default_str();

  std::string rate_in = "records.csv", rate_json, rate_selection = "seed-mean";
  auto* rate = app.add_subcommand("rate", "fit learning-rate exponents from a records file");
  rate->add_option("--in", rate_in, "records file")->capture_default_str();
  rate->add_option("--out", rate_json, "also write the table as JSON");
  rate->add_option("--selection", rate_selection,
                   "seed-mean: best lambda of the seed-averaged risk; per-seed: chosen records")
      ->check(CLI::IsMember({"seed-mean", "per-seed"}))
      ->capture_default_str();

  TaskFlags oc_flags;
  oc_flags.n = 200;
  std::vector<double> oc_lambdas{1e-3, 1e-2, 1e-1};
  std::vector<int> oc_t{1, 3, 8};
  double oc_tol = 1e-10;
  auto* oc = app.add_subcommand("oracle-check", "squared loss: proximal path vs spectral filter");
  add_task_flags(oc, oc_flags);
  oc->add_option("--lambda-list", oc_lambdas)->delimiter(',')->capture_default_str();
  oc->add_option("--t-list", oc_t)->delimiter(',')->capture_default_str();
  oc->add_option("--tol", oc_tol, "inner Newton tolerance")->capture_default_str();

  std::vector<int> q_t{1, 2, 4, 8};
  std::vector<double> q_nu{0.5};
  std::vector<double> q_lambdas{1e-3, 1e-2, 1e-1};
  int q_points = 100000;
  double q_sigma_max = 1.0;
  auto* qual = app.add_subcommand("qualification", "filter residual sup vs its analytic bound");
  qual->add_option("--t-list", q_t)->delimiter(',')->capture_default_str();
  qual->add_option("--nu", q_nu)->delimiter(',')->capture_default_str();
  qual->add_option("--lambda-list", q_lambdas)->delimiter(',')->capture_default_str();
  qual->add_option("--grid-points", q_points)->capture_default_str();
  qual->add_option("--sigma-max", q_sigma_max)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_generate(gen_flags, gen_out);
    if (fit->parsed()) {
      return run_fit(fit_flags, fit_lambda, fit_t, fit_eps, fit_mc, fit_backend, fit_rank_tol, fit_out);
    }
    if (sw->parsed()) {
      SweepConfig cfg;
      cfg.task = sw_flags.spec();
      cfg.r_values = sw_r;
      cfg.n_grid = sw_n;
      cfg.lambda_grid = log_spaced(lmin, lmax, lcount);
      cfg.t_list = sw_t;
      cfg.repetitions = reps;
      cfg.target_eps = sw_eps;
      cfg.mc_samples = sw_mc;
      cfg.threads = threads;
      cfg.solver = {parse_backend(sw_backend), sw_rank_tol, 100};
      cfg.output_path = sw_out;
      std::cerr << "simd: " << simd::isa_name(simd::active_isa()) << '\n';
      const auto records = run_sweep(cfg, &std::cerr);
      std::size_t failed = 0;
      for (const auto& rec : records) failed += rec.failed;
      std::cout << "wrote " << records.size() << " records to " << sw_out << " (" << failed
                << " failed)\n";
      return 0;
    }
    if (rate->parsed()) return run_rate(rate_in, rate_json, rate_selection);
    if (oc->parsed()) return run_oracle_check(oc_flags, oc_lambdas, oc_t, oc_tol);
    if (qual->parsed()) return run_qualification(q_t, q_nu, q_lambdas, q_points, q_sigma_max);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
