#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "itreg/iterated_tikhonov.hpp"
#include "itreg/losses.hpp"
#include "itreg/synthetic.hpp"

namespace itreg {

std::vector<double> log_spaced(double lo, double hi, int count);

struct SweepConfig {
  TaskSpec task;                  ///< loss, alpha, noise and base seed; n and r come from below
  std::vector<double> r_values;   ///< empty: {task.r}
  std::vector<int> n_grid;
  std::vector<double> lambda_grid = log_spaced(1e-4, 1.0, 50);
  std::vector<int> t_list;
  int repetitions = 20;           ///< rep k uses seed task.seed + k
  double target_eps = 1e-6;
  int mc_samples = 10000;
  std::uint64_t mc_seed = 0;
  int threads = 1;
  TikhonovOptions solver{NewtonBackend::eigenbasis, 1e-3, 100};
  std::string output_path;        ///< empty: no file output

  void validate() const;
};

struct ExperimentRecord {
  LossKind loss_kind = LossKind::logistic;
  double r = 0.0;
  int alpha = 0;
  int t = 0;
  int n = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double excess_risk = 0.0;
  double std_error = 0.0;
  bool chosen = false;
  bool failed = false;  ///< solver error; excess_risk and std_error are NaN
  double wall_time_ms = 0.0;
};

inline constexpr const char* kRecordsHeader =
    "loss,r,alpha,t,n,lambda,seed,excess_risk,std_error,chosen,wall_time_ms";

/// Marks, within each (loss, r, alpha, t, n, seed) group, the successful
/// record with the smallest excess risk; equal risks go to the larger lambda.
void mark_chosen(std::vector<ExperimentRecord>& records);

/// Runs every (n, repetition) unit, sharing one kernel eigendecomposition
/// and one Monte Carlo cross kernel across all r and lambda, and one prox
/// trajectory per lambda across all t. Each unit's records are appended to
/// `output_path` as soon as the unit completes.
std::vector<ExperimentRecord> run_sweep(const SweepConfig& config, std::ostream* log = nullptr);

void write_record(std::ostream& out, const ExperimentRecord& rec);
void write_records(const std::string& path, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records(const std::string& path);

/// Records in a canonical order, for comparisons that must ignore the
/// order in which parallel units finished.
void sort_records(std::vector<ExperimentRecord>& records);

double theoretical_rate(double r, double alpha, int t);
double theoretical_lambda_rate(double r, double alpha, int t);

/// How the excess risk at each n is obtained from the lambda grid.
enum class RateSelection {
  /// Average each lambda's risk over the seeds, then take the lambda with the
  /// lowest average: one point per n.
  seed_mean,
  /// The per-seed chosen records: one point per (n, seed).
  per_seed,
};

std::string_view to_string(RateSelection selection);
RateSelection parse_rate_selection(std::string_view name);

struct RateKey {
  LossKind loss_kind = LossKind::logistic;
  double r = 0.0;
  int alpha = 0;
  int t = 0;
  auto operator<=>(const RateKey&) const = default;
};

struct RateFit {
  RateKey key;
  double gamma_hat = 0.0;
  double gamma_theory = 0.0;
  double intercept = 0.0;
  double residual_r2 = 0.0;
  int points = 0;
  int excluded_nonpositive = 0;
  RateSelection selection = RateSelection::seed_mean;
  std::optional<double> lambda_slope;  ///< OLS slope of log chosen lambda vs log n (>= 5 n values)
  double lambda_rate_theory = 0.0;
};

/// OLS of log(excess_risk) on log(n) for one group. Throws
/// std::invalid_argument with fewer than 3 distinct n left after dropping
/// nonpositive risks.
RateFit fit_rate(const std::vector<ExperimentRecord>& records, const RateKey& key,
                 RateSelection selection = RateSelection::seed_mean);
std::vector<RateFit> fit_all_rates(const std::vector<ExperimentRecord>& records,
                                   RateSelection selection = RateSelection::seed_mean);

std::string rate_table_text(const std::vector<RateFit>& fits);
std::string rate_table_json(const std::vector<RateFit>& fits);

}  // namespace itreg
