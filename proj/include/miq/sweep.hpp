#ifndef MIQ_SWEEP_HPP
#define MIQ_SWEEP_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "miq/config.hpp"

namespace miq::cli {

// Power-law fit eps ~ c * cost^(-r).  We report q with cost ~ eps^(-q)
// (least squares of log cost on log eps) and r = 1/q.
struct RateFit {
  double q = 0.0;
  double r = 0.0;
  double intercept = 0.0;  // log cost at eps = 1
  double residual = 0.0;   // RMS residual of log cost
};

// Needs >= 3 points with positive coordinates; throws on degenerate
// (constant) input.
RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_cost);

struct SweepRow {
  std::string estimator;
  double eps = 0.0;
  int rep = 0;
  double estimate = 0.0;
  double error = 0.0;
  double model_work = 0.0;
  double wall_time = 0.0;
  int level = 0;
  long long total_samples = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int exit_code = 0;  // 2 when any run did not converge
};

// Runs every (estimator, eps, repetition) of the plan, writes the aggregate
// CSV (sweep.csv) and one report file per run into the output directory.
SweepResult run_sweep(const ExperimentPlan& plan);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

// Per-estimator rate fits of mean cost against tolerance, from aggregate
// sweep rows.
struct EstimatorRates {
  std::string estimator;
  int points = 0;
  RateFit work;
  RateFit time;
};

std::vector<EstimatorRates> fit_sweep_rates(const std::vector<SweepRow>& rows);
void write_rates(const std::vector<EstimatorRates>& rates, std::ostream& out);

// Deterministic per-run seed derived from the plan seed root.
std::uint64_t derive_seed(std::uint64_t root, std::size_t estimator_index,
                          std::size_t eps_index, int rep);

}  // namespace miq::cli

#endif
