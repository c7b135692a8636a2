#ifndef MIQ_ESTIMATOR_HPP
#define MIQ_ESTIMATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "miq/field.hpp"
#include "miq/mindex.hpp"
#include "miq/problem.hpp"
#include "miq/qmc.hpp"

namespace miq::est {

// The eight estimator configurations: plain single-level sampling, the
// multilevel methods (diagonal index family), and the multi-index methods
// with full-tensor or total-degree index sets, each in a Monte Carlo and a
// randomly-shifted-lattice flavor.
enum class EstimatorKind { MC, QMC, MLMC, MLQMC, MIMC_FT, MIMC_TD, MIQMC_FT, MIQMC_TD };

bool uses_qmc(EstimatorKind kind);
bool single_level(EstimatorKind kind);
mindex::DiffKind diff_kind(EstimatorKind kind);
mindex::SetKind set_kind(EstimatorKind kind);
std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& name);

// Running moments of plain Monte Carlo samples of one difference.
struct McAccumulator {
  long long n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  void merge(const McAccumulator& other) {
    n += other.n;
    sum += other.sum;
    sum_sq += other.sum_sq;
  }
};

double mc_mean(const McAccumulator& acc);             // needs n >= 1
double mc_sample_variance(const McAccumulator& acc);  // unbiased, needs n >= 2
double mc_contribution(const McAccumulator& acc);     // V / N

// Per-shift sums of a randomly shifted lattice rule; every shift holds the
// same number of points.
struct QmcAccumulator {
  long long points = 0;           // N per shift
  std::vector<double> shift_sums; // one running sum per shift

  void reset(int shifts) {
    points = 0;
    shift_sums.assign(std::size_t(shifts), 0.0);
  }
  int shifts() const { return int(shift_sums.size()); }
  void add(int k, double v) { shift_sums[std::size_t(k)] += v; }
  void merge(const QmcAccumulator& other);
  double shift_mean(int k) const { return shift_sums[std::size_t(k)] / double(points); }
  double mean() const;  // average of the shift means
};

// Variance of the shift-averaged estimator: sample variance of the K shift
// means divided by K.  Needs K >= 2 points >= 1.
double qmc_shift_variance(const QmcAccumulator& acc);

// Per-index accumulator used by the drivers.
struct IndexStats {
  mindex::MultiIndex ell;
  bool qmc_mode = false;
  McAccumulator mc;
  QmcAccumulator qmc;
  double unit_cost = 0.0;     // model cost per difference sample, cell units
  double wall_seconds = 0.0;  // accumulated sampling time

  long long samples() const { return qmc_mode ? qmc.points : mc.n; }
  double mean() const;
  double contribution() const;  // V~ or V~*
  void merge(const IndexStats& other);
};

// Lagrange-multiplier sample allocation: N_l = (1/(eta eps^2))
// sqrt(V_l/W_l) sum_tau sqrt(V_tau W_tau), real-valued (callers round up).
// Zero-variance entries get zero samples.
std::vector<double> optimal_samples(std::span<const double> variances,
                                    std::span<const double> unit_costs,
                                    double eps, double eta);

// |sum of sample means over the boundary I(L) \ I(L-1)|.  Means are looked
// up with the provided accessor; a missing boundary index is an internal
// error.
double bias_estimate(
    const std::function<double(const mindex::MultiIndex&)>& mean_of,
    const mindex::IndexSetSpec& spec, int L);

// Source of the cubature points in the QMC drivers; IidUniform is a test
// hook that replaces the lattice points by i.i.d. uniforms.
enum class PointSource { Lattice, IidUniform };

enum class CostModel { CellCount, WallTime };

struct RunConfig {
  double eps = 1e-2;
  EstimatorKind kind = EstimatorKind::MIMC_TD;
  int warmup_mc = 32;   // warm-up samples per new index (MC modes)
  int warmup_qmc = 4;   // warm-up points per shift (QMC modes)
  int shifts = 16;      // K
  std::uint64_t seed = 0;
  int level_cap = 8;
  int workers = 1;

  // problem definition (used by run(); the two-argument drivers take any
  // Problem directly and ignore these)
  field::MaternParams field_params{1.0, 1.0, 2.5, 1};
  int dimensions = 3;
  int n_quad = 512;
  double kl_rel_tol = 1e-3;
  Qoi qoi = Qoi::CenterPressure;
  std::array<int, 3> m0 = {4, 4, 4};
  std::array<int, 3> M = {2, 2, 2};
  double solver_tol = 1e-10;

  std::shared_ptr<const qmc::LatticeRule> lattice;  // default: bundled vector
  PointSource point_source = PointSource::Lattice;
  CostModel cost_model = CostModel::CellCount;

  void validate() const;
};

struct IndexRow {
  mindex::MultiIndex ell;
  long long samples = 0;      // N_l (per shift in QMC mode)
  double mean = 0.0;          // estimated E[Delta G_l]
  double variance = 0.0;      // V_l (MC) or sample variance of shift means (QMC)
  double contribution = 0.0;  // V~_l or V~*_l
  double unit_cost = 0.0;     // W_l, cell units
  double wall_seconds = 0.0;
};

struct EstimatorReport {
  EstimatorKind kind = EstimatorKind::MIMC_TD;
  double eps = 0.0;
  std::uint64_t seed = 0;
  int shifts = 0;  // K, zero for MC kinds

  double estimate = 0.0;
  double variance = 0.0;  // V^
  double bias = 0.0;      // B^
  double error = std::numeric_limits<double>::infinity();
  double eta = 0.5;
  int level = 0;
  bool converged = false;

  std::vector<IndexRow> table;  // all sampled indices, sorted
  long long total_samples = 0;  // difference evaluations in the estimator
  double total_model_work = 0.0;
  double total_wall_seconds = 0.0;
  double seconds_per_cell = 0.0;  // fitted time model, report only

  // key=value summary block (schema "report 1")
  void write_summary(std::ostream& out) const;
  // per-index CSV table
  void write_table_csv(std::ostream& out) const;
};

// Adaptive Monte Carlo driver (also serves MC, MLMC via the corresponding
// kinds).  Deterministic given (config, seed) for any worker count.
EstimatorReport run_mimc(const RunConfig& config, const mindex::Problem& problem);

// Adaptive randomly-shifted-lattice driver (QMC, MLQMC, MIQMC kinds).
EstimatorReport run_miqmc(const RunConfig& config, const mindex::Problem& problem);

// Builds the lognormal diffusion problem described by the config and
// dispatches on the estimator kind.
EstimatorReport run(const RunConfig& config);
EstimatorReport run(const RunConfig& config, const mindex::Problem& problem);

}  // namespace miq::est

#endif
