#include "miq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "miq/errors.hpp"
#include "miq/rng.hpp"

namespace miq::est {

bool uses_qmc(EstimatorKind kind) {
  return kind == EstimatorKind::QMC || kind == EstimatorKind::MLQMC ||
         kind == EstimatorKind::MIQMC_FT || kind == EstimatorKind::MIQMC_TD;
}

bool single_level(EstimatorKind kind) {
  return kind == EstimatorKind::MC || kind == EstimatorKind::QMC;
}

mindex::DiffKind diff_kind(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MC:
    case EstimatorKind::QMC:
      return mindex::DiffKind::None;
    case EstimatorKind::MLMC:
    case EstimatorKind::MLQMC:
      return mindex::DiffKind::Diagonal;
    default:
      return mindex::DiffKind::Tensor;
  }
}

mindex::SetKind set_kind(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MIMC_FT:
    case EstimatorKind::MIQMC_FT:
      return mindex::SetKind::FullTensor;
    case EstimatorKind::MIMC_TD:
    case EstimatorKind::MIQMC_TD:
      return mindex::SetKind::TotalDegree;
    default:
      return mindex::SetKind::Multilevel;
  }
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MC: return "MC";
    case EstimatorKind::QMC: return "QMC";
    case EstimatorKind::MLMC: return "MLMC";
    case EstimatorKind::MLQMC: return "MLQMC";
    case EstimatorKind::MIMC_FT: return "MIMC-FT";
    case EstimatorKind::MIMC_TD: return "MIMC-TD";
    case EstimatorKind::MIQMC_FT: return "MIQMC-FT";
    case EstimatorKind::MIQMC_TD: return "MIQMC-TD";
  }
  throw std::logic_error("to_string: unknown estimator kind");
}

EstimatorKind parse_estimator_kind(const std::string& name) {
  for (EstimatorKind kind :
       {EstimatorKind::MC, EstimatorKind::QMC, EstimatorKind::MLMC,
        EstimatorKind::MLQMC, EstimatorKind::MIMC_FT, EstimatorKind::MIMC_TD,
        EstimatorKind::MIQMC_FT, EstimatorKind::MIQMC_TD})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown estimator kind: " + name);
}

double mc_mean(const McAccumulator& acc) {
  if (acc.n < 1) throw std::invalid_argument("mc_mean: need at least one sample");
  return acc.sum / double(acc.n);
}

double mc_sample_variance(const McAccumulator& acc) {
  if (acc.n < 2) throw std::invalid_argument("mc_sample_variance: need at least two samples");
  const double mean = acc.sum / double(acc.n);
  const double v = (acc.sum_sq - double(acc.n) * mean * mean) / double(acc.n - 1);
  return std::max(v, 0.0);
}

double mc_contribution(const McAccumulator& acc) {
  return mc_sample_variance(acc) / double(acc.n);
}

void QmcAccumulator::merge(const QmcAccumulator& other) {
  if (shift_sums.size() != other.shift_sums.size())
    throw std::invalid_argument("QmcAccumulator: shift count mismatch");
  points += other.points;
  for (std::size_t k = 0; k < shift_sums.size(); ++k)
    shift_sums[k] += other.shift_sums[k];
}

double QmcAccumulator::mean() const {
  double acc = 0.0;
  for (int k = 0; k < shifts(); ++k) acc += shift_mean(k);
  return acc / double(shifts());
}

double qmc_shift_variance(const QmcAccumulator& acc) {
  const int K = acc.shifts();
  if (K < 2) throw std::invalid_argument("qmc_shift_variance: need at least two shifts");
  if (acc.points < 1)
    throw std::invalid_argument("qmc_shift_variance: need at least one point per shift");
  const double mean = acc.mean();
  double ss = 0.0;
  for (int k = 0; k < K; ++k) {
    const double dev = acc.shift_mean(k) - mean;
    ss += dev * dev;
  }
  return ss / (double(K) * double(K - 1));
}

double IndexStats::mean() const { return qmc_mode ? qmc.mean() : mc_mean(mc); }

double IndexStats::contribution() const {
  return qmc_mode ? qmc_shift_variance(qmc) : mc_contribution(mc);
}

void IndexStats::merge(const IndexStats& other) {
  if (!(ell == other.ell) || qmc_mode != other.qmc_mode)
    throw std::invalid_argument("IndexStats: incompatible merge");
  mc.merge(other.mc);
  if (qmc_mode) qmc.merge(other.qmc);
  wall_seconds += other.wall_seconds;
}

std::vector<double> optimal_samples(std::span<const double> variances,
                                    std::span<const double> unit_costs,
                                    double eps, double eta) {
  if (!(eps > 0.0)) throw std::invalid_argument("optimal_samples: eps must be > 0");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("optimal_samples: eta must be in (0,1)");
  if (variances.size() != unit_costs.size())
    throw std::invalid_argument("optimal_samples: size mismatch");
  double lagrange = 0.0;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    if (variances[i] < 0.0)
      throw std::invalid_argument("optimal_samples: negative variance");
    if (!(unit_costs[i] > 0.0))
      throw std::invalid_argument("optimal_samples: costs must be > 0");
    lagrange += std::sqrt(variances[i] * unit_costs[i]);
  }
  std::vector<double> out(variances.size(), 0.0);
  const double scale = lagrange / (eta * eps * eps);
  for (std::size_t i = 0; i < variances.size(); ++i)
    out[i] = variances[i] > 0.0 ? scale * std::sqrt(variances[i] / unit_costs[i]) : 0.0;
  return out;
}

double bias_estimate(
    const std::function<double(const mindex::MultiIndex&)>& mean_of,
    const mindex::IndexSetSpec& spec, int L) {
  if (L < 1) throw std::invalid_argument("bias_estimate: L must be >= 1");
  double sum = 0.0;
  for (const mindex::MultiIndex& ell : mindex::boundary(spec, L)) sum += mean_of(ell);
  return std::abs(sum);
}

void RunConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("RunConfig: eps must be > 0");
  if (warmup_mc < 2) throw std::invalid_argument("RunConfig: MC warm-up must be >= 2");
  if (warmup_qmc < 1) throw std::invalid_argument("RunConfig: QMC warm-up must be >= 1");
  if (uses_qmc(kind) && shifts < 2)
    throw std::invalid_argument("RunConfig: QMC modes need at least 2 shifts");
  if (level_cap < 2) throw std::invalid_argument("RunConfig: level cap must be >= 2");
  if (workers < 1) throw std::invalid_argument("RunConfig: workers must be >= 1");
}

namespace {

constexpr double kTinyUniform = 0x1.0p-64;

void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& fn) {
  if (workers <= 1 || count < 2) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n_threads = int(std::min<std::int64_t>(workers, count));
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(n_threads));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int t = 0; t < n_threads; ++t) {
    const std::int64_t lo = count * t / n_threads;
    const std::int64_t hi = count * (t + 1) / n_threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

RngStream stream_for(std::uint64_t seed, StreamTag tag,
                     const mindex::MultiIndex& ell) {
  RngStream stream(seed);
  stream.absorb(std::uint64_t(tag));
  stream.absorb(std::uint64_t(ell.dim()));
  for (int i = 0; i < ell.dim(); ++i) stream.absorb(std::uint64_t(ell[i]));
  return stream;
}

std::vector<double> normal_from_stream(RngStream& stream, std::size_t s) {
  std::vector<double> xi(s);
  for (auto& v : xi) {
    double u = stream.next_uniform01();
    if (u <= 0.0) u = kTinyUniform;
    v = qmc::inv_normal_cdf(u);
  }
  return xi;
}

// Shared state of one adaptive run.
class Driver {
 public:
  Driver(const RunConfig& config, const mindex::Problem& problem)
      : config_(config),
        problem_(problem),
        qmc_mode_(uses_qmc(config.kind)),
        diff_(est::diff_kind(config.kind)) {
    config_.validate();
    spec_.kind = set_kind(config_.kind);
    spec_.d = problem_.index_dimension();
    if (qmc_mode_) {
      lattice_ = config_.lattice ? config_.lattice
                                 : std::shared_ptr<const qmc::LatticeRule>(
                                       &qmc::default_lattice(), [](auto*) {});
      if (config_.point_source == PointSource::Lattice &&
          lattice_->dimension() < problem_.random_dimension())
        throw std::invalid_argument(
            "run: generating vector dimension below the field truncation");
    }
  }

  EstimatorReport run() {
    const double eps = config_.eps;
    double eta = 0.5;
    int L = 0;
    double error = std::numeric_limits<double>::infinity();
    double vhat = 0.0, bhat = 0.0;
    bool converged = false;

    std::vector<mindex::MultiIndex> active;
    for (;;) {
      active = active_set(L);
      for (const auto& ell : active)
        if (!stats_.count(ell)) warm_up(ell);

      // statistical loop: reallocate, then double at the worst index until
      // the variance budget eta * eps^2 is met
      long long guard = 0;
      for (;;) {
        if (!qmc_mode_) {
          std::vector<double> variances, costs;
          variances.reserve(active.size());
          costs.reserve(active.size());
          for (const auto& ell : active) {
            variances.push_back(mc_sample_variance(stats_.at(ell).mc));
            costs.push_back(decision_cost(stats_.at(ell)));
          }
          const std::vector<double> target = optimal_samples(variances, costs, eps, eta);
          for (std::size_t i = 0; i < active.size(); ++i) {
            IndexStats& st = stats_.at(active[i]);
            const long long want = (long long)std::ceil(target[i]);
            if (want > st.mc.n) add_mc_samples(st, want - st.mc.n);
          }
        }
        vhat = 0.0;
        for (const auto& ell : active) vhat += stats_.at(ell).contribution();
        if (vhat <= eta * eps * eps) break;

        const mindex::MultiIndex* worst = nullptr;
        double worst_ratio = -1.0;
        for (const auto& ell : active) {
          const IndexStats& st = stats_.at(ell);
          const double ratio = st.contribution() / decision_cost(st);
          if (ratio > worst_ratio) {
            worst_ratio = ratio;
            worst = &ell;
          }
        }
        IndexStats& st = stats_.at(*worst);
        if (qmc_mode_)
          set_qmc_points(st, 2 * st.qmc.points);
        else
          add_mc_samples(st, st.mc.n);
        if (++guard > 100000)
          throw NumericError("run: statistical loop failed to converge", guard, vhat);
      }

      if (L >= 2) {
        bhat = estimate_bias(L);
        error = std::sqrt(vhat + bhat * bhat);
        if (error < eps) converged = true;
        if (bhat * bhat < 0.5 * eps * eps)
          eta = std::clamp(1.0 - bhat * bhat / (eps * eps), 0.5, 1.0 - 1e-9);
      }
      if (converged || L >= config_.level_cap) break;
      ++L;
    }

    return make_report(active, L, vhat, bhat, error, eta, converged);
  }

 private:
  std::vector<mindex::MultiIndex> active_set(int L) const {
    if (single_level(config_.kind))
      return {mindex::MultiIndex::diagonal(L, spec_.d)};
    return mindex::generate_index_set(spec_, L);
  }

  void warm_up(const mindex::MultiIndex& ell) {
    IndexStats st;
    st.ell = ell;
    st.qmc_mode = qmc_mode_;
    st.unit_cost = mindex::delta_cost(problem_, diff_, ell);
    order_.push_back(ell);
    if (qmc_mode_) {
      st.qmc.reset(config_.shifts);
      shifts_.emplace(ell, draw_shifts(ell));
      IndexStats& slot = stats_.emplace(ell, std::move(st)).first->second;
      set_qmc_points(slot, config_.warmup_qmc);
    } else {
      IndexStats& slot = stats_.emplace(ell, std::move(st)).first->second;
      add_mc_samples(slot, config_.warmup_mc);
    }
  }

  std::vector<std::vector<double>> draw_shifts(const mindex::MultiIndex& ell) const {
    std::vector<std::vector<double>> shifts(std::size_t(config_.shifts));
    for (int k = 0; k < config_.shifts; ++k) {
      RngStream stream = stream_for(config_.seed, StreamTag::ShiftDraw, ell);
      stream.absorb(std::uint64_t(k));
      shifts[std::size_t(k)] = qmc::draw_shift(stream, problem_.random_dimension());
    }
    return shifts;
  }

  void add_mc_samples(IndexStats& st, long long count) {
    if (count <= 0) return;
    const long long n0 = st.mc.n;
    std::vector<DeltaResult> results(static_cast<std::size_t>(count));
    parallel_for(count, config_.workers, [&](std::int64_t i) {
      RngStream stream = stream_for(config_.seed, StreamTag::McSample, st.ell);
      stream.absorb(std::uint64_t(n0 + i));
      const std::vector<double> xi = normal_from_stream(stream, problem_.random_dimension());
      results[std::size_t(i)] = evaluate_delta(st.ell, xi);
    });
    for (const DeltaResult& r : results) {
      st.mc.add(r.value);
      st.wall_seconds += r.wall_seconds;
      record_cost_fit(r);
    }
  }

  // (Re)computes the full point set of every shift at the given size; the
  // lattice points change with N, so nothing can be reused.
  void set_qmc_points(IndexStats& st, long long points) {
    const int K = config_.shifts;
    st.qmc.reset(K);
    st.qmc.points = points;
    const auto& shifts = shifts_.at(st.ell);
    std::vector<DeltaResult> results(static_cast<std::size_t>(K * points));
    parallel_for(K * points, config_.workers, [&](std::int64_t flat) {
      const int k = int(flat / points);
      const std::uint64_t n = std::uint64_t(flat % points);
      std::vector<double> xi;
      if (config_.point_source == PointSource::Lattice) {
        xi = qmc::qmc_normal_sample(*lattice_, std::uint64_t(points), n,
                                    shifts[std::size_t(k)],
                                    problem_.random_dimension());
      } else {
        RngStream stream = stream_for(config_.seed, StreamTag::IidPoint, st.ell);
        stream.absorb(std::uint64_t(k));
        stream.absorb(n);
        xi = normal_from_stream(stream, problem_.random_dimension());
      }
      results[std::size_t(flat)] = evaluate_delta(st.ell, xi);
    });
    for (std::int64_t flat = 0; flat < K * points; ++flat) {
      st.qmc.add(int(flat / points), results[std::size_t(flat)].value);
      st.wall_seconds += results[std::size_t(flat)].wall_seconds;
      record_cost_fit(results[std::size_t(flat)]);
    }
  }

  struct DeltaResult {
    double value = 0.0;
    double wall_seconds = 0.0;
    double model_cost = 0.0;
  };

  DeltaResult evaluate_delta(const mindex::MultiIndex& ell,
                             std::span<const double> xi) const {
    const mindex::DeltaSample sample = mindex::sample_delta(problem_, diff_, ell, xi);
    return {sample.delta, sample.wall_seconds, sample.model_cost};
  }

  // through-origin regression of sample time on cell count
  void record_cost_fit(const DeltaResult& r) {
    fit_tn_ += r.wall_seconds * r.model_cost;
    fit_nn_ += r.model_cost * r.model_cost;
  }

  // cost per sample driving allocation and doubling decisions; measured
  // time is opt-in, the cell-count model keeps runs reproducible
  double decision_cost(const IndexStats& st) const {
    if (config_.cost_model == CostModel::WallTime && st.samples() > 0 &&
        st.wall_seconds > 0.0)
      return st.wall_seconds / double(st.samples());
    return st.unit_cost;
  }

  double estimate_bias(int L) const {
    if (single_level(config_.kind)) {
      const auto cur = mindex::MultiIndex::diagonal(L, spec_.d);
      const auto prev = mindex::MultiIndex::diagonal(L - 1, spec_.d);
      return std::abs(stats_.at(cur).mean() - stats_.at(prev).mean());
    }
    return est::bias_estimate(
        [this](const mindex::MultiIndex& ell) {
          auto it = stats_.find(ell);
          if (it == stats_.end())
            throw std::logic_error("bias_estimate: missing boundary index " +
                                   ell.to_string());
          return it->second.mean();
        },
        spec_, L);
  }

  EstimatorReport make_report(const std::vector<mindex::MultiIndex>& active, int L,
                              double vhat, double bhat, double error, double eta,
                              bool converged) const {
    EstimatorReport report;
    report.kind = config_.kind;
    report.eps = config_.eps;
    report.seed = config_.seed;
    report.shifts = qmc_mode_ ? config_.shifts : 0;
    report.level = L;
    report.converged = converged;
    report.variance = vhat;
    report.bias = bhat;
    report.error = error;
    report.eta = eta;

    if (single_level(config_.kind)) {
      report.estimate = stats_.at(mindex::MultiIndex::diagonal(L, spec_.d)).mean();
    } else {
      double estimate = 0.0;
      for (const auto& ell : active) estimate += stats_.at(ell).mean();
      report.estimate = estimate;
    }

    std::vector<mindex::MultiIndex> rows = order_;
    std::sort(rows.begin(), rows.end());
    for (const auto& ell : rows) {
      const IndexStats& st = stats_.at(ell);
      IndexRow row;
      row.ell = ell;
      row.samples = st.samples();
      row.mean = st.mean();
      row.contribution = st.contribution();
      row.variance = st.qmc_mode ? row.contribution * double(config_.shifts)
                                 : mc_sample_variance(st.mc);
      row.unit_cost = st.unit_cost;
      row.wall_seconds = st.wall_seconds;
      report.table.push_back(std::move(row));

      const double factor = qmc_mode_ ? double(config_.shifts) : 1.0;
      report.total_samples += (long long)factor * st.samples();
      report.total_model_work += factor * double(st.samples()) * st.unit_cost;
      report.total_wall_seconds += st.wall_seconds;
    }
    report.seconds_per_cell = fit_nn_ > 0.0 ? fit_tn_ / fit_nn_ : 0.0;
    return report;
  }

  RunConfig config_;
  const mindex::Problem& problem_;
  bool qmc_mode_;
  mindex::DiffKind diff_;
  mindex::IndexSetSpec spec_;
  std::shared_ptr<const qmc::LatticeRule> lattice_;
  std::map<mindex::MultiIndex, IndexStats> stats_;
  std::map<mindex::MultiIndex, std::vector<std::vector<double>>> shifts_;
  std::vector<mindex::MultiIndex> order_;
  double fit_tn_ = 0.0;  // sum t*n over difference samples
  double fit_nn_ = 0.0;  // sum n*n
};

}  // namespace

EstimatorReport run_mimc(const RunConfig& config, const mindex::Problem& problem) {
  if (uses_qmc(config.kind))
    throw std::invalid_argument("run_mimc: config requests a QMC kind");
  return Driver(config, problem).run();
}

EstimatorReport run_miqmc(const RunConfig& config, const mindex::Problem& problem) {
  if (!uses_qmc(config.kind))
    throw std::invalid_argument("run_miqmc: config requests an MC kind");
  return Driver(config, problem).run();
}

EstimatorReport run(const RunConfig& config, const mindex::Problem& problem) {
  return Driver(config, problem).run();
}

EstimatorReport run(const RunConfig& config) {
  config.validate();
  auto basis = std::make_shared<field::KLBasis>(field::build_kl_basis(
      config.field_params, config.dimensions, config.n_quad, config.kl_rel_tol));
  DiffusionProblem problem(basis, config.qoi, config.m0, config.M, config.solver_tol);
  return run(config, problem);
}

void EstimatorReport::write_summary(std::ostream& out) const {
  out.precision(17);
  out << "report_version=1\n";
  out << "estimator=" << to_string(kind) << '\n';
  out << "eps=" << eps << '\n';
  out << "seed=" << seed << '\n';
  out << "shifts=" << shifts << '\n';
  out << "estimate=" << estimate << '\n';
  out << "variance=" << variance << '\n';
  out << "bias=" << bias << '\n';
  out << "error=" << error << '\n';
  out << "eta=" << eta << '\n';
  out << "level=" << level << '\n';
  out << "converged=" << (converged ? 1 : 0) << '\n';
  out << "total_samples=" << total_samples << '\n';
  out << "total_model_work=" << total_model_work << '\n';
  out << "total_wall_seconds=" << total_wall_seconds << '\n';
  out << "seconds_per_cell=" << seconds_per_cell << '\n';
}

void EstimatorReport::write_table_csv(std::ostream& out) const {
  out.precision(17);
  out << "index,samples,mean,variance,contribution,unit_cost,wall_seconds\n";
  for (const IndexRow& row : table)
    out << row.ell.to_string() << ',' << row.samples << ',' << row.mean << ','
        << row.variance << ',' << row.contribution << ',' << row.unit_cost << ','
        << row.wall_seconds << '\n';
}

}  // namespace miq::est
