#include "miq/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "miq/errors.hpp"
#include "miq/rng.hpp"

namespace miq::cli {

RateFit fit_rate(const std::vector<std::pair<double, double>>& eps_cost) {
  if (eps_cost.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 points");
  std::vector<double> x, y;
  for (const auto& [eps, cost] : eps_cost) {
    if (!(eps > 0.0) || !(cost > 0.0))
      throw std::invalid_argument("fit_rate: coordinates must be positive");
    x.push_back(std::log(eps));
    y.push_back(std::log(cost));
  }
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate input");
  const double slope = sxy / sxx;
  RateFit fit;
  fit.q = -slope;
  if (fit.q == 0.0) throw std::invalid_argument("fit_rate: degenerate input");
  fit.r = 1.0 / fit.q;
  fit.intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = y[i] - (fit.intercept + slope * x[i]);
    ss += resid * resid;
  }
  fit.residual = std::sqrt(ss / double(n));
  return fit;
}

std::uint64_t derive_seed(std::uint64_t root, std::size_t estimator_index,
                          std::size_t eps_index, int rep) {
  RngStream stream(root);
  stream.absorb(0x53574545ull);  // sweep domain tag
  stream.absorb(estimator_index);
  stream.absorb(eps_index);
  stream.absorb(std::uint64_t(rep));
  return stream.next_u64();
}

SweepResult run_sweep(const ExperimentPlan& plan) {
  namespace fs = std::filesystem;
  if (plan.eps.empty()) throw std::invalid_argument("run_sweep: empty tolerance list");
  if (plan.repetitions < 1)
    throw std::invalid_argument("run_sweep: repetitions must be >= 1");
  fs::create_directories(plan.out_dir);

  std::shared_ptr<const qmc::LatticeRule> lattice;
  if (!plan.lattice_path.empty()) {
    std::ifstream in(plan.lattice_path);
    if (!in) throw FormatError("run_sweep: cannot open lattice file " + plan.lattice_path);
    lattice = std::make_shared<qmc::LatticeRule>(qmc::load_generating_vector(in));
  }

  // one eigensolve serves every run of the plan; an optional cache file
  // skips it across processes
  std::shared_ptr<field::KLBasis> basis;
  if (!plan.basis_cache_path.empty()) {
    if (std::ifstream cached(plan.basis_cache_path); cached) {
      basis = std::make_shared<field::KLBasis>(field::KLBasis::load(cached));
      const field::MaternParams& p = basis->params();
      if (basis->dimension() != plan.dimensions ||
          basis->quadrature_nodes() != plan.n_quad ||
          p.correlation_length != plan.field.correlation_length ||
          p.variance != plan.field.variance ||
          p.smoothness != plan.field.smoothness ||
          basis->rel_tol() != plan.kl_rel_tol)
        throw FormatError("run_sweep: basis cache does not match the plan");
    }
  }
  if (!basis) {
    basis = std::make_shared<field::KLBasis>(field::build_kl_basis(
        plan.field, plan.dimensions, plan.n_quad, plan.kl_rel_tol));
    if (!plan.basis_cache_path.empty()) {
      std::ofstream out(plan.basis_cache_path);
      if (!out)
        throw FormatError("run_sweep: cannot write basis cache " + plan.basis_cache_path);
      basis->save(out);
    }
  }

  SweepResult result;
  for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
    for (std::size_t t = 0; t < plan.eps.size(); ++t) {
      for (int rep = 0; rep < plan.repetitions; ++rep) {
        const est::EstimatorKind kind = plan.estimators[e];
        est::RunConfig config =
            plan.run_config(kind, plan.eps[t], derive_seed(plan.seed, e, t, rep));
        config.lattice = lattice;
        DiffusionProblem problem(basis, plan.problem, plan.m0, plan.M,
                                 plan.solver_tol);
        const est::EstimatorReport report = est::run(config, problem);

        SweepRow row;
        row.estimator = est::to_string(kind);
        row.eps = plan.eps[t];
        row.rep = rep;
        row.estimate = report.estimate;
        row.error = report.error;
        row.model_work = report.total_model_work;
        row.wall_time = report.total_wall_seconds;
        row.level = report.level;
        row.total_samples = report.total_samples;
        row.converged = report.converged;
        if (!row.converged) result.exit_code = 2;
        result.rows.push_back(row);

        std::ostringstream name;
        name << "run_" << row.estimator << "_e" << t << "_r" << rep << ".report";
        std::ofstream rf(fs::path(plan.out_dir) / name.str());
        report.write_summary(rf);
        rf << '\n';
        report.write_table_csv(rf);
      }
    }
  }

  std::ofstream csv(fs::path(plan.out_dir) / "sweep.csv");
  write_sweep_csv(result.rows, csv);
  return result;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out.precision(17);
  out << "estimator,eps,rep,estimate,error,model_work,wall_time,L,total_samples,converged\n";
  for (const SweepRow& row : rows)
    out << row.estimator << ',' << row.eps << ',' << row.rep << ','
        << row.estimate << ',' << row.error << ',' << row.model_work << ','
        << row.wall_time << ',' << row.level << ',' << row.total_samples << ','
        << (row.converged ? 1 : 0) << '\n';
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("sweep csv: empty file");
  const std::string expected =
      "estimator,eps,rep,estimate,error,model_work,wall_time,L,total_samples,converged";
  if (line != expected) throw FormatError("sweep csv: unexpected header");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::vector<std::string> items;
    while (std::getline(ss, item, ',')) items.push_back(item);
    if (items.size() != 10)
      throw FormatError("sweep csv: bad row at line " + std::to_string(line_no));
    SweepRow row;
    try {
      row.estimator = items[0];
      row.eps = std::stod(items[1]);
      row.rep = std::stoi(items[2]);
      row.estimate = std::stod(items[3]);
      row.error = std::stod(items[4]);
      row.model_work = std::stod(items[5]);
      row.wall_time = std::stod(items[6]);
      row.level = std::stoi(items[7]);
      row.total_samples = std::stoll(items[8]);
      row.converged = items[9] == "1";
    } catch (const std::exception&) {
      throw FormatError("sweep csv: bad row at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<EstimatorRates> fit_sweep_rates(const std::vector<SweepRow>& rows) {
  // group by estimator, average cost over repetitions per tolerance
  struct Cell {
    double work = 0.0, time = 0.0;
    int count = 0;
  };
  std::map<std::string, std::map<double, Cell>> grouped;
  std::vector<std::string> order;
  for (const SweepRow& row : rows) {
    if (!grouped.count(row.estimator)) order.push_back(row.estimator);
    Cell& cell = grouped[row.estimator][row.eps];
    cell.work += row.model_work;
    cell.time += row.wall_time;
    cell.count += 1;
  }
  std::vector<EstimatorRates> out;
  for (const std::string& name : order) {
    std::vector<std::pair<double, double>> work_points, time_points;
    for (const auto& [eps, cell] : grouped[name]) {
      work_points.emplace_back(eps, cell.work / cell.count);
      time_points.emplace_back(eps, cell.time / cell.count);
    }
    EstimatorRates rates;
    rates.estimator = name;
    rates.points = int(work_points.size());
    rates.work = fit_rate(work_points);
    rates.time = fit_rate(time_points);
    out.push_back(std::move(rates));
  }
  return out;
}

void write_rates(const std::vector<EstimatorRates>& rates, std::ostream& out) {
  out.precision(6);
  out << "# power-law fits cost ~ eps^-q with r = 1/q; residuals are RMS in log cost\n";
  out << "estimator,points,q_work,r_work,resid_work,q_time,r_time,resid_time\n";
  for (const EstimatorRates& er : rates)
    out << er.estimator << ',' << er.points << ',' << er.work.q << ','
        << er.work.r << ',' << er.work.residual << ',' << er.time.q << ','
        << er.time.r << ',' << er.time.residual << '\n';
}

}  // namespace miq::cli
