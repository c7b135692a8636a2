#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "miq/config.hpp"
#include "miq/errors.hpp"
#include "miq/estimator.hpp"
#include "miq/rng.hpp"
#include "miq/sweep.hpp"

namespace {

int cmd_run(const std::string& config_path, std::uint64_t* seed_override,
            const std::string& out_override) {
  miq::cli::ExperimentPlan plan = miq::cli::parse_config_file(config_path);
  if (seed_override) plan.seed = *seed_override;
  if (!out_override.empty()) plan.out_dir = out_override;
  const miq::cli::SweepResult result = miq::cli::run_sweep(plan);
  std::cout << "rows=" << result.rows.size() << " out=" << plan.out_dir
            << "/sweep.csv\n";
  for (const auto& row : result.rows)
    if (!row.converged)
      std::cout << "non-converged: " << row.estimator << " eps=" << row.eps
                << " rep=" << row.rep << '\n';
  return result.exit_code;
}

int cmd_rates(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw miq::FormatError("rates: cannot open " + csv_path);
  const auto rows = miq::cli::read_sweep_csv(in);
  const auto rates = miq::cli::fit_sweep_rates(rows);
  miq::cli::write_rates(rates, std::cout);
  return 0;
}

int cmd_eigs(const std::string& field_name, double lambda, double sigma2,
             double nu, int d, int n_quad, double rel_tol,
             const std::string& out_path) {
  miq::field::MaternParams params;
  if (!field_name.empty())
    params = miq::cli::field_preset(field_name);
  else
    params = {lambda, sigma2, nu, 1};
  const miq::field::KLBasis basis =
      miq::field::build_kl_basis(params, d, n_quad, rel_tol);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw miq::FormatError("eigs: cannot open " + out_path);
    out = &file;
  }
  out->precision(17);
  *out << "r,theta\n";
  for (int r = 0; r < basis.term_count(); ++r)
    *out << (r + 1) << ',' << basis.eigenvalue(r) << '\n';
  std::cerr << "terms=" << basis.term_count() << '\n';
  return 0;
}

int cmd_telescope_check(int d, int L, int count, std::uint64_t seed, double tol,
                        const std::string& dump_path) {
  using miq::mindex::MultiIndex;
  miq::field::MaternParams params = miq::cli::field_preset("F1");
  auto basis = std::make_shared<miq::field::KLBasis>(
      miq::field::build_kl_basis(params, d, 256, 1e-3));
  miq::DiffusionProblem problem(basis, miq::Qoi::CenterPressure, {4, 4, 4},
                                {2, 2, 2});
  miq::mindex::IndexSetSpec spec{miq::mindex::SetKind::FullTensor, d, {}};

  double worst = 0.0;
  std::vector<double> xi(problem.random_dimension());
  for (int trial = 0; trial < count; ++trial) {
    miq::RngStream stream(seed);
    stream.absorb(0x7E1Eull).absorb(std::uint64_t(trial));
    for (auto& v : xi) {
      double u = stream.next_uniform01();
      if (u <= 0.0) u = 0x1.0p-64;
      v = miq::qmc::inv_normal_cdf(u);
    }
    double sum = 0.0;
    for (const MultiIndex& ell : miq::mindex::generate_index_set(spec, L))
      sum += miq::mindex::sample_delta(problem, miq::mindex::DiffKind::Tensor,
                                       ell, xi)
                 .delta;
    const double direct =
        problem.evaluate(MultiIndex::diagonal(L, d), xi).value;
    const double rel =
        std::abs(sum - direct) / std::max(std::abs(direct), 1e-300);
    worst = std::max(worst, rel);
  }
  if (!dump_path.empty()) {
    // debugging aid: pressure field of the last realization on the fine grid
    const miq::pde::Grid grid = problem.grid_for(MultiIndex::diagonal(L, d));
    const miq::pde::FieldSample k = miq::field::evaluate_field(*basis, xi, grid);
    const auto bc = std::make_shared<miq::pde::BoundarySpec>(
        miq::pde::BoundarySpec::all_dirichlet(0.0));
    const auto one = [](const std::array<double, 3>&) { return 1.0; };
    const miq::pde::PressureField p = miq::pde::solve_diffusion(grid, k, bc, one);
    std::ofstream out(dump_path);
    if (!out) throw miq::FormatError("telescope-check: cannot open " + dump_path);
    miq::pde::dump_csv(p, out);
  }
  std::cout << "telescope-check d=" << d << " L=" << L << " trials=" << count
            << " max_rel_err=" << worst << '\n';
  return worst <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-index (quasi-)Monte Carlo estimation for lognormal diffusion"};
  app.require_subcommand(1);

  // run
  std::string config_path, out_override;
  std::uint64_t seed_value = 0;
  bool have_seed = false;
  auto* run = app.add_subcommand("run", "run the tolerance sweep of a config file");
  run->add_option("config", config_path, "config file path")->required();
  run->add_option("--seed", seed_value, "override the seed root")
      ->each([&](const std::string&) { have_seed = true; });
  run->add_option("--out", out_override, "override the output directory");

  // rates
  std::string csv_path;
  auto* rates = app.add_subcommand("rates", "fit cost-vs-tolerance rates from a sweep CSV");
  rates->add_option("csv", csv_path, "aggregate sweep CSV")->required();

  // eigs
  std::string field_name, eigs_out;
  double lambda = 1.0, sigma2 = 1.0, nu = 0.5, rel_tol = 1e-3;
  int d = 1, n_quad = 512;
  auto* eigs = app.add_subcommand("eigs", "dump the truncated KL spectrum");
  eigs->add_option("--field", field_name, "preset F1, F2 or F3");
  eigs->add_option("--lambda", lambda, "correlation length");
  eigs->add_option("--sigma2", sigma2, "marginal variance");
  eigs->add_option("--nu", nu, "smoothness");
  eigs->add_option("--d", d, "spatial dimension")->check(CLI::Range(1, 3));
  eigs->add_option("--n-quad", n_quad, "quadrature nodes");
  eigs->add_option("--rel-tol", rel_tol, "truncation ratio");
  eigs->add_option("--out", eigs_out, "output CSV path (default stdout)");

  // telescope-check
  int tc_d = 2, tc_L = 1, tc_count = 5;
  std::uint64_t tc_seed = 0;
  double tc_tol = 1e-10;
  std::string tc_dump;
  auto* tc = app.add_subcommand("telescope-check",
                                "verify the telescoping identity on random fields");
  tc->add_option("--d", tc_d, "spatial dimension")->check(CLI::Range(2, 3));
  tc->add_option("--L", tc_L, "index set size parameter");
  tc->add_option("--count", tc_count, "number of random realizations");
  tc->add_option("--seed", tc_seed, "seed");
  tc->add_option("--tol", tc_tol, "relative tolerance");
  tc->add_option("--dump-pressure", tc_dump,
                 "write the last fine-grid pressure field to a CSV file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, have_seed ? &seed_value : nullptr, out_override);
    if (*rates) return cmd_rates(csv_path);
    if (*eigs)
      return cmd_eigs(field_name, lambda, sigma2, nu, d, n_quad, rel_tol, eigs_out);
    if (*tc) return cmd_telescope_check(tc_d, tc_L, tc_count, tc_seed, tc_tol, tc_dump);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
