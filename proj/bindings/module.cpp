#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "miq/config.hpp"
#include "miq/estimator.hpp"
#include "miq/sweep.hpp"

namespace py = pybind11;
using namespace miq;

namespace {

mindex::MultiIndex to_index(const std::vector<int>& comps) {
  return mindex::MultiIndex(comps);
}

std::vector<int> from_index(const mindex::MultiIndex& idx) {
  return {idx.components().begin(), idx.components().end()};
}

mindex::IndexSetSpec make_spec(const std::string& kind, int d,
                               const std::vector<double>& weights) {
  mindex::IndexSetSpec spec;
  if (kind == "FT")
    spec.kind = mindex::SetKind::FullTensor;
  else if (kind == "TD")
    spec.kind = mindex::SetKind::TotalDegree;
  else if (kind == "WTD")
    spec.kind = mindex::SetKind::WeightedTotalDegree;
  else if (kind == "ML")
    spec.kind = mindex::SetKind::Multilevel;
  else
    throw std::invalid_argument("index set kind must be FT, TD, WTD or ML");
  spec.d = d;
  spec.weights = weights;
  return spec;
}

py::dict report_to_dict(const est::EstimatorReport& report) {
  py::dict out;
  out["estimator"] = est::to_string(report.kind);
  out["eps"] = report.eps;
  out["seed"] = report.seed;
  out["shifts"] = report.shifts;
  out["estimate"] = report.estimate;
  out["variance"] = report.variance;
  out["bias"] = report.bias;
  out["error"] = report.error;
  out["eta"] = report.eta;
  out["level"] = report.level;
  out["converged"] = report.converged;
  out["total_samples"] = report.total_samples;
  out["total_model_work"] = report.total_model_work;
  out["total_wall_seconds"] = report.total_wall_seconds;
  py::list table;
  for (const auto& row : report.table) {
    py::dict r;
    r["index"] = from_index(row.ell);
    r["samples"] = row.samples;
    r["mean"] = row.mean;
    r["variance"] = row.variance;
    r["contribution"] = row.contribution;
    r["unit_cost"] = row.unit_cost;
    r["wall_seconds"] = row.wall_seconds;
    table.append(r);
  }
  out["table"] = table;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-index (quasi-)Monte Carlo estimation for elliptic PDEs "
            "with lognormal coefficients";

  // qmc
  py::class_<qmc::LatticeRule, std::shared_ptr<qmc::LatticeRule>>(m, "LatticeRule")
      .def(py::init<std::vector<std::uint64_t>>(), py::arg("z"))
      .def_property_readonly("dimension", &qmc::LatticeRule::dimension)
      .def("component", &qmc::LatticeRule::component, py::arg("j"));
  m.def("load_generating_vector", [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return qmc::load_generating_vector(in);
  });
  m.def("default_lattice", [] { return qmc::default_lattice(); },
        py::return_value_policy::reference);
  m.def("lattice_point", &qmc::lattice_point, py::arg("rule"), py::arg("N"),
        py::arg("n"), py::arg("s"));
  m.def("apply_shift", [](const std::vector<double>& t, const std::vector<double>& shift) {
    return qmc::apply_shift(t, shift);
  });
  m.def("inv_normal_cdf", &qmc::inv_normal_cdf, py::arg("u"));
  m.def("qmc_normal_sample",
        [](const qmc::LatticeRule& rule, std::uint64_t N, std::uint64_t n,
           const std::vector<double>& shift, std::size_t s) {
          return qmc::qmc_normal_sample(rule, N, n, shift, s);
        });

  // field
  py::class_<field::MaternParams>(m, "MaternParams")
      .def(py::init([](double lam, double sigma2, double nu) {
             return field::MaternParams{lam, sigma2, nu, 1};
           }),
           py::arg("correlation_length"), py::arg("variance"), py::arg("smoothness"))
      .def_readwrite("correlation_length", &field::MaternParams::correlation_length)
      .def_readwrite("variance", &field::MaternParams::variance)
      .def_readwrite("smoothness", &field::MaternParams::smoothness);
  m.def("matern_cov", &field::matern_cov, py::arg("r"), py::arg("params"));
  m.def("field_preset", &cli::field_preset, py::arg("name"));

  py::class_<field::KLBasis, std::shared_ptr<field::KLBasis>>(m, "KLBasis")
      .def_property_readonly("dimension", &field::KLBasis::dimension)
      .def_property_readonly("term_count", &field::KLBasis::term_count)
      .def_property_readonly("eigenvalues", &field::KLBasis::eigenvalues)
      .def("eigenfunction",
           [](const field::KLBasis& basis, int r, const std::vector<double>& x) {
             return basis.eigenfunction(r, x);
           })
      .def("save",
           [](const field::KLBasis& basis, const std::string& path) {
             std::ofstream out(path);
             if (!out) throw std::invalid_argument("cannot open " + path);
             basis.save(out);
           })
      .def_static("load", [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open " + path);
        return field::KLBasis::load(in);
      });
  m.def("build_kl_basis", &field::build_kl_basis, py::arg("params"), py::arg("d"),
        py::arg("n_quad") = 512, py::arg("rel_tol") = 1e-3);
  m.def("evaluate_field",
        [](const field::KLBasis& basis, const std::vector<double>& xi,
           const std::vector<int>& cells) {
          pde::Grid grid;
          grid.d = int(cells.size());
          for (std::size_t i = 0; i < cells.size(); ++i)
            grid.m[i] = cells[i];
          return field::evaluate_field(basis, xi, grid).k;
        },
        py::arg("basis"), py::arg("xi"), py::arg("cells"));

  // mindex
  m.def("generate_index_set",
        [](const std::string& kind, int d, int L, const std::vector<double>& weights) {
          std::vector<std::vector<int>> out;
          for (const auto& idx : mindex::generate_index_set(make_spec(kind, d, weights), L))
            out.push_back(from_index(idx));
          return out;
        },
        py::arg("kind"), py::arg("d"), py::arg("L"),
        py::arg("weights") = std::vector<double>{});
  m.def("boundary",
        [](const std::string& kind, int d, int L, const std::vector<double>& weights) {
          std::vector<std::vector<int>> out;
          for (const auto& idx : mindex::boundary(make_spec(kind, d, weights), L))
            out.push_back(from_index(idx));
          return out;
        },
        py::arg("kind"), py::arg("d"), py::arg("L"),
        py::arg("weights") = std::vector<double>{});
  m.def("is_admissible", [](const std::vector<std::vector<int>>& set) {
    std::vector<mindex::MultiIndex> indices;
    for (const auto& comps : set) indices.push_back(to_index(comps));
    return mindex::is_admissible(indices);
  });
  m.def("corner_expansion", [](const std::vector<int>& ell) {
    std::vector<std::pair<std::vector<int>, int>> out;
    for (const auto& [tau, sign] : mindex::corner_expansion(to_index(ell)))
      out.emplace_back(from_index(tau), sign);
    return out;
  });

  // estimator
  m.def("optimal_samples",
        [](const std::vector<double>& v, const std::vector<double>& w, double eps,
           double eta) { return est::optimal_samples(v, w, eps, eta); },
        py::arg("variances"), py::arg("unit_costs"), py::arg("eps"), py::arg("eta"));

  py::class_<est::RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("eps", &est::RunConfig::eps)
      .def_property(
          "estimator",
          [](const est::RunConfig& c) { return est::to_string(c.kind); },
          [](est::RunConfig& c, const std::string& name) {
            c.kind = est::parse_estimator_kind(name);
          })
      .def_readwrite("warmup_mc", &est::RunConfig::warmup_mc)
      .def_readwrite("warmup_qmc", &est::RunConfig::warmup_qmc)
      .def_readwrite("shifts", &est::RunConfig::shifts)
      .def_readwrite("seed", &est::RunConfig::seed)
      .def_readwrite("level_cap", &est::RunConfig::level_cap)
      .def_readwrite("workers", &est::RunConfig::workers)
      .def_readwrite("field_params", &est::RunConfig::field_params)
      .def_readwrite("dimensions", &est::RunConfig::dimensions)
      .def_readwrite("n_quad", &est::RunConfig::n_quad)
      .def_readwrite("kl_rel_tol", &est::RunConfig::kl_rel_tol)
      .def_property(
          "qoi", [](const est::RunConfig& c) { return c.qoi == Qoi::CenterPressure ? "G1" : "G2"; },
          [](est::RunConfig& c, const std::string& name) {
            if (name == "G1")
              c.qoi = Qoi::CenterPressure;
            else if (name == "G2")
              c.qoi = Qoi::OutflowFlux;
            else
              throw std::invalid_argument("qoi must be G1 or G2");
          })
      .def_readwrite("solver_tol", &est::RunConfig::solver_tol);

  m.def("run", [](const est::RunConfig& config) { return report_to_dict(est::run(config)); },
        py::arg("config"),
        "Run the configured estimator on the lognormal diffusion problem.");

  // cli
  m.def("fit_rate", [](const std::vector<std::pair<double, double>>& points) {
    const cli::RateFit fit = cli::fit_rate(points);
    py::dict out;
    out["q"] = fit.q;
    out["r"] = fit.r;
    out["intercept"] = fit.intercept;
    out["residual"] = fit.residual;
    return out;
  });
  m.def("run_sweep_config", [](const std::string& config_path) {
    const cli::SweepResult result = cli::run_sweep(cli::parse_config_file(config_path));
    return result.exit_code;
  });
}
