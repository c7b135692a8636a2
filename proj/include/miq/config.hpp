#ifndef MIQ_CONFIG_HPP
#define MIQ_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "miq/estimator.hpp"

namespace miq::cli {

// A tolerance sweep over a list of estimators, parsed from a sectioned
// key=value config file.
struct ExperimentPlan {
  Qoi problem = Qoi::CenterPressure;
  std::string field_name = "F1";
  field::MaternParams field{1.0, 1.0, 2.5, 1};
  int dimensions = 3;
  std::vector<est::EstimatorKind> estimators;
  std::vector<double> eps;  // strictly decreasing
  int repetitions = 5;
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  // forwarded sampler / grid / solver knobs
  int warmup_mc = 32;
  int warmup_qmc = 4;
  int shifts = 16;
  int level_cap = 8;
  int workers = 1;
  int n_quad = 512;
  double kl_rel_tol = 1e-3;
  std::array<int, 3> m0 = {4, 4, 4};
  std::array<int, 3> M = {2, 2, 2};
  double solver_tol = 1e-10;
  std::string lattice_path;      // empty: bundled default
  std::string basis_cache_path;  // empty: recompute the eigensolve
  est::PointSource point_source = est::PointSource::Lattice;
  est::CostModel cost_model = est::CostModel::CellCount;

  est::RunConfig run_config(est::EstimatorKind kind, double eps_value,
                            std::uint64_t run_seed) const;
};

// Parses and validates a plan.  Unknown sections or keys, malformed values
// and violated invariants raise FormatError naming the key and line.
ExperimentPlan parse_config(std::istream& in);
ExperimentPlan parse_config_file(const std::string& path);

// Field parameter presets.
field::MaternParams field_preset(const std::string& name);

}  // namespace miq::cli

#endif
