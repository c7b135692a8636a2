#include "miq/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "miq/errors.hpp"

namespace miq::cli {

field::MaternParams field_preset(const std::string& name) {
  if (name == "F1") return {1.0, 1.0, 2.5, 1};
  if (name == "F2") return {0.3, 1.0, 1.0, 1};
  if (name == "F3") return {0.075, 1.0, 0.5, 1};
  throw std::invalid_argument("unknown field preset: " + name);
}

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void fail(const std::string& what, const std::string& key, int line) {
  throw FormatError("config: " + what + " for key '" + key + "' at line " +
                    std::to_string(line));
}

double parse_double(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) fail("invalid number", key, line);
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    fail("invalid number", key, line);
  }
}

long long parse_int(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) fail("invalid integer", key, line);
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    fail("invalid integer", key, line);
  }
}

std::array<int, 3> parse_int3(const std::string& value, const std::string& key,
                              int line) {
  const std::vector<std::string> items = split_list(value);
  if (items.empty() || items.size() > 3) fail("need 1 to 3 integers", key, line);
  std::array<int, 3> out;
  const int last = int(items.size()) - 1;
  for (int i = 0; i < 3; ++i)
    out[std::size_t(i)] =
        int(parse_int(items[std::size_t(std::min(i, last))], key, line));
  return out;
}

}  // namespace

ExperimentPlan parse_config(std::istream& in) {
  ExperimentPlan plan;
  bool have_problem = false, have_field = false, have_eps = false;
  bool custom_field = false;
  field::MaternParams custom{1.0, 1.0, 0.5, 1};
  bool have_lambda = false, have_sigma2 = false, have_nu = false;

  std::string section = "experiment";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw FormatError("config: malformed section header at line " +
                          std::to_string(line_no));
      section = trim(text.substr(1, text.size() - 2));
      if (section != "experiment" && section != "field" && section != "grid" &&
          section != "sampler")
        throw FormatError("config: unknown section '" + section + "' at line " +
                          std::to_string(line_no));
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw FormatError("config: expected key=value at line " + std::to_string(line_no));
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) fail("missing key", key, line_no);
    if (value.empty()) fail("missing value", key, line_no);

    if (section == "experiment") {
      if (key == "problem") {
        if (value == "G1")
          plan.problem = Qoi::CenterPressure;
        else if (value == "G2")
          plan.problem = Qoi::OutflowFlux;
        else
          fail("expected G1 or G2", key, line_no);
        have_problem = true;
      } else if (key == "field") {
        plan.field_name = value;
        if (value == "custom")
          custom_field = true;
        else
          plan.field = field_preset(value);
        have_field = true;
      } else if (key == "d") {
        const long long d = parse_int(value, key, line_no);
        if (d < 1 || d > 3) fail("d must be 1, 2 or 3", key, line_no);
        plan.dimensions = int(d);
      } else if (key == "estimators") {
        plan.estimators.clear();
        for (const std::string& name : split_list(value)) {
          try {
            plan.estimators.push_back(est::parse_estimator_kind(name));
          } catch (const std::exception&) {
            fail("unknown estimator '" + name + "'", key, line_no);
          }
        }
        if (plan.estimators.empty()) fail("empty estimator list", key, line_no);
      } else if (key == "eps") {
        plan.eps.clear();
        for (const std::string& item : split_list(value))
          plan.eps.push_back(parse_double(item, key, line_no));
        if (plan.eps.empty()) fail("empty tolerance list", key, line_no);
        for (std::size_t i = 0; i < plan.eps.size(); ++i) {
          if (!(plan.eps[i] > 0.0)) fail("tolerances must be positive", key, line_no);
          if (i > 0 && !(plan.eps[i] < plan.eps[i - 1]))
            fail("tolerances must be strictly decreasing", key, line_no);
        }
        have_eps = true;
      } else if (key == "repetitions") {
        const long long r = parse_int(value, key, line_no);
        if (r < 1) fail("repetitions must be >= 1", key, line_no);
        plan.repetitions = int(r);
      } else if (key == "seed") {
        plan.seed = std::uint64_t(parse_int(value, key, line_no));
      } else if (key == "out") {
        plan.out_dir = value;
      } else {
        fail("unknown key", key, line_no);
      }
    } else if (section == "field") {
      if (key == "lambda") {
        custom.correlation_length = parse_double(value, key, line_no);
        have_lambda = true;
      } else if (key == "sigma2") {
        custom.variance = parse_double(value, key, line_no);
        have_sigma2 = true;
      } else if (key == "nu") {
        custom.smoothness = parse_double(value, key, line_no);
        have_nu = true;
      } else if (key == "n_quad") {
        const long long n = parse_int(value, key, line_no);
        if (n < 2) fail("n_quad must be >= 2", key, line_no);
        plan.n_quad = int(n);
      } else if (key == "rel_tol") {
        const double v = parse_double(value, key, line_no);
        if (!(v > 0.0 && v < 1.0)) fail("rel_tol must be in (0,1)", key, line_no);
        plan.kl_rel_tol = v;
      } else if (key == "basis_cache") {
        plan.basis_cache_path = value;
      } else {
        fail("unknown key", key, line_no);
      }
    } else if (section == "grid") {
      if (key == "m0")
        plan.m0 = parse_int3(value, key, line_no);
      else if (key == "M")
        plan.M = parse_int3(value, key, line_no);
      else
        fail("unknown key", key, line_no);
    } else {  // sampler
      if (key == "warmup_mc") {
        plan.warmup_mc = int(parse_int(value, key, line_no));
      } else if (key == "warmup_qmc") {
        plan.warmup_qmc = int(parse_int(value, key, line_no));
      } else if (key == "shifts") {
        plan.shifts = int(parse_int(value, key, line_no));
      } else if (key == "level_cap") {
        plan.level_cap = int(parse_int(value, key, line_no));
      } else if (key == "workers") {
        const long long w = parse_int(value, key, line_no);
        if (w < 1) fail("workers must be >= 1", key, line_no);
        plan.workers = int(w);
      } else if (key == "solver_tol") {
        const double v = parse_double(value, key, line_no);
        if (!(v > 0.0)) fail("solver_tol must be > 0", key, line_no);
        plan.solver_tol = v;
      } else if (key == "lattice") {
        plan.lattice_path = value;
      } else if (key == "point_source") {
        if (value == "lattice")
          plan.point_source = est::PointSource::Lattice;
        else if (value == "iid")
          plan.point_source = est::PointSource::IidUniform;
        else
          fail("expected lattice or iid", key, line_no);
      } else if (key == "cost_model") {
        if (value == "cells")
          plan.cost_model = est::CostModel::CellCount;
        else if (value == "walltime")
          plan.cost_model = est::CostModel::WallTime;
        else
          fail("expected cells or walltime", key, line_no);
      } else {
        fail("unknown key", key, line_no);
      }
    }
  }

  if (!have_problem) throw FormatError("config: missing required key 'problem'");
  if (!have_field) throw FormatError("config: missing required key 'field'");
  if (!have_eps) throw FormatError("config: missing required key 'eps'");
  if (custom_field) {
    if (!have_lambda || !have_sigma2 || !have_nu)
      throw FormatError("config: field=custom needs lambda, sigma2 and nu");
    plan.field = custom;
  }
  plan.field.validate();
  if (plan.estimators.empty())
    plan.estimators = {est::EstimatorKind::MIQMC_TD};
  return plan;
}

ExperimentPlan parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("config: cannot open " + path);
  return parse_config(in);
}

est::RunConfig ExperimentPlan::run_config(est::EstimatorKind kind, double eps_value,
                                          std::uint64_t run_seed) const {
  est::RunConfig config;
  config.eps = eps_value;
  config.kind = kind;
  config.warmup_mc = warmup_mc;
  config.warmup_qmc = warmup_qmc;
  config.shifts = shifts;
  config.seed = run_seed;
  config.level_cap = level_cap;
  config.workers = workers;
  config.field_params = field;
  config.dimensions = dimensions;
  config.n_quad = n_quad;
  config.kl_rel_tol = kl_rel_tol;
  config.qoi = problem;
  config.m0 = m0;
  config.M = M;
  config.solver_tol = solver_tol;
  config.point_source = point_source;
  config.cost_model = cost_model;
  return config;
}

}  // namespace miq::cli
