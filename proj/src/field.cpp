#include "miq/field.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>

#include "miq/errors.hpp"

namespace miq::field {

void MaternParams::validate() const {
  if (!(correlation_length > 0.0))
    throw std::invalid_argument("MaternParams: correlation length must be > 0");
  if (!(variance > 0.0))
    throw std::invalid_argument("MaternParams: variance must be > 0");
  if (!(smoothness > 0.0))
    throw std::invalid_argument("MaternParams: smoothness must be > 0");
  if (p_norm != 1)
    throw std::invalid_argument("MaternParams: only the l1 distance is supported");
}

namespace {

// K_nu(x) for half-integer nu has a closed form; other orders go through
// the C++17 special-function implementation.
double bessel_k(double nu, double x) {
  const double half_pi_over_x = std::sqrt(M_PI / (2.0 * x));
  if (nu == 0.5) return half_pi_over_x * std::exp(-x);
  if (nu == 1.5) return half_pi_over_x * std::exp(-x) * (1.0 + 1.0 / x);
  if (nu == 2.5)
    return half_pi_over_x * std::exp(-x) * (1.0 + 3.0 / x + 3.0 / (x * x));
  return std::cyl_bessel_k(nu, x);
}

}  // namespace

double matern_cov(double r, const MaternParams& params) {
  params.validate();
  if (r < 0.0) throw std::domain_error("matern_cov: negative distance");
  if (r == 0.0) return params.variance;
  const double nu = params.smoothness;
  const double arg = std::sqrt(2.0 * nu) * r / params.correlation_length;
  const double scale =
      params.variance * std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
  const double value = scale * std::pow(arg, nu) * bessel_k(nu, arg);
  // the kernel is bounded by its value at zero; guard underflow artifacts
  return std::min(value, params.variance);
}

std::vector<Eigenpair1D> solve_1d_eigenproblem(const MaternParams& params,
                                               int n_quad) {
  params.validate();
  if (n_quad < 2)
    throw std::invalid_argument("solve_1d_eigenproblem: n_quad must be >= 2");

  const int n = n_quad;
  const double w = 1.0 / double(n);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double r = double(i - j) * w;  // |x_i - x_j| for midpoint nodes
      const double v = matern_cov(r, params) * w;
      A(i, j) = v;
      A(j, i) = v;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success)
    throw NumericError("solve_1d_eigenproblem: eigensolver did not converge",
                       30 * n, 0.0);

  // Eigen returns ascending order; emit descending, clamp at zero, rescale
  // to unit discrete L2 norm and fix the sign.
  std::vector<Eigenpair1D> pairs;
  pairs.reserve(std::size_t(n));
  const double sqrt_n = std::sqrt(double(n));
  for (int r = n - 1; r >= 0; --r) {
    Eigenpair1D pair;
    pair.theta = std::max(solver.eigenvalues()(r), 0.0);
    pair.table.resize(std::size_t(n));
    const auto col = solver.eigenvectors().col(r);
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (col(i) != 0.0) {
        sign = col(i) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) pair.table[std::size_t(i)] = sign * col(i) * sqrt_n;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

KLBasis::KLBasis(MaternParams params, double rel_tol, int d, int n_quad,
                 std::vector<double> theta,
                 std::vector<std::array<int, 3>> factors,
                 std::vector<std::vector<double>> tables_1d,
                 std::vector<double> theta_1d)
    : params_(params),
      rel_tol_(rel_tol),
      d_(d),
      n_quad_(n_quad),
      theta_(std::move(theta)),
      factors_(std::move(factors)),
      tables_1d_(std::move(tables_1d)),
      theta_1d_(std::move(theta_1d)) {}

double KLBasis::eval_table(int u, double x) const {
  const std::vector<double>& f = tables_1d_[std::size_t(u)];
  const int n = int(f.size());
  // nodes at (i + 1/2)/n; linear between nodes, linear extension outside
  double t = x * double(n) - 0.5;
  int i0 = int(std::floor(t));
  if (i0 < 0) i0 = 0;
  if (i0 > n - 2) i0 = n - 2;
  const double wgt = t - double(i0);
  return f[std::size_t(i0)] + wgt * (f[std::size_t(i0) + 1] - f[std::size_t(i0)]);
}

double KLBasis::eigenfunction(int r, std::span<const double> x) const {
  double v = 1.0;
  for (int i = 0; i < d_; ++i) v *= eval_table(factor(r, i), x[std::size_t(i)]);
  return v;
}

KLBasis build_kl_basis(const MaternParams& params, int d, int n_quad,
                       double rel_tol) {
  if (d < 1 || d > 3) throw std::invalid_argument("build_kl_basis: d must be 1, 2 or 3");
  if (!(rel_tol > 0.0 && rel_tol < 1.0))
    throw std::invalid_argument("build_kl_basis: rel_tol must be in (0,1)");

  const std::vector<Eigenpair1D> one_d = solve_1d_eigenproblem(params, n_quad);
  const int n1 = int(one_d.size());

  // Best-first enumeration of product eigenvalues theta_{r_1} ... theta_{r_d}
  // in descending order.
  struct Node {
    double theta;
    std::array<int, 3> idx;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.theta < b.theta; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
  std::map<std::array<int, 3>, bool> seen;

  auto product_theta = [&](const std::array<int, 3>& idx) {
    double t = 1.0;
    for (int i = 0; i < d; ++i) t *= one_d[std::size_t(idx[std::size_t(i)])].theta;
    return t;
  };

  std::array<int, 3> first = {0, 0, 0};
  heap.push({product_theta(first), first});
  seen[first] = true;

  std::vector<double> theta;
  std::vector<std::array<int, 3>> factors;
  double theta_1 = -1.0;
  while (!heap.empty()) {
    const Node node = heap.top();
    heap.pop();
    // retain terms while they exceed the ratio cutoff; the first term that
    // satisfies theta / theta_1 <= rel_tol is where the expansion stops
    if (theta_1 >= 0.0 && (theta_1 <= 0.0 || node.theta <= rel_tol * theta_1)) break;
    theta.push_back(node.theta);
    factors.push_back(node.idx);
    if (theta_1 < 0.0) theta_1 = node.theta;
    for (int i = 0; i < d; ++i) {
      std::array<int, 3> next = node.idx;
      if (next[std::size_t(i)] + 1 >= n1) continue;
      next[std::size_t(i)] += 1;
      if (!seen.emplace(next, true).second) continue;
      heap.push({product_theta(next), next});
    }
  }

  // keep only the 1D tables actually referenced, renumbering factors
  std::vector<int> remap(std::size_t(n1), -1);
  std::vector<std::vector<double>> tables;
  std::vector<double> theta_1d;
  for (auto& f : factors) {
    for (int i = 0; i < d; ++i) {
      int& u = f[std::size_t(i)];
      if (remap[std::size_t(u)] < 0) {
        remap[std::size_t(u)] = int(tables.size());
        tables.push_back(one_d[std::size_t(u)].table);
        theta_1d.push_back(one_d[std::size_t(u)].theta);
      }
      u = remap[std::size_t(u)];
    }
    for (int i = d; i < 3; ++i) f[std::size_t(i)] = -1;
  }

  return KLBasis(params, rel_tol, d, n_quad, std::move(theta), std::move(factors),
                 std::move(tables), std::move(theta_1d));
}

pde::FieldSample evaluate_field(const KLBasis& basis,
                                std::span<const double> xi,
                                const pde::Grid& grid) {
  if (grid.d != basis.dimension())
    throw std::invalid_argument("evaluate_field: grid dimension mismatch");
  if (std::ssize(xi) < basis.term_count())
    throw std::invalid_argument("evaluate_field: xi shorter than basis truncation");

  const int s = basis.term_count();
  const int d = basis.dimension();
  pde::FieldSample sample;
  sample.grid = grid;
  std::vector<double> z(std::size_t(grid.cells()), 0.0);

  // per-dimension tables evaluated once per (term factor, dimension)
  std::vector<std::vector<double>> fx(std::size_t(basis.table_count()));
  std::vector<std::vector<double>> fy(std::size_t(basis.table_count()));
  std::vector<std::vector<double>> fz(std::size_t(basis.table_count()));
  auto dim_values = [&](int dim_i, int u) -> const std::vector<double>& {
    auto& cache = dim_i == 0 ? fx : (dim_i == 1 ? fy : fz);
    auto& slot = cache[std::size_t(u)];
    if (slot.empty()) {
      slot.resize(std::size_t(grid.m[std::size_t(dim_i)]));
      for (int j = 0; j < grid.m[std::size_t(dim_i)]; ++j)
        slot[std::size_t(j)] = basis.eval_table(u, grid.center(dim_i, j));
    }
    return slot;
  };

  const int mx = grid.m[0], my = grid.m[1], mz = grid.m[2];
  for (int r = 0; r < s; ++r) {
    const double coeff = std::sqrt(basis.eigenvalue(r)) * xi[std::size_t(r)];
    if (coeff == 0.0) continue;
    const std::vector<double>& vx = dim_values(0, basis.factor(r, 0));
    const std::vector<double>* vy = d > 1 ? &dim_values(1, basis.factor(r, 1)) : nullptr;
    const std::vector<double>* vz = d > 2 ? &dim_values(2, basis.factor(r, 2)) : nullptr;
    std::int64_t idx = 0;
    for (int iz = 0; iz < mz; ++iz) {
      const double cz = coeff * (vz ? (*vz)[std::size_t(iz)] : 1.0);
      for (int iy = 0; iy < my; ++iy) {
        const double cyz = cz * (vy ? (*vy)[std::size_t(iy)] : 1.0);
        for (int ix = 0; ix < mx; ++ix, ++idx) z[std::size_t(idx)] += cyz * vx[std::size_t(ix)];
      }
    }
  }

  sample.k.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) sample.k[i] = std::exp(z[i]);
  return sample;
}

void KLBasis::save(std::ostream& out) const {
  out.precision(17);
  out << "miq-kl-basis 1\n";
  out << params_.correlation_length << ' ' << params_.variance << ' '
      << params_.smoothness << ' ' << params_.p_norm << ' ' << rel_tol_ << '\n';
  out << d_ << ' ' << n_quad_ << ' ' << theta_.size() << ' ' << tables_1d_.size()
      << '\n';
  for (std::size_t r = 0; r < theta_.size(); ++r) {
    out << theta_[r];
    for (int i = 0; i < d_; ++i) out << ' ' << factors_[r][std::size_t(i)];
    out << '\n';
  }
  for (std::size_t u = 0; u < tables_1d_.size(); ++u) {
    out << theta_1d_[u];
    for (double v : tables_1d_[u]) out << ' ' << v;
    out << '\n';
  }
}

KLBasis KLBasis::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "miq-kl-basis" || version != 1)
    throw FormatError("basis cache: unrecognized header");
  MaternParams params;
  double rel_tol = 0.0;
  in >> params.correlation_length >> params.variance >> params.smoothness >>
      params.p_norm >> rel_tol;
  int d = 0, n_quad = 0;
  std::size_t s = 0, n_tables = 0;
  in >> d >> n_quad >> s >> n_tables;
  if (!in || d < 1 || d > 3 || n_quad < 2)
    throw FormatError("basis cache: invalid dimensions");
  std::vector<double> theta(s);
  std::vector<std::array<int, 3>> factors(s, {-1, -1, -1});
  for (std::size_t r = 0; r < s; ++r) {
    in >> theta[r];
    for (int i = 0; i < d; ++i) in >> factors[r][std::size_t(i)];
  }
  std::vector<double> theta_1d(n_tables);
  std::vector<std::vector<double>> tables(n_tables,
                                          std::vector<double>(std::size_t(n_quad)));
  for (std::size_t u = 0; u < n_tables; ++u) {
    in >> theta_1d[u];
    for (int i = 0; i < n_quad; ++i) in >> tables[u][std::size_t(i)];
  }
  if (!in) throw FormatError("basis cache: truncated file");
  return KLBasis(params, rel_tol, d, n_quad, std::move(theta), std::move(factors),
                 std::move(tables), std::move(theta_1d));
}

}  // namespace miq::field
