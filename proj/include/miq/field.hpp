#ifndef MIQ_FIELD_HPP
#define MIQ_FIELD_HPP

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "miq/pde.hpp"

namespace miq::field {

// Whittle-Matern covariance parameters.  p_norm is the exponent of the
// l_p distance; all shipped configurations use p = 1, which makes the
// multi-dimensional kernel a product of one-dimensional factors.
struct MaternParams {
  double correlation_length = 1.0;  // lambda > 0
  double variance = 1.0;            // sigma^2 > 0
  double smoothness = 0.5;          // nu > 0
  int p_norm = 1;

  void validate() const;
};

// C(r) = sigma^2 * 2^(1-nu)/Gamma(nu) * (sqrt(2 nu) r / lambda)^nu
//        * K_nu(sqrt(2 nu) r / lambda),  C(0) = sigma^2.
double matern_cov(double r, const MaternParams& params);

// One-dimensional eigenpair of the covariance operator on [0,1],
// discretized at n_quad midpoint nodes.  The table holds eigenfunction
// values at the nodes, scaled to unit discrete L2 norm.
struct Eigenpair1D {
  double theta = 0.0;
  std::vector<double> table;
};

// Nystrom discretization at midpoints with uniform weight 1/n_quad,
// symmetric eigendecomposition, eigenvalues clamped at zero and sorted
// descending.  Sign convention: first nonzero component positive.
std::vector<Eigenpair1D> solve_1d_eigenproblem(const MaternParams& params,
                                               int n_quad);

// Truncated d-dimensional Karhunen-Loeve basis.  Terms are tensor products
// of 1D eigenpairs of the per-dimension factor kernels, enumerated in
// descending eigenvalue order and retained while theta_r / theta_1 exceeds
// rel_tol; the first term at or below the cutoff is dropped together with
// the rest of the tail.
class KLBasis {
 public:
  KLBasis() = default;
  KLBasis(MaternParams params, double rel_tol, int d, int n_quad,
          std::vector<double> theta, std::vector<std::array<int, 3>> factors,
          std::vector<std::vector<double>> tables_1d,
          std::vector<double> theta_1d);

  const MaternParams& params() const { return params_; }
  double rel_tol() const { return rel_tol_; }
  int dimension() const { return d_; }
  int term_count() const { return int(theta_.size()); }
  int quadrature_nodes() const { return n_quad_; }
  double eigenvalue(int r) const { return theta_[std::size_t(r)]; }
  const std::vector<double>& eigenvalues() const { return theta_; }
  // 1D factor index of term r in spatial dimension i.
  int factor(int r, int i) const { return factors_[std::size_t(r)][std::size_t(i)]; }
  int table_count() const { return int(tables_1d_.size()); }
  const std::vector<double>& table(int u) const { return tables_1d_[std::size_t(u)]; }
  const std::vector<double>& eigenvalues_1d() const { return theta_1d_; }

  // Piecewise-linear evaluation of 1D eigenfunction u at x in [0,1].
  double eval_table(int u, double x) const;
  // Full d-dimensional eigenfunction of term r at a point.
  double eigenfunction(int r, std::span<const double> x) const;

  // Versioned text dump so repeated runs can skip the eigensolve.
  void save(std::ostream& out) const;
  static KLBasis load(std::istream& in);

 private:
  MaternParams params_;
  double rel_tol_ = 0.0;
  int d_ = 0;
  int n_quad_ = 0;
  std::vector<double> theta_;                    // descending, size s
  std::vector<std::array<int, 3>> factors_;      // per term, per dimension
  std::vector<std::vector<double>> tables_1d_;   // distinct 1D eigenfunctions
  std::vector<double> theta_1d_;                 // matching 1D eigenvalues
};

KLBasis build_kl_basis(const MaternParams& params, int d, int n_quad,
                       double rel_tol);

// Z at every cell center from the first s components of xi, then
// k = exp(Z).  Deterministic in (basis, xi, grid).
pde::FieldSample evaluate_field(const KLBasis& basis,
                                std::span<const double> xi,
                                const pde::Grid& grid);

}  // namespace miq::field

#endif
