#ifndef MIQ_PDE_HPP
#define MIQ_PDE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace miq::pde {

// Anisotropic tensor grid on the unit cube, cell-centered.  Unused trailing
// dimensions have one cell so linear indexing is uniform across d.
struct Grid {
  int d = 0;
  std::array<int, 3> m = {1, 1, 1};  // cells per dimension

  double h(int i) const { return 1.0 / double(m[std::size_t(i)]); }
  double center(int i, int j) const { return (double(j) + 0.5) * h(i); }
  std::int64_t cells() const {
    return std::int64_t(m[0]) * std::int64_t(m[1]) * std::int64_t(m[2]);
  }
  double cell_volume() const { return 1.0 / double(cells()); }
  std::int64_t index(int ix, int iy, int iz) const {
    return (std::int64_t(iz) * m[1] + iy) * m[0] + ix;
  }
};

// m_i = m0_i * M_i^{l_i}; throws ResourceError when the total cell count
// would exceed cell_cap.
Grid build_grid(std::array<int, 3> m0, std::array<int, 3> M,
                std::array<int, 3> level, int d,
                std::int64_t cell_cap = std::int64_t(1) << 28);

// Diffusion coefficient at cell centers; values strictly positive.
struct FieldSample {
  Grid grid;
  std::vector<double> k;
};

// One condition per face of the unit cube: Dirichlet pressure value or
// Neumann flux value n.(k grad p), both as functions of the face point.
struct FaceCondition {
  enum class Kind { Dirichlet, Neumann };
  Kind kind = Kind::Dirichlet;
  std::function<double(const std::array<double, 3>&)> value;
};

struct BoundarySpec {
  // face[i][side]: side 0 is x_i = 0, side 1 is x_i = 1.
  std::array<std::array<FaceCondition, 2>, 3> face;

  static BoundarySpec all_dirichlet(double value);
  // p = 1 at x1 = 0, p = 0 at x1 = 1, no-flux elsewhere.
  static BoundarySpec flow_cell();

  bool has_dirichlet(int d) const;
};

struct PressureField {
  Grid grid;
  std::vector<double> p;
  std::shared_ptr<const BoundarySpec> bc;
};

struct SolveOptions {
  double rel_tol = 1e-10;
  long long max_iterations = 0;  // 0: 10*sqrt(cells) + 1000
};

struct SolveStats {
  long long iterations = 0;
  double rel_residual = 0.0;
};

// Cell-centered finite-volume discretization with harmonic-mean face
// transmissibilities; Dirichlet faces by half-cell ghost elimination,
// Neumann faces as prescribed flux.  Solved by conjugate gradients with a
// symmetric Gauss-Seidel preconditioner.  Throws NumericError if the
// iteration cap is hit and std::domain_error on non-positive k.
PressureField solve_diffusion(
    const Grid& grid, const FieldSample& k,
    std::shared_ptr<const BoundarySpec> bc,
    const std::function<double(const std::array<double, 3>&)>& source,
    const SolveOptions& options = {}, SolveStats* stats = nullptr);

// Multilinear interpolation from the 2^d surrounding cell centers,
// clamped at the boundary.  x must lie in the closed unit cube.
double qoi_point(const PressureField& p, const std::array<double, 3>& x);

// Outflow flux -int k dp/dx1 over the face x1 = 1: one-sided second-order
// difference from the Dirichlet face value and the two nearest cell-center
// columns, k at the boundary-adjacent cells, transverse quadrature on the
// face values.
double qoi_flux(const PressureField& p, const FieldSample& k);

// Debug dump: one "x,y,z,p" row per cell.
void dump_csv(const PressureField& p, std::ostream& out);

// Dense copy of the assembled system (row-major matrix and right-hand
// side).  Intended for inspection and direct solves on small grids.
struct DenseSystem {
  std::int64_t n = 0;
  std::vector<double> matrix;  // n*n, row-major
  std::vector<double> rhs;
};

DenseSystem assemble_dense(
    const Grid& grid, const FieldSample& k, const BoundarySpec& bc,
    const std::function<double(const std::array<double, 3>&)>& source);

}  // namespace miq::pde

#endif
