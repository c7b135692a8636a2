#include "miq/pde.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "miq/errors.hpp"

namespace miq::pde {

Grid build_grid(std::array<int, 3> m0, std::array<int, 3> M,
                std::array<int, 3> level, int d, std::int64_t cell_cap) {
  if (d < 1 || d > 3) throw std::invalid_argument("build_grid: d must be 1, 2 or 3");
  Grid g;
  g.d = d;
  for (int i = 0; i < d; ++i) {
    if (m0[std::size_t(i)] < 1) throw std::invalid_argument("build_grid: m0 must be >= 1");
    if (M[std::size_t(i)] < 2) throw std::invalid_argument("build_grid: M must be >= 2");
    if (level[std::size_t(i)] < 0) throw std::invalid_argument("build_grid: level must be >= 0");
    std::int64_t m = m0[std::size_t(i)];
    for (int j = 0; j < level[std::size_t(i)]; ++j) {
      m *= M[std::size_t(i)];
      if (m > cell_cap)
        throw ResourceError("build_grid: cell count exceeds cap");
    }
    g.m[std::size_t(i)] = int(m);
  }
  if (g.cells() > cell_cap)
    throw ResourceError("build_grid: cell count exceeds cap");
  return g;
}

BoundarySpec BoundarySpec::all_dirichlet(double value) {
  BoundarySpec bc;
  for (auto& dim : bc.face)
    for (auto& f : dim) {
      f.kind = FaceCondition::Kind::Dirichlet;
      f.value = [value](const std::array<double, 3>&) { return value; };
    }
  return bc;
}

BoundarySpec BoundarySpec::flow_cell() {
  BoundarySpec bc = all_dirichlet(0.0);
  bc.face[0][0].value = [](const std::array<double, 3>&) { return 1.0; };
  for (int i = 1; i < 3; ++i)
    for (int side = 0; side < 2; ++side) {
      bc.face[std::size_t(i)][std::size_t(side)].kind = FaceCondition::Kind::Neumann;
      bc.face[std::size_t(i)][std::size_t(side)].value =
          [](const std::array<double, 3>&) { return 0.0; };
    }
  return bc;
}

bool BoundarySpec::has_dirichlet(int d) const {
  for (int i = 0; i < d; ++i)
    for (int side = 0; side < 2; ++side)
      if (face[std::size_t(i)][std::size_t(side)].kind == FaceCondition::Kind::Dirichlet)
        return true;
  return false;
}

namespace {

// 7-point (d=3) stencil in compressed form: diagonal plus one
// transmissibility array per dimension for the lower interior faces.
// trans[i][cell] couples cell and cell - stride_i; entries with the first
// index in dimension i equal to zero are unused and stay zero.
struct Stencil {
  Grid grid;
  std::vector<double> diag;
  std::array<std::vector<double>, 3> trans;
  std::vector<double> rhs;

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const int mx = grid.m[0], my = grid.m[1], mz = grid.m[2];
    const std::int64_t sx = 1, sy = mx, sz = std::int64_t(mx) * my;
    std::int64_t i = 0;
    for (int iz = 0; iz < mz; ++iz)
      for (int iy = 0; iy < my; ++iy)
        for (int ix = 0; ix < mx; ++ix, ++i) {
          double v = diag[std::size_t(i)] * x[std::size_t(i)];
          if (ix > 0) v -= trans[0][std::size_t(i)] * x[std::size_t(i - sx)];
          if (ix < mx - 1) v -= trans[0][std::size_t(i + sx)] * x[std::size_t(i + sx)];
          if (iy > 0) v -= trans[1][std::size_t(i)] * x[std::size_t(i - sy)];
          if (iy < my - 1) v -= trans[1][std::size_t(i + sy)] * x[std::size_t(i + sy)];
          if (iz > 0) v -= trans[2][std::size_t(i)] * x[std::size_t(i - sz)];
          if (iz < mz - 1) v -= trans[2][std::size_t(i + sz)] * x[std::size_t(i + sz)];
          y[std::size_t(i)] = v;
        }
  }

  // Symmetric Gauss-Seidel preconditioner: (D+L) D^-1 (D+U) z = r.
  void precondition(const std::vector<double>& r, std::vector<double>& z) const {
    const int mx = grid.m[0], my = grid.m[1], mz = grid.m[2];
    const std::int64_t sx = 1, sy = mx, sz = std::int64_t(mx) * my;
    std::int64_t i = 0;
    for (int iz = 0; iz < mz; ++iz)
      for (int iy = 0; iy < my; ++iy)
        for (int ix = 0; ix < mx; ++ix, ++i) {
          double v = r[std::size_t(i)];
          if (ix > 0) v += trans[0][std::size_t(i)] * z[std::size_t(i - sx)];
          if (iy > 0) v += trans[1][std::size_t(i)] * z[std::size_t(i - sy)];
          if (iz > 0) v += trans[2][std::size_t(i)] * z[std::size_t(i - sz)];
          z[std::size_t(i)] = v / diag[std::size_t(i)];
        }
    i = grid.cells() - 1;
    for (int iz = mz - 1; iz >= 0; --iz)
      for (int iy = my - 1; iy >= 0; --iy)
        for (int ix = mx - 1; ix >= 0; --ix, --i) {
          double v = z[std::size_t(i)] * diag[std::size_t(i)];
          if (ix < mx - 1) v += trans[0][std::size_t(i + sx)] * z[std::size_t(i + sx)];
          if (iy < my - 1) v += trans[1][std::size_t(i + sy)] * z[std::size_t(i + sy)];
          if (iz < mz - 1) v += trans[2][std::size_t(i + sz)] * z[std::size_t(i + sz)];
          z[std::size_t(i)] = v / diag[std::size_t(i)];
        }
  }
};

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

Stencil assemble(const Grid& grid, const FieldSample& k,
                 const BoundarySpec& bc,
                 const std::function<double(const std::array<double, 3>&)>& source) {
  const std::int64_t n = grid.cells();
  Stencil st;
  st.grid = grid;
  st.diag.assign(std::size_t(n), 0.0);
  st.rhs.assign(std::size_t(n), 0.0);
  for (int i = 0; i < 3; ++i) st.trans[std::size_t(i)].assign(std::size_t(n), 0.0);

  const int mx = grid.m[0], my = grid.m[1], mz = grid.m[2];
  // unused trailing dimensions have a single unit cell, so h there is 1
  const std::array<double, 3> h = {grid.h(0), grid.h(1), grid.h(2)};
  const double vol = h[0] * h[1] * h[2];
  // face area over center distance, per dimension
  const std::array<double, 3> geom = {h[1] * h[2] / h[0], h[0] * h[2] / h[1],
                                      h[0] * h[1] / h[2]};

  std::int64_t i = 0;
  std::array<int, 3> ijk;
  for (int iz = 0; iz < mz; ++iz)
    for (int iy = 0; iy < my; ++iy)
      for (int ix = 0; ix < mx; ++ix, ++i) {
        ijk = {ix, iy, iz};
        const std::array<double, 3> xc = {grid.center(0, ix),
                                          grid.d > 1 ? grid.center(1, iy) : 0.5,
                                          grid.d > 2 ? grid.center(2, iz) : 0.5};
        const double kc = k.k[std::size_t(i)];
        if (!(kc > 0.0))
          throw std::domain_error("solve_diffusion: non-positive diffusion coefficient");
        st.rhs[std::size_t(i)] += source(xc) * vol;

        for (int dim = 0; dim < grid.d; ++dim) {
          const std::int64_t stride =
              dim == 0 ? 1 : (dim == 1 ? mx : std::int64_t(mx) * my);
          // lower face
          if (ijk[std::size_t(dim)] > 0) {
            const double kn = k.k[std::size_t(i - stride)];
            const double t = harmonic_mean(kc, kn) * geom[std::size_t(dim)];
            st.trans[std::size_t(dim)][std::size_t(i)] = t;
            st.diag[std::size_t(i)] += t;
          } else {
            std::array<double, 3> xf = xc;
            xf[std::size_t(dim)] = 0.0;
            const FaceCondition& f = bc.face[std::size_t(dim)][0];
            if (f.kind == FaceCondition::Kind::Dirichlet) {
              const double t = 2.0 * kc * geom[std::size_t(dim)];
              st.diag[std::size_t(i)] += t;
              st.rhs[std::size_t(i)] += t * f.value(xf);
            } else {
              // inward flux of magnitude n.(k grad p) = g on the face
              st.rhs[std::size_t(i)] += f.value(xf) * vol / h[std::size_t(dim)];
            }
          }
          // upper face
          if (ijk[std::size_t(dim)] < grid.m[std::size_t(dim)] - 1) {
            const double kn = k.k[std::size_t(i + stride)];
            const double t = harmonic_mean(kc, kn) * geom[std::size_t(dim)];
            st.diag[std::size_t(i)] += t;
          } else {
            std::array<double, 3> xf = xc;
            xf[std::size_t(dim)] = 1.0;
            const FaceCondition& f = bc.face[std::size_t(dim)][1];
            if (f.kind == FaceCondition::Kind::Dirichlet) {
              const double t = 2.0 * kc * geom[std::size_t(dim)];
              st.diag[std::size_t(i)] += t;
              st.rhs[std::size_t(i)] += t * f.value(xf);
            } else {
              st.rhs[std::size_t(i)] += f.value(xf) * vol / h[std::size_t(dim)];
            }
          }
        }
      }
  return st;
}

}  // namespace

PressureField solve_diffusion(
    const Grid& grid, const FieldSample& k,
    std::shared_ptr<const BoundarySpec> bc,
    const std::function<double(const std::array<double, 3>&)>& source,
    const SolveOptions& options, SolveStats* stats) {
  if (!bc) throw std::invalid_argument("solve_diffusion: missing boundary spec");
  if (!bc->has_dirichlet(grid.d))
    throw std::invalid_argument("solve_diffusion: need at least one Dirichlet face");
  if (std::int64_t(k.k.size()) != grid.cells())
    throw std::invalid_argument("solve_diffusion: field/grid size mismatch");
  if (!(options.rel_tol > 0.0))
    throw std::invalid_argument("solve_diffusion: tolerance must be > 0");

  Stencil st = assemble(grid, k, *bc, source);
  const std::int64_t n = grid.cells();
  const long long max_iter =
      options.max_iterations > 0
          ? options.max_iterations
          : (long long)(10.0 * std::sqrt(double(n))) + 1000;

  std::vector<double> x(std::size_t(n), 0.0), r = st.rhs,
                      z(std::size_t(n), 0.0), p(std::size_t(n), 0.0),
                      q(std::size_t(n), 0.0);

  double b_norm = 0.0;
  for (double v : st.rhs) b_norm += v * v;
  b_norm = std::sqrt(b_norm);

  PressureField out;
  out.grid = grid;
  out.bc = std::move(bc);
  if (b_norm == 0.0) {
    out.p = std::move(x);
    if (stats) *stats = {0, 0.0};
    return out;
  }

  st.precondition(r, z);
  p = z;
  double rho = 0.0;
  for (std::int64_t j = 0; j < n; ++j) rho += r[std::size_t(j)] * z[std::size_t(j)];

  long long it = 0;
  double res_norm = b_norm;
  while (res_norm / b_norm > options.rel_tol) {
    if (it >= max_iter)
      throw NumericError("solve_diffusion: PCG iteration cap reached", it,
                         res_norm / b_norm);
    st.apply(p, q);
    double pq = 0.0;
    for (std::int64_t j = 0; j < n; ++j) pq += p[std::size_t(j)] * q[std::size_t(j)];
    const double alpha = rho / pq;
    for (std::int64_t j = 0; j < n; ++j) {
      x[std::size_t(j)] += alpha * p[std::size_t(j)];
      r[std::size_t(j)] -= alpha * q[std::size_t(j)];
    }
    res_norm = 0.0;
    for (double v : r) res_norm += v * v;
    res_norm = std::sqrt(res_norm);
    ++it;
    if (res_norm / b_norm <= options.rel_tol) break;
    st.precondition(r, z);
    double rho_new = 0.0;
    for (std::int64_t j = 0; j < n; ++j) rho_new += r[std::size_t(j)] * z[std::size_t(j)];
    const double beta = rho_new / rho;
    rho = rho_new;
    for (std::int64_t j = 0; j < n; ++j)
      p[std::size_t(j)] = z[std::size_t(j)] + beta * p[std::size_t(j)];
  }

  if (stats) *stats = {it, res_norm / b_norm};
  out.p = std::move(x);
  return out;
}

double qoi_point(const PressureField& field, const std::array<double, 3>& x) {
  const Grid& g = field.grid;
  for (int i = 0; i < g.d; ++i)
    if (x[std::size_t(i)] < 0.0 || x[std::size_t(i)] > 1.0)
      throw std::domain_error("qoi_point: point outside the unit cube");

  std::array<int, 3> j0 = {0, 0, 0};
  std::array<double, 3> w = {0.0, 0.0, 0.0};
  for (int i = 0; i < g.d; ++i) {
    const int m = g.m[std::size_t(i)];
    double t = x[std::size_t(i)] * double(m) - 0.5;
    int j = int(std::floor(t));
    double wi = t - double(j);
    if (j < 0) {
      j = 0;
      wi = 0.0;
    } else if (j > m - 2) {
      j = m - 2;
      wi = 1.0;
      if (m == 1) {
        j = 0;
        wi = 0.0;
      }
    }
    j0[std::size_t(i)] = j;
    w[std::size_t(i)] = wi;
  }

  double value = 0.0;
  const int corners = 1 << g.d;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    std::array<int, 3> jj = j0;
    for (int i = 0; i < g.d; ++i) {
      const bool hi = (c >> i) & 1;
      weight *= hi ? w[std::size_t(i)] : 1.0 - w[std::size_t(i)];
      if (hi && g.m[std::size_t(i)] > 1) jj[std::size_t(i)] += 1;
    }
    if (weight == 0.0) continue;
    value += weight * field.p[std::size_t(g.index(jj[0], jj[1], jj[2]))];
  }
  return value;
}

double qoi_flux(const PressureField& field, const FieldSample& k) {
  const Grid& g = field.grid;
  if (g.m[0] < 2) throw std::invalid_argument("qoi_flux: need at least 2 cells in x1");
  if (!field.bc ||
      field.bc->face[0][1].kind != FaceCondition::Kind::Dirichlet)
    throw std::invalid_argument("qoi_flux: x1 = 1 face must be Dirichlet");

  const int mx = g.m[0], my = g.m[1], mz = g.m[2];
  const double h1 = g.h(0);
  // quadratic through the face value and the two nearest cell centers
  const double c_face = 8.0 / (3.0 * h1);
  const double c_near = -3.0 / h1;
  const double c_far = 1.0 / (3.0 * h1);

  double integral = 0.0;
  const double face_weight =
      (g.d > 1 ? g.h(1) : 1.0) * (g.d > 2 ? g.h(2) : 1.0);
  for (int iz = 0; iz < mz; ++iz)
    for (int iy = 0; iy < my; ++iy) {
      const std::array<double, 3> xf = {1.0, g.d > 1 ? g.center(1, iy) : 0.5,
                                        g.d > 2 ? g.center(2, iz) : 0.5};
      const double pb = field.bc->face[0][1].value(xf);
      const double p1 = field.p[std::size_t(g.index(mx - 1, iy, iz))];
      const double p2 = field.p[std::size_t(g.index(mx - 2, iy, iz))];
      const double dpdx = c_face * pb + c_near * p1 + c_far * p2;
      const double kb = k.k[std::size_t(g.index(mx - 1, iy, iz))];
      integral += -kb * dpdx * face_weight;
    }
  return integral;
}

DenseSystem assemble_dense(
    const Grid& grid, const FieldSample& k, const BoundarySpec& bc,
    const std::function<double(const std::array<double, 3>&)>& source) {
  const Stencil st = assemble(grid, k, bc, source);
  const std::int64_t n = grid.cells();
  DenseSystem sys;
  sys.n = n;
  sys.rhs = st.rhs;
  sys.matrix.assign(std::size_t(n * n), 0.0);
  std::vector<double> unit(std::size_t(n), 0.0), column(std::size_t(n), 0.0);
  for (std::int64_t j = 0; j < n; ++j) {
    unit[std::size_t(j)] = 1.0;
    st.apply(unit, column);
    unit[std::size_t(j)] = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
      sys.matrix[std::size_t(i * n + j)] = column[std::size_t(i)];
  }
  return sys;
}

void dump_csv(const PressureField& field, std::ostream& out) {
  const Grid& g = field.grid;
  out << "x,y,z,p\n";
  std::int64_t i = 0;
  for (int iz = 0; iz < g.m[2]; ++iz)
    for (int iy = 0; iy < g.m[1]; ++iy)
      for (int ix = 0; ix < g.m[0]; ++ix, ++i)
        out << g.center(0, ix) << ',' << (g.d > 1 ? g.center(1, iy) : 0.5)
            << ',' << (g.d > 2 ? g.center(2, iz) : 0.5) << ','
            << field.p[std::size_t(i)] << '\n';
}

}  // namespace miq::pde
