#include "miq/problem.hpp"

#include <chrono>
#include <stdexcept>

namespace miq {

DiffusionProblem::DiffusionProblem(std::shared_ptr<const field::KLBasis> basis,
                                   Qoi qoi, std::array<int, 3> m0,
                                   std::array<int, 3> M, double solver_rel_tol)
    : basis_(std::move(basis)),
      qoi_(qoi),
      m0_(m0),
      M_(M),
      solver_rel_tol_(solver_rel_tol) {
  if (!basis_) throw std::invalid_argument("DiffusionProblem: missing KL basis");
  bc_ = std::make_shared<pde::BoundarySpec>(
      qoi_ == Qoi::CenterPressure ? pde::BoundarySpec::all_dirichlet(0.0)
                                  : pde::BoundarySpec::flow_cell());
}

pde::Grid DiffusionProblem::grid_for(const mindex::MultiIndex& tau) const {
  if (tau.dim() != basis_->dimension())
    throw std::invalid_argument("DiffusionProblem: index dimension mismatch");
  std::array<int, 3> level = {0, 0, 0};
  for (int i = 0; i < tau.dim(); ++i) level[std::size_t(i)] = tau[i];
  return pde::build_grid(m0_, M_, level, basis_->dimension());
}

mindex::Problem::Evaluation DiffusionProblem::evaluate(
    const mindex::MultiIndex& tau, std::span<const double> xi) const {
  const auto t0 = std::chrono::steady_clock::now();
  const pde::Grid grid = grid_for(tau);
  const pde::FieldSample k = field::evaluate_field(*basis_, xi, grid);
  const auto source = [this](const std::array<double, 3>&) {
    return qoi_ == Qoi::CenterPressure ? 1.0 : 0.0;
  };
  pde::SolveOptions options;
  options.rel_tol = solver_rel_tol_;
  const pde::PressureField p = pde::solve_diffusion(grid, k, bc_, source, options);

  Evaluation out;
  if (qoi_ == Qoi::CenterPressure) {
    std::array<double, 3> mid = {0.5, 0.5, 0.5};
    out.value = pde::qoi_point(p, mid);
  } else {
    out.value = pde::qoi_flux(p, k);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double DiffusionProblem::cost(const mindex::MultiIndex& tau) const {
  return double(grid_for(tau).cells());
}

std::size_t DiffusionProblem::random_dimension() const {
  return std::size_t(basis_->term_count());
}

}  // namespace miq
