#ifndef MIQ_PROBLEM_HPP
#define MIQ_PROBLEM_HPP

#include <array>
#include <memory>

#include "miq/field.hpp"
#include "miq/mindex.hpp"
#include "miq/pde.hpp"

namespace miq {

enum class Qoi {
  CenterPressure,  // p at the domain midpoint; all-Dirichlet 0, source 1
  OutflowFlux,     // effective permeability through x1 = 1; flow cell, source 0
};

// Lognormal diffusion problem on the unit cube: samples the coefficient
// from a KL basis, solves the finite-volume system on the grid of the
// requested index and applies the quantity of interest.
class DiffusionProblem final : public mindex::Problem {
 public:
  DiffusionProblem(std::shared_ptr<const field::KLBasis> basis, Qoi qoi,
                   std::array<int, 3> m0, std::array<int, 3> M,
                   double solver_rel_tol = 1e-10);

  Evaluation evaluate(const mindex::MultiIndex& tau,
                      std::span<const double> xi) const override;
  double cost(const mindex::MultiIndex& tau) const override;
  std::size_t random_dimension() const override;
  int index_dimension() const override { return basis_->dimension(); }

  const field::KLBasis& basis() const { return *basis_; }
  pde::Grid grid_for(const mindex::MultiIndex& tau) const;
  Qoi qoi() const { return qoi_; }

 private:
  std::shared_ptr<const field::KLBasis> basis_;
  Qoi qoi_;
  std::array<int, 3> m0_;
  std::array<int, 3> M_;
  double solver_rel_tol_;
  std::shared_ptr<const pde::BoundarySpec> bc_;
};

}  // namespace miq

#endif
