#include <doctest.h>

#include <cmath>
#include <sstream>

#include "miq/field.hpp"
#include "miq/pde.hpp"
#include "miq/qmc.hpp"
#include "miq/rng.hpp"
#include "oracles.hpp"

using namespace miq;
using field::MaternParams;

TEST_SUITE_BEGIN("field");

TEST_CASE("matern_cov at zero distance equals the variance") {
  const MaternParams params{0.3, 2.5, 1.0, 1};
  CHECK(field::matern_cov(0.0, params) == 2.5);
  CHECK_THROWS_AS(field::matern_cov(-0.1, params), std::domain_error);
}

TEST_CASE("matern_cov reduces to the exponential kernel at nu = 1/2") {
  const MaternParams params{0.075, 1.0, 0.5, 1};
  CHECK(field::matern_cov(0.075, params) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  for (int i = 1; i <= 40; ++i) {
    const double r = 0.05 * i;
    const double expected = std::exp(-r / params.correlation_length);
    CHECK(field::matern_cov(r, params) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("matern_cov matches the Bessel integral oracle") {
  // nu = 2.5 goes through the half-integer closed form
  const MaternParams smooth{1.0, 1.0, 2.5, 1};
  for (double r : {0.2, 0.5, 1.0, 2.0}) {
    const double arg = std::sqrt(5.0) * r;
    const double oracle = std::pow(2.0, 1.0 - 2.5) / std::tgamma(2.5) *
                          std::pow(arg, 2.5) * oracles::bessel_k_integral(2.5, arg);
    CHECK(field::matern_cov(r, smooth) == doctest::Approx(oracle).epsilon(1e-9));
  }
  // nu = 1 exercises the general-order path
  const MaternParams rough{0.3, 1.0, 1.0, 1};
  for (double r : {0.1, 0.3, 0.9}) {
    const double arg = std::sqrt(2.0) * r / 0.3;
    const double oracle = std::pow(2.0, 0.0) / std::tgamma(1.0) * arg *
                          oracles::bessel_k_integral(1.0, arg);
    CHECK(field::matern_cov(r, rough) == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("matern_cov is maximal at zero") {
  const MaternParams params{0.5, 1.7, 1.3, 1};
  for (int i = 1; i <= 30; ++i)
    CHECK(field::matern_cov(0.1 * i, params) <= params.variance);
}

TEST_CASE("1D eigenproblem reproduces the analytic exponential spectrum") {
  const MaternParams params{1.0, 1.0, 0.5, 1};
  const auto pairs = field::solve_1d_eigenproblem(params, 200);
  const auto analytic = oracles::exp_kernel_eigenvalues(1.0, 1.0, 5);
  CHECK(pairs[0].theta == doctest::Approx(analytic[0]).epsilon(0.01));
  // the next few should already be close as well
  CHECK(pairs[1].theta == doctest::Approx(analytic[1]).epsilon(0.02));
  CHECK(pairs[2].theta == doctest::Approx(analytic[2]).epsilon(0.05));
}

TEST_CASE("1D eigenproblem trace and ordering invariants") {
  const MaternParams params{0.3, 1.0, 1.0, 1};
  const auto pairs = field::solve_1d_eigenproblem(params, 128);
  double trace = 0.0;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    trace += pairs[r].theta;
    CHECK(pairs[r].theta >= 0.0);
    if (r > 0) CHECK(pairs[r].theta <= pairs[r - 1].theta);
    // unit discrete L2 norm
    double norm = 0.0;
    for (double v : pairs[r].table) norm += v * v;
    norm /= double(pairs[r].table.size());
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(trace == doctest::Approx(params.variance).epsilon(1e-10));
  CHECK_THROWS_AS(field::solve_1d_eigenproblem(params, 1), std::invalid_argument);
}

TEST_CASE("kl basis truncation for the smooth preset in 3D") {
  const MaternParams f1{1.0, 1.0, 2.5, 1};
  const field::KLBasis basis = field::build_kl_basis(f1, 3, 128, 1e-3);
  CHECK(basis.term_count() >= 8);
  CHECK(basis.term_count() <= 20);
  // descending eigenvalues; every retained term exceeds the ratio cutoff
  const auto& theta = basis.eigenvalues();
  for (std::size_t r = 1; r < theta.size(); ++r) CHECK(theta[r] <= theta[r - 1]);
  CHECK(theta.back() / theta.front() > 1e-3);
}

TEST_CASE("kl basis in 1D equals the truncated eigenproblem") {
  const MaternParams params{0.3, 1.0, 1.0, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 1, 64, 1e-2);
  const auto pairs = field::solve_1d_eigenproblem(params, 64);
  REQUIRE(basis.term_count() >= 2);
  for (int r = 0; r < basis.term_count(); ++r)
    CHECK(basis.eigenvalue(r) == doctest::Approx(pairs[std::size_t(r)].theta).epsilon(1e-12));
  // same truncation rule: last retained term above the cutoff, next at or below
  const double tol = 1e-2 * pairs[0].theta;
  CHECK(basis.eigenvalue(basis.term_count() - 1) > tol);
  CHECK(pairs[std::size_t(basis.term_count())].theta <= tol);
}

TEST_CASE("kl eigenvalue decay rate for the rough kernel in 1D") {
  const MaternParams f3{0.075, 1.0, 0.5, 1};
  const auto pairs = field::solve_1d_eigenproblem(f3, 512);
  std::vector<double> theta;
  for (const auto& p : pairs) theta.push_back(p.theta);
  const double slope = oracles::loglog_decay_slope(theta, 10, 100);
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.15));  // -(2 nu + 1), +-0.3
}

TEST_CASE("build_kl_basis validates inputs") {
  const MaternParams params{1.0, 1.0, 0.5, 1};
  CHECK_THROWS_AS(field::build_kl_basis(params, 4, 64, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(field::build_kl_basis(params, 2, 64, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(field::build_kl_basis(params, 2, 64, 1.5), std::invalid_argument);
}

namespace {

pde::Grid small_grid(int d, int cells_per_dim) {
  pde::Grid g;
  g.d = d;
  for (int i = 0; i < d; ++i) g.m[std::size_t(i)] = cells_per_dim;
  return g;
}

}  // namespace

TEST_CASE("evaluate_field at xi = 0 is identically one") {
  const MaternParams params{1.0, 1.0, 2.5, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 64, 1e-2);
  const std::vector<double> xi(std::size_t(basis.term_count()), 0.0);
  const pde::FieldSample sample = field::evaluate_field(basis, xi, small_grid(2, 8));
  for (double v : sample.k) CHECK(v == 1.0);
}

TEST_CASE("evaluate_field single-term expansion") {
  const MaternParams params{1.0, 1.0, 2.5, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 64, 1e-2);
  REQUIRE(basis.term_count() >= 1);
  const pde::Grid grid = small_grid(2, 4);
  std::vector<double> xi(std::size_t(basis.term_count()), 0.0);
  const double c = 1.7;
  xi[0] = c;
  const pde::FieldSample sample = field::evaluate_field(basis, xi, grid);
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix) {
      const std::vector<double> x{grid.center(0, ix), grid.center(1, iy)};
      const double z = c * std::sqrt(basis.eigenvalue(0)) * basis.eigenfunction(0, x);
      CHECK(sample.k[std::size_t(grid.index(ix, iy, 0))] ==
            doctest::Approx(std::exp(z)).epsilon(1e-12));
    }
}

TEST_CASE("evaluate_field is linear in xi before exponentiation") {
  const MaternParams params{0.3, 1.0, 1.0, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 64, 1e-2);
  const pde::Grid grid = small_grid(2, 8);
  RngStream stream(11);
  std::vector<double> xi(std::size_t(basis.term_count()));
  for (auto& v : xi) v = 2.0 * stream.next_uniform01() - 1.0;
  std::vector<double> xi2 = xi;
  const double a = 2.5;
  for (auto& v : xi2) v *= a;
  const auto s1 = field::evaluate_field(basis, xi, grid);
  const auto s2 = field::evaluate_field(basis, xi2, grid);
  for (std::size_t i = 0; i < s1.k.size(); ++i)
    CHECK(std::log(s2.k[i]) == doctest::Approx(a * std::log(s1.k[i])).epsilon(1e-10));
}

TEST_CASE("evaluate_field rejects short xi") {
  const MaternParams params{0.3, 1.0, 1.0, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 64, 1e-2);
  std::vector<double> xi(std::size_t(basis.term_count() - 1), 0.0);
  CHECK_THROWS_AS(field::evaluate_field(basis, xi, small_grid(2, 4)),
                  std::invalid_argument);
}

TEST_CASE("field variance at a point matches the truncated expansion") {
  const MaternParams params{1.0, 1.0, 2.5, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 128, 1e-3);
  const pde::Grid grid = small_grid(2, 4);
  const std::vector<double> x{grid.center(0, 1), grid.center(1, 2)};

  double expected = 0.0;
  for (int r = 0; r < basis.term_count(); ++r) {
    const double f = basis.eigenfunction(r, x);
    expected += basis.eigenvalue(r) * f * f;
  }

  const int draws = 100000;
  RngStream stream(5);
  double sum = 0.0, sum_sq = 0.0;
  std::vector<double> xi(std::size_t(basis.term_count()));
  for (int n = 0; n < draws; ++n) {
    double z = 0.0;
    for (int r = 0; r < basis.term_count(); ++r) {
      double u = stream.next_uniform01();
      if (u <= 0.0) u = 0x1.0p-64;
      xi[std::size_t(r)] = qmc::inv_normal_cdf(u);
      z += std::sqrt(basis.eigenvalue(r)) * basis.eigenfunction(r, x) *
           xi[std::size_t(r)];
    }
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / draws;
  const double var = (sum_sq - draws * mean * mean) / (draws - 1);
  // three standard errors of a sample variance
  const double se = expected * std::sqrt(2.0 / double(draws - 1));
  CHECK(std::abs(var - expected) <= 3.0 * se);
}

TEST_CASE("kl basis save/load round trip") {
  const MaternParams params{0.3, 1.0, 1.0, 1};
  const field::KLBasis basis = field::build_kl_basis(params, 2, 32, 1e-2);
  std::stringstream buffer;
  basis.save(buffer);
  const field::KLBasis loaded = field::KLBasis::load(buffer);
  REQUIRE(loaded.term_count() == basis.term_count());
  CHECK(loaded.dimension() == basis.dimension());
  for (int r = 0; r < basis.term_count(); ++r)
    CHECK(loaded.eigenvalue(r) == basis.eigenvalue(r));
  const std::vector<double> x{0.37, 0.81};
  for (int r = 0; r < basis.term_count(); ++r)
    CHECK(loaded.eigenfunction(r, x) == doctest::Approx(basis.eigenfunction(r, x)).epsilon(1e-15));
}

TEST_SUITE_END();
