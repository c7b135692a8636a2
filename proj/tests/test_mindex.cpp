#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "miq/mindex.hpp"
#include "miq/problem.hpp"
#include "miq/qmc.hpp"
#include "miq/rng.hpp"

using namespace miq;
using mindex::IndexSetSpec;
using mindex::MultiIndex;
using mindex::SetKind;

TEST_SUITE_BEGIN("mindex");

namespace {

std::set<std::vector<int>> as_set(const std::vector<MultiIndex>& indices) {
  std::set<std::vector<int>> out;
  for (const MultiIndex& idx : indices)
    out.insert(std::vector<int>(idx.components().begin(), idx.components().end()));
  return out;
}

}  // namespace

TEST_CASE("generate_index_set enumerations") {
  const IndexSetSpec td{SetKind::TotalDegree, 2, {}};
  CHECK(as_set(mindex::generate_index_set(td, 2)) ==
        std::set<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});

  const IndexSetSpec ft{SetKind::FullTensor, 2, {}};
  CHECK(as_set(mindex::generate_index_set(ft, 1)) ==
        std::set<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});

  const IndexSetSpec wtd{SetKind::WeightedTotalDegree, 2, {0.5, 0.5}};
  CHECK(as_set(mindex::generate_index_set(wtd, 1)) ==
        std::set<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});

  const IndexSetSpec ml{SetKind::Multilevel, 2, {}};
  CHECK(as_set(mindex::generate_index_set(ml, 2)) ==
        std::set<std::vector<int>>{{0, 0}, {1, 1}, {2, 2}});

  IndexSetSpec bad{SetKind::WeightedTotalDegree, 2, {0.9, 0.9}};
  CHECK_THROWS_AS(mindex::generate_index_set(bad, 1), std::invalid_argument);
}

TEST_CASE("index sets are nested across L") {
  for (SetKind kind : {SetKind::FullTensor, SetKind::TotalDegree, SetKind::Multilevel}) {
    const IndexSetSpec spec{kind, 3, {}};
    for (int L = 1; L <= 3; ++L) {
      const auto prev = as_set(mindex::generate_index_set(spec, L - 1));
      const auto cur = as_set(mindex::generate_index_set(spec, L));
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      CHECK(cur.size() > prev.size());
    }
  }
}

TEST_CASE("is_admissible detects gaps") {
  CHECK(mindex::is_admissible({MultiIndex({0, 0}), MultiIndex({1, 0})}));
  CHECK_FALSE(mindex::is_admissible({MultiIndex({1, 1})}));

  for (SetKind kind : {SetKind::FullTensor, SetKind::TotalDegree}) {
    const IndexSetSpec spec{kind, 2, {}};
    CHECK(mindex::is_admissible(mindex::generate_index_set(spec, 3)));
  }
  const IndexSetSpec wtd{SetKind::WeightedTotalDegree, 3, {0.2, 0.3, 0.5}};
  CHECK(mindex::is_admissible(mindex::generate_index_set(wtd, 2)));

  // the multilevel family is admissible in its one-parameter form
  const IndexSetSpec ml{SetKind::Multilevel, 1, {}};
  CHECK(mindex::is_admissible(mindex::generate_index_set(ml, 3)));
}

TEST_CASE("boundary is the difference of consecutive sets") {
  const IndexSetSpec td{SetKind::TotalDegree, 2, {}};
  CHECK(as_set(mindex::boundary(td, 2)) ==
        std::set<std::vector<int>>{{2, 0}, {1, 1}, {0, 2}});

  const IndexSetSpec ft{SetKind::FullTensor, 2, {}};
  CHECK(as_set(mindex::boundary(ft, 1)) ==
        std::set<std::vector<int>>{{1, 0}, {0, 1}, {1, 1}});

  const IndexSetSpec ml{SetKind::Multilevel, 2, {}};
  CHECK(as_set(mindex::boundary(ml, 3)) == std::set<std::vector<int>>{{3, 3}});

  CHECK(as_set(mindex::boundary(td, 0)) == std::set<std::vector<int>>{{0, 0}});
}

TEST_CASE("corner_expansion signs and clamping") {
  const auto corners = mindex::corner_expansion(MultiIndex({1, 2}));
  std::set<std::pair<std::vector<int>, int>> got;
  for (const auto& [tau, sign] : corners)
    got.insert({std::vector<int>(tau.components().begin(), tau.components().end()), sign});
  CHECK(got == std::set<std::pair<std::vector<int>, int>>{
                   {{1, 2}, 1}, {{0, 2}, -1}, {{1, 1}, -1}, {{0, 1}, 1}});

  const auto origin = mindex::corner_expansion(MultiIndex({0, 0}));
  REQUIRE(origin.size() == 1);
  CHECK(origin[0].second == 1);

  const auto clamped = mindex::corner_expansion(MultiIndex({2, 0, 1}));
  CHECK(clamped.size() == 4);
  for (const auto& [tau, sign] : clamped) CHECK(tau[1] == 0);
}

TEST_CASE("corner signs annihilate constants") {
  for (const auto& comps :
       {std::vector<int>{1, 2}, std::vector<int>{3, 0, 1}, std::vector<int>{2, 2, 2}}) {
    int sum = 0;
    for (const auto& [tau, sign] : mindex::corner_expansion(MultiIndex(comps))) sum += sign;
    CHECK(sum == 0);
  }
  int sum = 0;
  for (const auto& [tau, sign] : mindex::corner_expansion(MultiIndex({0, 0, 0}))) sum += sign;
  CHECK(sum == 1);
}

namespace {

// deterministic mock: value depends only on the grid index
class MockProblem final : public mindex::Problem {
 public:
  explicit MockProblem(int d, std::function<double(const MultiIndex&)> fn)
      : d_(d), fn_(std::move(fn)) {}
  Evaluation evaluate(const MultiIndex& tau, std::span<const double>) const override {
    return {fn_(tau), 0.0};
  }
  double cost(const MultiIndex& tau) const override {
    double c = 1.0;
    for (int i = 0; i < tau.dim(); ++i) c *= 4.0 * std::pow(2.0, tau[i]);
    return c;
  }
  std::size_t random_dimension() const override { return 1; }
  int index_dimension() const override { return d_; }

 private:
  int d_;
  std::function<double(const MultiIndex&)> fn_;
};

std::shared_ptr<field::KLBasis> smooth_basis(int d) {
  return std::make_shared<field::KLBasis>(
      field::build_kl_basis({1.0, 1.0, 2.5, 1}, d, 128, 1e-3));
}

std::vector<double> random_xi(std::size_t s, std::uint64_t seed) {
  RngStream stream(seed);
  std::vector<double> xi(s);
  for (auto& v : xi) {
    double u = stream.next_uniform01();
    if (u <= 0.0) u = 0x1.0p-64;
    v = qmc::inv_normal_cdf(u);
  }
  return xi;
}

}  // namespace

TEST_CASE("difference of a grid-independent quantity vanishes") {
  const MockProblem constant(2, [](const MultiIndex&) { return 3.0; });
  const std::vector<double> xi{0.0};
  const auto at_zero = mindex::sample_delta(constant, mindex::DiffKind::Tensor,
                                            MultiIndex({0, 0}), xi);
  CHECK(at_zero.delta == 3.0);
  for (const auto& comps : {std::vector<int>{1, 0}, std::vector<int>{1, 1},
                            std::vector<int>{2, 1}}) {
    const auto sample = mindex::sample_delta(constant, mindex::DiffKind::Tensor,
                                             MultiIndex(comps), xi);
    CHECK(sample.delta == 0.0);
  }
}

TEST_CASE("sample_delta accounting and determinism") {
  auto basis = smooth_basis(2);
  const DiffusionProblem problem(basis, Qoi::CenterPressure, {4, 4, 4}, {2, 2, 2});
  const std::vector<double> xi(problem.random_dimension(), 0.0);

  const auto sample = mindex::sample_delta(problem, mindex::DiffKind::Tensor,
                                           MultiIndex({1, 1}), xi);
  CHECK(sample.corners.size() == 4);
  // model cost is the sum of the corner cell counts: 64 + 32 + 32 + 16
  CHECK(sample.model_cost == 144.0);
  CHECK(sample.model_cost ==
        mindex::delta_cost(problem, mindex::DiffKind::Tensor, MultiIndex({1, 1})));

  const auto replay = mindex::sample_delta(problem, mindex::DiffKind::Tensor,
                                           MultiIndex({1, 1}), xi);
  CHECK(sample.delta == replay.delta);

  // level-zero difference is the plain coarse value
  const auto base = mindex::sample_delta(problem, mindex::DiffKind::Tensor,
                                         MultiIndex({0, 0}), xi);
  CHECK(base.delta == base.corners[0].second);
}

TEST_CASE("diagonal differences for the multilevel family") {
  const MockProblem levels(2, [](const MultiIndex& tau) { return double(tau[0]); });
  const std::vector<double> xi{0.0};
  const auto d0 = mindex::sample_delta(levels, mindex::DiffKind::Diagonal,
                                       MultiIndex({0, 0}), xi);
  CHECK(d0.delta == 0.0);
  CHECK(d0.corners.size() == 1);
  const auto d2 = mindex::sample_delta(levels, mindex::DiffKind::Diagonal,
                                       MultiIndex({2, 2}), xi);
  CHECK(d2.delta == 1.0);  // G_2 - G_1
  CHECK(d2.corners.size() == 2);
}

TEST_CASE("telescoping sum over a full-tensor set reproduces the fine value") {
  auto basis = smooth_basis(2);
  const DiffusionProblem problem(basis, Qoi::CenterPressure, {4, 4, 4}, {2, 2, 2});
  const IndexSetSpec ft{SetKind::FullTensor, 2, {}};
  const int L = 1;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const std::vector<double> xi = random_xi(problem.random_dimension(), seed);
    double sum = 0.0;
    for (const MultiIndex& ell : mindex::generate_index_set(ft, L))
      sum += mindex::sample_delta(problem, mindex::DiffKind::Tensor, ell, xi).delta;
    const double direct = problem.evaluate(MultiIndex::diagonal(L, 2), xi).value;
    CHECK(std::abs(sum - direct) <= 1e-10 * std::abs(direct));
  }
}

TEST_CASE("sample_delta validates the xi length") {
  auto basis = smooth_basis(2);
  const DiffusionProblem problem(basis, Qoi::CenterPressure, {4, 4, 4}, {2, 2, 2});
  const std::vector<double> xi(problem.random_dimension() - 1, 0.0);
  CHECK_THROWS_AS(mindex::sample_delta(problem, mindex::DiffKind::Tensor,
                                       MultiIndex({0, 0}), xi),
                  std::invalid_argument);
}

TEST_SUITE_END();
