#ifndef MIQ_MINDEX_HPP
#define MIQ_MINDEX_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace miq::mindex {

// d-tuple of non-negative refinement levels.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> comps);
  static MultiIndex zeros(int d);
  static MultiIndex diagonal(int value, int d);

  int dim() const { return int(comps_.size()); }
  int operator[](int i) const { return comps_[std::size_t(i)]; }
  std::span<const int> components() const { return comps_; }
  int sum() const;
  int max() const;

  MultiIndex with_component(int i, int value) const;

  bool operator==(const MultiIndex&) const = default;
  auto operator<=>(const MultiIndex&) const = default;  // lexicographic

  // true when every component is <= the other's (partial order)
  bool dominated_by(const MultiIndex& other) const;

  std::string to_string() const;  // "l1_l2_..."

 private:
  std::vector<int> comps_;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& idx) const;
};

enum class SetKind { FullTensor, TotalDegree, WeightedTotalDegree, Multilevel };

// Rule generating the admissible index sets I(L).  WeightedTotalDegree
// needs weights with sum 1 and 0 < delta_i <= 1; Multilevel re-expresses
// the diagonal {(j,...,j)} as a one-parameter family of levels.
struct IndexSetSpec {
  SetKind kind = SetKind::TotalDegree;
  int d = 1;
  std::vector<double> weights;  // WeightedTotalDegree only

  void validate() const;
};

// All indices satisfying the defining inequality of the rule, sorted
// lexicographically.
std::vector<MultiIndex> generate_index_set(const IndexSetSpec& spec, int L);

// Downward closed: every componentwise-smaller index is present.
bool is_admissible(const std::vector<MultiIndex>& set);

// I(L) \ I(L-1); for L = 0 this is I(0) itself.
std::vector<MultiIndex> boundary(const IndexSetSpec& spec, int L);

// Corners of the tensorized first-order difference at ell: all tau with
// ell - 1 <= tau <= ell componentwise (clamped at zero) and sign
// (-1)^{sum(ell - tau)}.
std::vector<std::pair<MultiIndex, int>> corner_expansion(const MultiIndex& ell);

// How the difference at an index is formed: tensorized corners for the
// multi-index sets, a plain backward difference along the diagonal for the
// multilevel family, or no differencing (single-level sampling).
enum class DiffKind { Tensor, Diagonal, None };

std::vector<std::pair<MultiIndex, int>> difference_corners(DiffKind kind,
                                                           const MultiIndex& ell);

// Evaluation of the quantity of interest on the grid at one index, for one
// realization of the randomness.  Implementations must be deterministic in
// (tau, xi) and safe to call concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  struct Evaluation {
    double value = 0.0;
    double wall_seconds = 0.0;
  };

  virtual Evaluation evaluate(const MultiIndex& tau,
                              std::span<const double> xi) const = 0;
  // Model cost of one evaluation at tau, in cell units.
  virtual double cost(const MultiIndex& tau) const = 0;
  // Number of random coordinates consumed per realization.
  virtual std::size_t random_dimension() const = 0;
  virtual int index_dimension() const = 0;
};

struct DeltaSample {
  MultiIndex ell;
  double delta = 0.0;                                   // signed corner sum
  std::vector<std::pair<MultiIndex, double>> corners;   // per-corner QoI values
  double wall_seconds = 0.0;
  double model_cost = 0.0;  // sum of corner costs, cell units
};

// One realization of the difference at ell: every corner grid is evaluated
// with the same xi.  Solver failures are rethrown with the (ell, corner)
// context attached.
DeltaSample sample_delta(const Problem& problem, DiffKind kind,
                         const MultiIndex& ell, std::span<const double> xi);

// Model cost of one difference sample at ell (sum over corners).
double delta_cost(const Problem& problem, DiffKind kind, const MultiIndex& ell);

}  // namespace miq::mindex

#endif
