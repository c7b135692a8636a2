#include "miq/mindex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "miq/errors.hpp"

namespace miq::mindex {

MultiIndex::MultiIndex(std::vector<int> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("MultiIndex: dimension must be >= 1");
  for (int c : comps_)
    if (c < 0) throw std::invalid_argument("MultiIndex: components must be >= 0");
}

MultiIndex MultiIndex::zeros(int d) { return MultiIndex(std::vector<int>(std::size_t(d), 0)); }

MultiIndex MultiIndex::diagonal(int value, int d) {
  return MultiIndex(std::vector<int>(std::size_t(d), value));
}

int MultiIndex::sum() const {
  int s = 0;
  for (int c : comps_) s += c;
  return s;
}

int MultiIndex::max() const {
  int s = 0;
  for (int c : comps_) s = std::max(s, c);
  return s;
}

MultiIndex MultiIndex::with_component(int i, int value) const {
  std::vector<int> c = comps_;
  c[std::size_t(i)] = value;
  return MultiIndex(std::move(c));
}

bool MultiIndex::dominated_by(const MultiIndex& other) const {
  if (dim() != other.dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if ((*this)[i] > other[i]) return false;
  return true;
}

std::string MultiIndex::to_string() const {
  std::string s;
  for (int i = 0; i < dim(); ++i) {
    if (i) s += '_';
    s += std::to_string((*this)[i]);
  }
  return s;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& idx) const {
  std::size_t h = 0x9E3779B97F4A7C15ull ^ std::size_t(idx.dim());
  for (int i = 0; i < idx.dim(); ++i) {
    h ^= std::size_t(idx[i]) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  }
  return h;
}

void IndexSetSpec::validate() const {
  if (d < 1) throw std::invalid_argument("IndexSetSpec: d must be >= 1");
  if (kind == SetKind::WeightedTotalDegree) {
    if (int(weights.size()) != d)
      throw std::invalid_argument("IndexSetSpec: need one weight per dimension");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w > 0.0 && w <= 1.0))
        throw std::invalid_argument("IndexSetSpec: weights must be in (0,1]");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("IndexSetSpec: weights must sum to 1");
  }
}

namespace {

void enumerate(const IndexSetSpec& spec, int L, std::vector<int>& current, int dim,
               std::vector<MultiIndex>& out) {
  if (dim == spec.d) {
    out.emplace_back(current);
    return;
  }
  for (int j = 0;; ++j) {
    current[std::size_t(dim)] = j;
    bool feasible = true;
    switch (spec.kind) {
      case SetKind::FullTensor:
        feasible = j <= L;
        break;
      case SetKind::TotalDegree: {
        int partial = 0;
        for (int i = 0; i <= dim; ++i) partial += current[std::size_t(i)];
        feasible = partial <= L;
        break;
      }
      case SetKind::WeightedTotalDegree: {
        double partial = 0.0;
        for (int i = 0; i <= dim; ++i)
          partial += spec.weights[std::size_t(i)] * current[std::size_t(i)];
        feasible = partial <= double(L) + 1e-12;
        break;
      }
      case SetKind::Multilevel:
        feasible = false;  // handled separately
        break;
    }
    if (!feasible) break;
    enumerate(spec, L, current, dim + 1, out);
  }
  current[std::size_t(dim)] = 0;
}

}  // namespace

std::vector<MultiIndex> generate_index_set(const IndexSetSpec& spec, int L) {
  spec.validate();
  if (L < 0) throw std::invalid_argument("generate_index_set: L must be >= 0");
  std::vector<MultiIndex> out;
  if (spec.kind == SetKind::Multilevel) {
    for (int j = 0; j <= L; ++j) out.push_back(MultiIndex::diagonal(j, spec.d));
  } else {
    std::vector<int> current(std::size_t(spec.d), 0);
    enumerate(spec, L, current, 0, out);
    std::sort(out.begin(), out.end());
  }
  return out;
}

bool is_admissible(const std::vector<MultiIndex>& set) {
  std::unordered_set<MultiIndex, MultiIndexHash> members(set.begin(), set.end());
  for (const MultiIndex& ell : set)
    for (int i = 0; i < ell.dim(); ++i) {
      if (ell[i] == 0) continue;
      if (!members.count(ell.with_component(i, ell[i] - 1))) return false;
    }
  return true;
}

std::vector<MultiIndex> boundary(const IndexSetSpec& spec, int L) {
  if (L < 0) throw std::invalid_argument("boundary: L must be >= 0");
  std::vector<MultiIndex> cur = generate_index_set(spec, L);
  if (L == 0) return cur;
  std::vector<MultiIndex> prev = generate_index_set(spec, L - 1);
  std::unordered_set<MultiIndex, MultiIndexHash> inner(prev.begin(), prev.end());
  std::vector<MultiIndex> out;
  for (MultiIndex& ell : cur)
    if (!inner.count(ell)) out.push_back(std::move(ell));
  return out;
}

std::vector<std::pair<MultiIndex, int>> corner_expansion(const MultiIndex& ell) {
  std::vector<std::pair<MultiIndex, int>> corners;
  std::vector<int> active;  // dimensions with a positive component
  for (int i = 0; i < ell.dim(); ++i)
    if (ell[i] > 0) active.push_back(i);
  const int n = int(active.size());
  corners.reserve(std::size_t(1) << n);
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> comps(ell.components().begin(), ell.components().end());
    int drops = 0;
    for (int b = 0; b < n; ++b)
      if ((mask >> b) & 1) {
        comps[std::size_t(active[std::size_t(b)])] -= 1;
        ++drops;
      }
    corners.emplace_back(MultiIndex(std::move(comps)), drops % 2 == 0 ? 1 : -1);
  }
  return corners;
}

std::vector<std::pair<MultiIndex, int>> difference_corners(DiffKind kind,
                                                           const MultiIndex& ell) {
  switch (kind) {
    case DiffKind::Tensor:
      return corner_expansion(ell);
    case DiffKind::Diagonal: {
      const int j = ell[0];
      for (int i = 1; i < ell.dim(); ++i)
        if (ell[i] != j)
          throw std::invalid_argument("difference_corners: diagonal index expected");
      std::vector<std::pair<MultiIndex, int>> corners;
      corners.emplace_back(ell, 1);
      if (j > 0) corners.emplace_back(MultiIndex::diagonal(j - 1, ell.dim()), -1);
      return corners;
    }
    case DiffKind::None:
      return {{ell, 1}};
  }
  throw std::logic_error("difference_corners: unknown kind");
}

DeltaSample sample_delta(const Problem& problem, DiffKind kind,
                         const MultiIndex& ell, std::span<const double> xi) {
  if (xi.size() < problem.random_dimension())
    throw std::invalid_argument("sample_delta: xi shorter than the problem dimension");
  DeltaSample out;
  out.ell = ell;
  for (const auto& [tau, sign] : difference_corners(kind, ell)) {
    Problem::Evaluation eval;
    try {
      eval = problem.evaluate(tau, xi);
    } catch (const std::exception& e) {
      throw NumericError("sample_delta at index " + ell.to_string() + ", corner " +
                             tau.to_string() + ": " + e.what(),
                         0, 0.0);
    }
    out.delta += double(sign) * eval.value;
    out.corners.emplace_back(tau, eval.value);
    out.wall_seconds += eval.wall_seconds;
    out.model_cost += problem.cost(tau);
  }
  return out;
}

double delta_cost(const Problem& problem, DiffKind kind, const MultiIndex& ell) {
  double cost = 0.0;
  for (const auto& corner : difference_corners(kind, ell)) cost += problem.cost(corner.first);
  return cost;
}

}  // namespace miq::mindex
