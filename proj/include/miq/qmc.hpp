#ifndef MIQ_QMC_HPP
#define MIQ_QMC_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "miq/rng.hpp"

namespace miq::qmc {

// Generating vector of a rank-1 lattice rule.  Immutable after load.
class LatticeRule {
 public:
  explicit LatticeRule(std::vector<std::uint64_t> z);

  std::size_t dimension() const { return z_.size(); }
  std::uint64_t component(std::size_t j) const { return z_[j]; }
  std::span<const std::uint64_t> generating_vector() const { return z_; }

 private:
  std::vector<std::uint64_t> z_;
};

// Reads a generating vector: plain text, one base-10 integer per line,
// all entries >= 1.  Throws FormatError naming the offending line.
LatticeRule load_generating_vector(std::istream& in);

// Bundled default vector (3600 dimensions, built for point counts up to 2^13).
const LatticeRule& default_lattice();

// t_n = frac(n z / N), first s components, computed in exact integer
// arithmetic as (n * (z mod N)) mod N over N.  Requires 0 <= n < N <= 2^32.
std::vector<double> lattice_point(const LatticeRule& rule, std::uint64_t N,
                                  std::uint64_t n, std::size_t s);

// Componentwise frac(t + shift); result stays in [0,1).
std::vector<double> apply_shift(std::span<const double> t,
                                std::span<const double> shift);

// s uniform [0,1) draws from the given stream.
std::vector<double> draw_shift(RngStream& stream, std::size_t s);

// Inverse of the standard normal CDF.  Acklam's rational approximation
// followed by one Halley step; |Phi(result) - u| is well below 1.5e-9.
double inv_normal_cdf(double u);

// Standard-normal vector Phi^{-1}(frac(t_n + shift)).  Components that land
// exactly on 0 after shifting are nudged to 2^-64 so the inverse CDF stays
// finite.
std::vector<double> qmc_normal_sample(const LatticeRule& rule, std::uint64_t N,
                                      std::uint64_t n,
                                      std::span<const double> shift,
                                      std::size_t s);

}  // namespace miq::qmc

#endif
