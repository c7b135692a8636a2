#include "miq/qmc.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "miq/errors.hpp"

namespace miq::qmc {

LatticeRule::LatticeRule(std::vector<std::uint64_t> z) : z_(std::move(z)) {
  if (z_.empty()) throw std::invalid_argument("generating vector is empty");
  for (auto v : z_)
    if (v < 1) throw std::invalid_argument("generating vector entry < 1");
}

LatticeRule load_generating_vector(std::istream& in) {
  std::vector<std::uint64_t> z;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // tolerate trailing whitespace / CR
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos)
      throw FormatError("vector file: blank line at line " + std::to_string(line_no));
    const std::string tok = line.substr(start);
    if (tok[0] == '-')
      throw FormatError("vector file: entry < 1 at line " + std::to_string(line_no));
    std::uint64_t value = 0;
    std::size_t consumed = 0;
    try {
      value = std::stoull(tok, &consumed, 10);
    } catch (const std::exception&) {
      throw FormatError("vector file: not an integer at line " + std::to_string(line_no));
    }
    if (consumed != tok.size())
      throw FormatError("vector file: not an integer at line " + std::to_string(line_no));
    if (value < 1)
      throw FormatError("vector file: entry < 1 at line " + std::to_string(line_no));
    z.push_back(value);
  }
  if (z.empty()) throw FormatError("empty vector file");
  return LatticeRule(std::move(z));
}

namespace detail {
// Provided by the generated translation unit embedding the bundled table.
const char* default_lattice_text();
}  // namespace detail

const LatticeRule& default_lattice() {
  static const LatticeRule rule = [] {
    std::istringstream in(detail::default_lattice_text());
    return load_generating_vector(in);
  }();
  return rule;
}

std::vector<double> lattice_point(const LatticeRule& rule, std::uint64_t N,
                                  std::uint64_t n, std::size_t s) {
  if (N == 0 || N > (std::uint64_t(1) << 32))
    throw std::invalid_argument("lattice_point: N must be in [1, 2^32]");
  if (n >= N) throw std::invalid_argument("lattice_point: n out of range [0, N)");
  if (s == 0 || s > rule.dimension())
    throw std::invalid_argument("lattice_point: dimension exceeds generating vector");
  std::vector<double> t(s);
  const double inv_n = 1.0 / double(N);
  for (std::size_t j = 0; j < s; ++j) {
    const std::uint64_t zj = rule.component(j) % N;
    t[j] = double((n * zj) % N) * inv_n;
  }
  return t;
}

std::vector<double> apply_shift(std::span<const double> t,
                                std::span<const double> shift) {
  if (t.size() != shift.size())
    throw std::invalid_argument("apply_shift: dimension mismatch");
  std::vector<double> out(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    double v = t[j] + shift[j];
    if (v >= 1.0) v -= 1.0;
    out[j] = v;
  }
  return out;
}

std::vector<double> draw_shift(RngStream& stream, std::size_t s) {
  if (s == 0) throw std::invalid_argument("draw_shift: dimension must be >= 1");
  std::vector<double> shift(s);
  for (auto& v : shift) v = stream.next_uniform01();
  return shift;
}

double inv_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("inv_normal_cdf: argument must be in (0,1)");

  // Acklam's coefficients, max relative error ~1.15e-9 before refinement.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against Phi computed from erfc.
  static const double sqrt2 = std::sqrt(2.0);
  static const double sqrt_2pi = std::sqrt(8.0 * std::atan(1.0));
  const double err = 0.5 * std::erfc(-x / sqrt2) - u;
  const double t = err * sqrt_2pi * std::exp(0.5 * x * x);
  x -= t / (1.0 + 0.5 * x * t);
  return x;
}

std::vector<double> qmc_normal_sample(const LatticeRule& rule, std::uint64_t N,
                                      std::uint64_t n,
                                      std::span<const double> shift,
                                      std::size_t s) {
  if (shift.size() != s)
    throw std::invalid_argument("qmc_normal_sample: shift dimension mismatch");
  std::vector<double> u = apply_shift(lattice_point(rule, N, n, s), shift);
  for (auto& v : u) {
    if (v <= 0.0) v = 0x1.0p-64;
    v = inv_normal_cdf(v);
  }
  return u;
}

}  // namespace miq::qmc
