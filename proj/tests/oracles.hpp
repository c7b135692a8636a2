// Independent reference computations used by the tests.  Everything here
// deliberately avoids the code paths under test: the normal CDF is a Taylor
// series, Bessel K comes from its integral representation, the exponential
// kernel spectrum from its transcendental equation.
#ifndef MIQ_TESTS_ORACLES_HPP
#define MIQ_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracles {

// Phi(x) from the Taylor series of erf; accurate to ~1e-14 for |x| <= 4.
inline double normal_cdf_series(double x) {
  const double z = x / std::sqrt(2.0);
  double term = z;
  double sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / double(n);
    const double add = term / double(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  const double erf = 2.0 / std::sqrt(M_PI) * sum;
  return 0.5 * (1.0 + erf);
}

// Inverse of the series CDF by bisection.
inline double inv_normal_bisect(double u) {
  double lo = -8.0, hi = 8.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf_series(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by composite Simpson.
inline double bessel_k_integral(double nu, double x) {
  // upper limit where exp(-x cosh t) has fully decayed
  const double T = std::log(2.0 * 800.0 / x + 2.0) + 2.0;
  const int n = 20000;  // even
  const double h = T / n;
  auto f = [&](double t) { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); };
  double sum = f(0.0) + f(T);
  for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Spectrum of sigma2 * exp(-|x-y|/lambda) on an interval of length 1:
// eigenvalues 2c/(w^2+c^2) with w running over the roots of the even
// family w tan(w/2) = c and the odd family w = -c tan(w/2), c = 1/lambda.
inline std::vector<double> exp_kernel_eigenvalues(double lambda, double sigma2,
                                                  std::size_t count) {
  const double c = 1.0 / lambda;
  auto bisect = [](double lo, double hi, auto g) {
    double glo = g(lo);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  std::vector<double> ws;
  const double pi = M_PI;
  const double eps = 1e-9;
  for (std::size_t n = 0; ws.size() < count + 2; ++n) {
    // even root in w/2 in (n pi, n pi + pi/2)
    const double wlo = 2.0 * double(n) * pi + eps;
    const double whi = 2.0 * double(n) * pi + pi - eps;
    ws.push_back(bisect(wlo, whi, [&](double w) { return w * std::tan(w / 2.0) - c; }));
    if (n >= 1) {
      // odd root in w/2 in (n pi - pi/2, n pi)
      const double vlo = (2.0 * double(n) - 1.0) * pi + eps;
      const double vhi = 2.0 * double(n) * pi - eps;
      ws.push_back(bisect(vlo, vhi, [&](double w) { return w + c * std::tan(w / 2.0); }));
    }
  }
  std::vector<double> thetas;
  for (double w : ws) thetas.push_back(sigma2 * 2.0 * c / (w * w + c * c));
  std::sort(thetas.begin(), thetas.end(), std::greater<double>());
  thetas.resize(count);
  return thetas;
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ls_slope: bad input");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

// Fitted log-log decay exponent of values over ranks [r_lo, r_hi] (1-based).
inline double loglog_decay_slope(const std::vector<double>& values, std::size_t r_lo,
                                 std::size_t r_hi) {
  std::vector<double> x, y;
  for (std::size_t r = r_lo; r <= r_hi && r <= values.size(); ++r) {
    if (values[r - 1] <= 0.0) break;
    x.push_back(std::log(double(r)));
    y.push_back(std::log(values[r - 1]));
  }
  return ls_slope(x, y);
}

}  // namespace oracles

#endif
