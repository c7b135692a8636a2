#ifndef MIQ_ERRORS_HPP
#define MIQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace miq {

// Malformed input file or stream (bad config, bad generating-vector file, ...).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative numerical procedure failed to converge.
struct NumericError : std::runtime_error {
  NumericError(const std::string& msg, long long iterations, double residual)
      : std::runtime_error(msg), iterations(iterations), residual(residual) {}
  long long iterations = 0;
  double residual = 0.0;
};

// A requested computation exceeds a configured resource cap.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace miq

#endif
