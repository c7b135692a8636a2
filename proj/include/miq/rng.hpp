#ifndef MIQ_RNG_HPP
#define MIQ_RNG_HPP

#include <cstdint>

namespace miq {

// Splittable counter-style random stream.  A stream is identified by the
// key words absorbed into it (global seed, index, shift number, purpose
// tag, ...); streams with distinct keys are statistically independent, so
// results do not depend on scheduling or worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) { absorb(seed ^ 0x243F6A8885A308D3ull); }

  RngStream& absorb(std::uint64_t word) {
    state_ = finalize(state_ ^ finalize(word + 0x9E3779B97F4A7C15ull));
    return *this;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return finalize(state_);
  }

  // Uniform draw in [0,1) with 53 random bits.
  double next_uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

// Purpose tags separating the random streams used by the estimators.
enum class StreamTag : std::uint64_t {
  ShiftDraw = 1,  // random shifts for lattice rules
  McSample = 2,   // plain Monte Carlo realizations
  IidPoint = 3,   // i.i.d. replacement points for the QMC test hook
};

}  // namespace miq

#endif
