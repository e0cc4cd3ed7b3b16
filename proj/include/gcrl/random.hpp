// Portable seeded random source.
//
// Draws come from std::mt19937_64, whose output sequence is fixed by the
// standard. The std:: distribution adaptors are implementation defined, so
// the conversions to doubles, bounded integers and normals are done here
// to keep streams identical across standard libraries and platforms.

#ifndef GCRL_RANDOM_HPP
#define GCRL_RANDOM_HPP

#include <cstdint>
#include <random>

namespace gcrl {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seeded random source; identical seeds give identical streams.
inline Rng seeded_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace gcrl

#endif  // GCRL_RANDOM_HPP
