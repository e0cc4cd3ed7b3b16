// Synthetic temporal union-of-subspaces sequences and feature-level noise.

#ifndef GCRL_SYNTHDATA_HPP
#define GCRL_SYNTHDATA_HPP

#include "gcrl/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gcrl {

enum class NoiseMode { None, Iid, PiecewiseFixed, PiecewiseRandom };

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& text);

struct SegmentSpec {
  int subspace = 0;
  int length = 0;
};

struct SynthSpec {
  int n = 50;
  int M = 2;
  std::vector<int> dims;               // one entry per subspace
  std::vector<SegmentSpec> segments;   // temporal order
  double noise_sigma = 0.0;
  NoiseMode noise_mode = NoiseMode::None;
  std::uint64_t seed = 0;

  int total_length() const;
  void validate() const;
};

/// M subspaces of equal dimension, `repeats` passes over subspaces
/// 0..M-1, each segment `segment_length` frames long.
SynthSpec cyclic_spec(int n, int M, int dim, int segment_length, int repeats,
                      std::uint64_t seed);

/// Clean sequence: frames of segment m lie in the span of a nonnegative
/// n x dim_m generator with nonnegative coefficients, scaled into [0, 1].
FeatureSequence generate(const SynthSpec& spec);

/// Relative noise scale of each of the four feature blocks.
inline constexpr double kStaircase[4] = {0.5, 1.0, 1.5, 2.0};

/// Pre-clip additive perturbation for an n x N sequence under spec's mode.
Matrix noise_field(const SynthSpec& spec, Eigen::Index n, Eigen::Index frames);

/// Adds noise_field and clips back to [0, 1]. Labels are carried over.
FeatureSequence add_noise(const FeatureSequence& seq, const SynthSpec& spec);

/// generate followed by add_noise when a noise mode and sigma are set.
FeatureSequence generate_noisy(const SynthSpec& spec);

}  // namespace gcrl

#endif  // GCRL_SYNTHDATA_HPP
