#include "gcrl/graph.hpp"
#include "gcrl/synthdata.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace gcrl {
namespace {

Matrix segment_block(const FeatureSequence& seq, int label) {
  std::vector<Eigen::Index> cols;
  for (std::size_t t = 0; t < seq.labels->size(); ++t) {
    if ((*seq.labels)[t] == label) cols.push_back(static_cast<Eigen::Index>(t));
  }
  Matrix block(seq.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = seq.features.col(cols[c]);
  return block;
}

TEST(Generate, LabelsAndRangeFollowTheSpec) {
  SynthSpec spec = cyclic_spec(20, 3, 2, 7, 2, 1);
  spec.segments.push_back({1, 4});
  const FeatureSequence seq = generate(spec);
  EXPECT_EQ(seq.dim(), 20);
  EXPECT_EQ(seq.length(), 46);
  ASSERT_TRUE(seq.labels.has_value());
  EXPECT_EQ((*seq.labels)[0], 0);
  EXPECT_EQ((*seq.labels)[7], 1);
  EXPECT_EQ((*seq.labels)[14], 2);
  EXPECT_EQ((*seq.labels)[45], 1);
  EXPECT_GE(seq.features.minCoeff(), 0.0);
  EXPECT_DOUBLE_EQ(seq.features.maxCoeff(), 1.0);
}

TEST(Generate, OneDimensionalSubspacesGiveRankOneSegments) {
  const FeatureSequence seq = generate(cyclic_spec(6, 2, 1, 5, 1, 2));
  const Matrix c = cosine_matrix(seq.features);
  for (Eigen::Index a = 0; a < 10; ++a) {
    for (Eigen::Index b = 0; b < 10; ++b) {
      if ((a < 5) == (b < 5)) {
        EXPECT_NEAR(c(a, b), 1.0, 1e-12);
      } else {
        EXPECT_LT(c(a, b), 1.0 - 1e-6);
      }
    }
  }
}

TEST(Generate, SegmentsHaveTheSubspaceRank) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const FeatureSequence seq = generate(cyclic_spec(15, 3, 2, 10, 2, seed));
    const Matrix all = seq.features;
    for (int m = 0; m < 3; ++m) {
      const Eigen::JacobiSVD<Matrix> svd(segment_block(seq, m));
      const Vector sv = svd.singularValues();
      EXPECT_GT(sv(1), 1e-6);
      for (Eigen::Index i = 2; i < sv.size(); ++i) EXPECT_LE(sv(i), 1e-10);
    }
    // the union is not low rank
    const Eigen::JacobiSVD<Matrix> svd(all);
    EXPECT_GT(svd.singularValues()(5), 1e-6);
  }
}

TEST(Generate, Deterministic) {
  const SynthSpec spec = cyclic_spec(10, 2, 3, 8, 2, 9);
  EXPECT_EQ(generate(spec).features, generate(spec).features);
  SynthSpec other = spec;
  other.seed = 10;
  EXPECT_NE(generate(spec).features, generate(other).features);
}

TEST(SynthSpec, ValidationErrors) {
  SynthSpec spec = cyclic_spec(10, 2, 3, 8, 1, 0);
  spec.dims[1] = 10;
  EXPECT_THROW(generate(spec), InvalidArgument);
  spec = cyclic_spec(10, 2, 3, 8, 1, 0);
  spec.segments.push_back({2, 3});
  EXPECT_THROW(generate(spec), InvalidArgument);
  spec = cyclic_spec(10, 2, 3, 8, 1, 0);
  spec.noise_sigma = -1.0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(AddNoise, ZeroSigmaIsIdentity) {
  SynthSpec spec = cyclic_spec(10, 2, 3, 8, 2, 1);
  const FeatureSequence clean = generate(spec);
  spec.noise_mode = NoiseMode::Iid;
  spec.noise_sigma = 0.0;
  EXPECT_EQ(add_noise(clean, spec).features, clean.features);
}

TEST(AddNoise, NegativeSigmaAndNoneModeAreRejected) {
  SynthSpec spec = cyclic_spec(10, 2, 3, 8, 2, 1);
  const FeatureSequence clean = generate(spec);
  EXPECT_THROW(add_noise(clean, spec), InvalidArgument);
  spec.noise_mode = NoiseMode::Iid;
  spec.noise_sigma = -0.1;
  EXPECT_THROW(add_noise(clean, spec), InvalidArgument);
}

TEST(AddNoise, IidMomentOracle) {
  SynthSpec spec;
  spec.noise_mode = NoiseMode::Iid;
  spec.noise_sigma = 0.1;
  spec.seed = 4;
  const Matrix field = noise_field(spec, 200, 500);
  const double mean = field.mean();
  const double sd = std::sqrt((field.array() - mean).square().sum() / static_cast<double>(field.size() - 1));
  EXPECT_NEAR(sd, 0.1, 0.005);
  EXPECT_NEAR(mean, 0.0, 0.002);
}

TEST(AddNoise, PiecewiseFixedFollowsTheStaircase) {
  SynthSpec spec;
  spec.noise_mode = NoiseMode::PiecewiseFixed;
  spec.noise_sigma = 0.1;
  spec.seed = 5;
  const Eigen::Index n = 80;
  const Matrix field = noise_field(spec, n, 2000);
  double previous = 0.0;
  for (int b = 0; b < 4; ++b) {
    const Matrix block = field.middleRows(n * b / 4, n / 4);
    const double sd = std::sqrt(block.squaredNorm() / static_cast<double>(block.size()));
    EXPECT_NEAR(sd, kStaircase[b] * 0.1, 0.03 * kStaircase[b] * 0.1);
    EXPECT_GT(sd, previous);
    previous = sd;
  }
}

TEST(AddNoise, PiecewiseRandomHasBurstyFrames) {
  SynthSpec spec;
  spec.noise_mode = NoiseMode::PiecewiseRandom;
  spec.noise_sigma = 0.1;
  spec.seed = 6;
  const Matrix field = noise_field(spec, 100, 4000);
  // per-frame energy varies more than under a fixed layout
  SynthSpec fixed = spec;
  fixed.noise_mode = NoiseMode::PiecewiseFixed;
  const Matrix reference = noise_field(fixed, 100, 4000);
  auto frame_spread = [](const Matrix& f) {
    const Eigen::ArrayXd e = f.colwise().squaredNorm().transpose().array();
    return std::sqrt((e - e.mean()).square().mean());
  };
  EXPECT_GT(frame_spread(field), 2.0 * frame_spread(reference));
  // every entry scale is one of the staircase levels, so the overall
  // variance is bracketed by the extreme levels
  const double var = field.squaredNorm() / static_cast<double>(field.size());
  EXPECT_GT(var, 0.25 * 0.01);
  EXPECT_LT(var, 4.0 * 0.01);
}

TEST(AddNoise, KeepsLabelsClipsAndIsDeterministic) {
  SynthSpec spec = cyclic_spec(12, 2, 3, 10, 2, 7);
  spec.noise_mode = NoiseMode::PiecewiseRandom;
  spec.noise_sigma = 0.5;
  const FeatureSequence clean = generate(spec);
  const FeatureSequence a = add_noise(clean, spec);
  const FeatureSequence b = add_noise(clean, spec);
  EXPECT_EQ(a.labels, clean.labels);
  EXPECT_EQ(a.features, b.features);
  EXPECT_GE(a.features.minCoeff(), 0.0);
  EXPECT_LE(a.features.maxCoeff(), 1.0);
  EXPECT_NE(a.features, clean.features);
}

TEST(NoiseMode, StringRoundTrip) {
  for (NoiseMode m : {NoiseMode::None, NoiseMode::Iid, NoiseMode::PiecewiseFixed, NoiseMode::PiecewiseRandom}) {
    EXPECT_EQ(noise_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(noise_mode_from_string("pink"), InvalidArgument);
}

}  // namespace
}  // namespace gcrl
