#include "gcrl/synthdata.hpp"
#include "gcrl/random.hpp"

#include <algorithm>
#include <sstream>

namespace gcrl {
namespace {

constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;
constexpr double kMinCoefficient = 0.1;

// Block boundaries [b0=0, b1, b2, b3, b4=n) splitting n features into four
// contiguous runs.
std::vector<Eigen::Index> fixed_blocks(Eigen::Index n) {
  std::vector<Eigen::Index> b(5);
  for (int i = 0; i <= 4; ++i) b[static_cast<std::size_t>(i)] = (n * i) / 4;
  return b;
}

std::vector<Eigen::Index> random_blocks(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> b = {0, 0, 0, 0, n};
  for (int i = 1; i <= 3; ++i) {
    b[static_cast<std::size_t>(i)] =
        static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n) + 1));
  }
  std::sort(b.begin() + 1, b.begin() + 4);
  return b;
}

}  // namespace

std::string to_string(NoiseMode mode) {
  switch (mode) {
    case NoiseMode::None: return "none";
    case NoiseMode::Iid: return "iid";
    case NoiseMode::PiecewiseFixed: return "piecewise-fixed";
    case NoiseMode::PiecewiseRandom: return "piecewise-random";
  }
  return "none";
}

NoiseMode noise_mode_from_string(const std::string& text) {
  if (text == "none") return NoiseMode::None;
  if (text == "iid") return NoiseMode::Iid;
  if (text == "piecewise-fixed") return NoiseMode::PiecewiseFixed;
  if (text == "piecewise-random") return NoiseMode::PiecewiseRandom;
  throw InvalidArgument("unknown noise mode '" + text +
                        "' (expected none, iid, piecewise-fixed or piecewise-random)");
}

int SynthSpec::total_length() const {
  int total = 0;
  for (const auto& seg : segments) total += seg.length;
  return total;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("synth spec: " + what); };
  if (n < 2) fail("ambient dimension n must be at least 2");
  if (M < 1) fail("need at least one subspace");
  if (static_cast<int>(dims.size()) != M) fail("dims must list one dimension per subspace");
  for (int d : dims) {
    if (d < 1 || d >= n) fail("each subspace dimension must satisfy 0 < dim < n");
  }
  if (segments.empty()) fail("no segments");
  for (const auto& seg : segments) {
    if (seg.subspace < 0 || seg.subspace >= M) fail("segment refers to an unknown subspace");
    if (seg.length < 1) fail("segment lengths must be positive");
  }
  if (total_length() < 2) fail("sequence needs at least two frames");
  if (!(noise_sigma >= 0.0)) fail("noise sigma must be nonnegative");
}

SynthSpec cyclic_spec(int n, int M, int dim, int segment_length, int repeats,
                      std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.M = M;
  spec.dims.assign(static_cast<std::size_t>(M), dim);
  for (int rep = 0; rep < repeats; ++rep) {
    for (int m = 0; m < M; ++m) spec.segments.push_back({m, segment_length});
  }
  spec.seed = seed;
  return spec;
}

FeatureSequence generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng = seeded_rng(spec.seed);

  // Each generator G_m has |N(0,1)| entries; its thin QR G_m = Q_m R_m gives
  // an orthonormal basis Q_m of the subspace, and a frame G_m c = Q_m (R_m c)
  // with c >= 0 is nonnegative without any shift.
  std::vector<Matrix> generators;
  for (int m = 0; m < spec.M; ++m) {
    Matrix g(spec.n, spec.dims[static_cast<std::size_t>(m)]);
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = std::abs(rng.normal());
    }
    generators.push_back(std::move(g));
  }

  const int frames = spec.total_length();
  FeatureSequence seq;
  seq.features.resize(spec.n, frames);
  seq.labels = Labels{};
  seq.labels->reserve(static_cast<std::size_t>(frames));
  Eigen::Index col = 0;
  for (const auto& seg : spec.segments) {
    const Matrix& g = generators[static_cast<std::size_t>(seg.subspace)];
    for (int t = 0; t < seg.length; ++t, ++col) {
      Vector coeff(g.cols());
      for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) = rng.uniform(kMinCoefficient, 1.0);
      seq.features.col(col) = g * coeff;
      seq.labels->push_back(seg.subspace);
    }
  }
  seq.features /= seq.features.maxCoeff();

  std::ostringstream name;
  name << "synth-M" << spec.M << "-n" << spec.n << "-N" << frames << "-seed" << spec.seed;
  seq.name = name.str();
  return seq;
}

Matrix noise_field(const SynthSpec& spec, Eigen::Index n, Eigen::Index frames) {
  if (!(spec.noise_sigma >= 0.0)) {
    throw InvalidArgument("noise sigma must be nonnegative");
  }
  Matrix field = Matrix::Zero(n, frames);
  if (spec.noise_mode == NoiseMode::None || spec.noise_sigma == 0.0) return field;

  Rng rng = seeded_rng(spec.seed ^ kNoiseStream);
  const double sigma = spec.noise_sigma;
  const std::vector<Eigen::Index> fixed = fixed_blocks(n);
  for (Eigen::Index j = 0; j < frames; ++j) {
    if (spec.noise_mode == NoiseMode::Iid) {
      for (Eigen::Index i = 0; i < n; ++i) field(i, j) = sigma * rng.normal();
      continue;
    }
    const std::vector<Eigen::Index> blocks =
        spec.noise_mode == NoiseMode::PiecewiseFixed ? fixed : random_blocks(n, rng);
    for (std::size_t b = 0; b < 4; ++b) {
      const double scale = kStaircase[b] * sigma;
      for (Eigen::Index i = blocks[b]; i < blocks[b + 1]; ++i) field(i, j) = scale * rng.normal();
    }
  }
  return field;
}

FeatureSequence add_noise(const FeatureSequence& seq, const SynthSpec& spec) {
  if (spec.noise_mode == NoiseMode::None) {
    throw InvalidArgument("add_noise: noise mode is none");
  }
  FeatureSequence out = seq;
  out.features = (seq.features + noise_field(spec, seq.dim(), seq.length()))
                     .cwiseMax(0.0)
                     .cwiseMin(1.0);
  return out;
}

FeatureSequence generate_noisy(const SynthSpec& spec) {
  FeatureSequence seq = generate(spec);
  if (spec.noise_mode != NoiseMode::None && spec.noise_sigma > 0.0) seq = add_noise(seq, spec);
  return seq;
}

}  // namespace gcrl
