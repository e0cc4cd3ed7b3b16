#include "gcrl/core.hpp"
#include "gcrl/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gcrl {

void validate(const FeatureSequence& seq) {
  if (seq.features.rows() < 1) {
    throw InvalidArgument("feature sequence needs at least one feature row");
  }
  if (seq.features.cols() < 2) {
    throw InvalidArgument("feature sequence needs at least two frames");
  }
  if (!seq.features.allFinite()) {
    throw InvalidArgument("feature sequence contains non-finite entries");
  }
  if (seq.labels && static_cast<Eigen::Index>(seq.labels->size()) != seq.features.cols()) {
    std::ostringstream msg;
    msg << "label count " << seq.labels->size() << " does not match frame count "
        << seq.features.cols();
    throw InvalidArgument(msg.str());
  }
}

Matrix normalize(const Matrix& x) {
  if (x.size() == 0) {
    throw InvalidArgument("normalize: empty matrix");
  }
  if (!x.allFinite()) {
    throw InvalidArgument("normalize: matrix contains non-finite entries");
  }
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  if (!(hi > lo)) {
    throw InvalidArgument("normalize: all entries are equal (zero range)");
  }
  Matrix out = (x.array() - lo) / (hi - lo);
  // guard against rounding just outside the unit interval
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

bool is_normalized(const Matrix& x) {
  return x.allFinite() && (x.size() == 0 || (x.minCoeff() >= 0.0 && x.maxCoeff() <= 1.0));
}

std::string to_string(SolverMode mode) {
  return mode == SolverMode::Full ? "full" : "tsc";
}

SolverMode solver_mode_from_string(const std::string& text) {
  if (text == "full") return SolverMode::Full;
  if (text == "tsc" || text == "tsc-ablation" || text == "ablation") {
    return SolverMode::TscAblation;
  }
  throw InvalidArgument("unknown solver mode '" + text + "' (expected full or tsc)");
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("solver config: " + what); };
  if (!(lambda0 >= 0.0) || !(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    fail("lambda0, lambda1, lambda2 must be nonnegative");
  }
  if (!(rho > 0.0)) fail("rho must be positive");
  if (!(h > 0.0)) fail("h must be positive");
  if (r < 1) fail("r must be at least 1");
  if (s < 1) fail("s must be at least 1");
  if (max_outer_iters < 0) fail("max_outer_iters must be nonnegative");
  if (inner_gd_iters < 1) fail("inner_gd_iters must be positive");
  if (!(inner_gd_step > 0.0)) fail("inner_gd_step must be positive");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (!(epsilon_log > 0.0)) fail("epsilon_log must be positive");
}

std::vector<Segment> segments_from_labels(const Labels& labels) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (out.empty() || out.back().cluster != labels[i]) {
      out.push_back({idx, idx, labels[i]});
    } else {
      out.back().end = idx;
    }
  }
  return out;
}

Segmentation make_segmentation(Labels labels, int k) {
  Segmentation seg;
  seg.segments = segments_from_labels(labels);
  seg.labels = std::move(labels);
  seg.k = k;
  return seg;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) {
    throw InvalidArgument("uniform_index: bound must be positive");
  }
  // rejection sampling removes modulo bias
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, q = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(q) / q);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

}  // namespace gcrl
