#include "gcrl/clustering.hpp"
#include "gcrl/random.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace gcrl {
namespace {

constexpr double kCodeFloor = 1e-12;
constexpr int kMaxLloydIters = 300;

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centers,
                        Eigen::Index c) {
  return (points.row(i) - centers.row(c)).squaredNorm();
}

Matrix farthest_point_seeds(const Matrix& points, int k, Eigen::Index first) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(first);
  Vector nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest(i) = squared_distance(points, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    Eigen::Index pick = 0;
    nearest.maxCoeff(&pick);
    centers.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), squared_distance(points, i, centers, c));
    }
  }
  return centers;
}

struct LloydRun {
  Labels labels;
  Matrix centers;
  double inertia = 0.0;
};

LloydRun lloyd(const Matrix& points, Matrix centers) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(centers.rows());
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);

  for (int iter = 0; iter < kMaxLloydIters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, centers, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist(i) = best_d;
      auto& slot = run.labels[static_cast<std::size_t>(i)];
      if (slot != best) {
        slot = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = run.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // empty cluster takes over the worst-served point
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        centers.row(c) = points.row(far);
        dist(far) = 0.0;
      }
    }
  }

  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += squared_distance(points, i, centers, run.labels[static_cast<std::size_t>(i)]);
  }
  run.centers = std::move(centers);
  return run;
}

}  // namespace

CodeAffinity code_affinity(const Matrix& z) {
  if (z.cols() < 2) {
    throw InvalidArgument("code affinity needs at least two frames");
  }
  CodeAffinity out;
  Matrix codes = z;
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    if (!(codes.col(j).squaredNorm() > 0.0)) {
      codes.col(j).setConstant(kCodeFloor);
      ++out.floored_columns;
    }
  }
  const Vector inv_norms = codes.colwise().norm().transpose().cwiseInverse();
  const Matrix unit = codes * inv_norms.asDiagonal();
  const Matrix prod = unit.transpose() * unit;
  out.A = (0.5 * (prod + prod.transpose())).cwiseMax(-1.0).cwiseMin(1.0);
  out.A.diagonal().setOnes();
  return out;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "k-means: k=" << k << " must lie in [1, " << n << "]";
    throw InvalidArgument(msg.str());
  }
  if (restarts < 1) {
    throw InvalidArgument("k-means: at least one restart is required");
  }
  Rng rng = seeded_rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < restarts; ++restart) {
    const auto first = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    LloydRun run = lloyd(points, farthest_point_seeds(points, k, first));
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centers = std::move(run.centers);
      best.inertia = run.inertia;
      best.best_restart = restart;
    }
  }
  return best;
}

SpectralEmbedding spectral_embedding(const Matrix& a, int k) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) {
    throw InvalidArgument("affinity matrix must be square");
  }
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "spectral embedding: k=" << k << " must lie in [1, " << n << "]";
    throw InvalidArgument(msg.str());
  }
  const Vector degree = a.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(degree(i) > 0.0)) {
      std::ostringstream msg;
      msg << "vertex " << i << " is isolated (zero degree)";
      throw NumericalError(msg.str());
    }
  }
  const Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Matrix lap = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
  lap = 0.5 * (lap + lap.transpose());
  lap.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the normalized Laplacian failed");
  }
  SpectralEmbedding emb;
  emb.eigvals = eig.eigenvalues().head(k);
  emb.eigvecs = eig.eigenvectors().leftCols(k);
  emb.laplacian = std::move(lap);
  emb.rows = emb.eigvecs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = emb.rows.row(i).norm();
    if (norm > 0.0) emb.rows.row(i) /= norm;
  }
  return emb;
}

Labels relabel_by_first_appearance(const Labels& labels) {
  std::map<int, int> mapping;
  Labels out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = mapping.try_emplace(label, static_cast<int>(mapping.size()));
    out.push_back(it->second);
  }
  return out;
}

Segmentation normalized_cut(const Matrix& a, int k, std::uint64_t seed) {
  if (k < 2) {
    throw InvalidArgument("normalized cut needs k >= 2");
  }
  if (k > a.rows()) {
    std::ostringstream msg;
    msg << "normalized cut: k=" << k << " exceeds the " << a.rows() << " frames";
    throw InvalidArgument(msg.str());
  }
  const SpectralEmbedding emb = spectral_embedding(a, k);
  const KMeansResult km = kmeans(emb.rows, k, seed);
  return make_segmentation(relabel_by_first_appearance(km.labels), k);
}

Segmentation normalized_cut(const CodeAffinity& affinity, int k, std::uint64_t seed) {
  return normalized_cut(affinity.A, k, seed);
}

}  // namespace gcrl
