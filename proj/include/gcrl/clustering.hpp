// Code affinity and normalized-cut spectral segmentation.

#ifndef GCRL_CLUSTERING_HPP
#define GCRL_CLUSTERING_HPP

#include "gcrl/core.hpp"

#include <cstdint>

namespace gcrl {

/// Cosine affinity between code columns: A_kj = z_j^T z_k / (|z_j| |z_k|).
struct CodeAffinity {
  Matrix A;
  // all-zero code columns that were lifted to a small constant first
  int floored_columns = 0;
};

CodeAffinity code_affinity(const Matrix& z);

struct KMeansResult {
  Labels labels;
  Matrix centers;  // k x d
  double inertia = 0.0;
  int best_restart = 0;
};

/// Lloyd k-means on the rows of `points` with greedy farthest-point seeding;
/// keeps the restart with the smallest within-cluster sum of squares,
/// earliest restart on ties.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 50);

struct SpectralEmbedding {
  Vector eigvals;   // k smallest eigenvalues of the normalized Laplacian
  Matrix eigvecs;   // N x k
  Matrix laplacian; // I - Dg^-1/2 A Dg^-1/2
  Matrix rows;      // eigvecs with rows scaled to unit norm
};

/// k-dimensional embedding from the symmetric normalized Laplacian of A.
SpectralEmbedding spectral_embedding(const Matrix& a, int k);

/// Relabels clusters 0, 1, 2, ... in order of first appearance.
Labels relabel_by_first_appearance(const Labels& labels);

/// Spectral relaxation of the k-way normalized cut followed by k-means
/// discretization of the row-normalized embedding.
Segmentation normalized_cut(const CodeAffinity& affinity, int k, std::uint64_t seed);
Segmentation normalized_cut(const Matrix& a, int k, std::uint64_t seed);

}  // namespace gcrl

#endif  // GCRL_CLUSTERING_HPP
