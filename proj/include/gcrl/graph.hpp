// Pairwise-similarity graphs and the cross-entropy graph loss.
//
// Edge weights use the cosine kernel w_kj = exp(-(1 - cos(x_k, x_j)) / h)
// over ordered pairs k != j, normalized to unit total weight so the graph
// reads as a joint distribution over vertex pairs. The graph loss is the
// cross entropy of the learnt graph against the reference graph G0.

#ifndef GCRL_GRAPH_HPP
#define GCRL_GRAPH_HPP

#include "gcrl/core.hpp"

namespace gcrl {

/// Normalized cosine kernel graph. P is N x N, symmetric, zero diagonal,
/// entries summing to one.
struct AffinityGraph {
  Matrix P;
  double h = 0.0;
};

struct GraphLossValue {
  // cross entropy in nats
  double value = 0.0;
};

/// a^T b / (|a| |b|). Throws InvalidArgument for a zero or mismatched vector.
double cosine_sim(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// N x N matrix of column cosine similarities. Throws on a zero-norm column.
Matrix cosine_matrix(const Matrix& x);

AffinityGraph build_affinity(const Matrix& x, double h);

/// Shannon entropy of the graph's edge distribution (nats).
double entropy(const AffinityGraph& g);

/// Cross entropy of S(xtilde) against g0, evaluated with the log-sum-exp
/// closed form (1/h) sum P0 (1 - c) + log sum exp(-(1 - c) / h).
GraphLossValue graph_loss(const AffinityGraph& g0, const Matrix& xtilde, double h);

/// Literal -sum P0 log(max(P~, epsilon_log)) evaluation of the same loss.
GraphLossValue graph_loss_direct(const AffinityGraph& g0, const Matrix& xtilde, double h,
                                 double epsilon_log = 1e-300);

/// Analytic gradient of graph_loss with respect to xtilde (n x N).
Matrix graph_loss_grad(const AffinityGraph& g0, const Matrix& xtilde, double h);

struct GraphLossWithGrad {
  double value = 0.0;
  Matrix grad;
};

/// Loss and gradient from one pass over the pairwise similarities.
GraphLossWithGrad graph_loss_with_grad(const AffinityGraph& g0, const Matrix& xtilde, double h);

}  // namespace gcrl

#endif  // GCRL_GRAPH_HPP
