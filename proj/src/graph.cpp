#include "gcrl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gcrl {
namespace {

Vector column_norms(const Matrix& x) {
  Vector norms = x.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < norms.size(); ++k) {
    if (!(norms(k) > 0.0)) {
      std::ostringstream msg;
      msg << "column " << k << " has zero norm; cosine similarity is undefined";
      throw InvalidArgument(msg.str());
    }
  }
  return norms;
}

void require_graph_size(Eigen::Index n_frames) {
  if (n_frames < 2) {
    throw InvalidArgument("affinity graph needs at least two vertices");
  }
}

struct KernelTerms {
  Vector norms;
  Matrix unit;  // columns scaled to unit norm
  Matrix cos;
  // exp(-(1 - c_kj) / h - shift) off the diagonal, 0 on it
  Matrix weights;
  double weight_sum = 0.0;
  double shift = 0.0;
};

// The largest off-diagonal cosine gives the largest exponent; subtracting it
// keeps every exponential in (0, 1].
KernelTerms kernel_terms(const Matrix& x, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("similarity bandwidth h must be positive");
  }
  require_graph_size(x.cols());
  KernelTerms t;
  t.norms = column_norms(x);
  t.unit = x * t.norms.cwiseInverse().asDiagonal();
  t.cos.noalias() = t.unit.transpose() * t.unit;
  // exact symmetry regardless of the product's summation order
  const Eigen::Index n = t.cos.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    t.cos(j, j) = 1.0;
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double c = std::clamp(0.5 * (t.cos(k, j) + t.cos(j, k)), -1.0, 1.0);
      t.cos(k, j) = c;
      t.cos(j, k) = c;
    }
  }
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != j) top = std::max(top, t.cos(k, j));
    }
  }
  t.shift = (top - 1.0) / h;
  t.weights.resize(n, n);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = k == j ? 0.0 : std::exp((t.cos(k, j) - top) / h);
      t.weights(k, j) = w;
      sum += w;
    }
  }
  t.weight_sum = sum;
  return t;
}

void require_matching(const AffinityGraph& g0, const Matrix& xtilde) {
  if (g0.P.rows() != xtilde.cols() || g0.P.cols() != xtilde.cols()) {
    std::ostringstream msg;
    msg << "reference graph has " << g0.P.rows() << " vertices but the data has "
        << xtilde.cols() << " columns";
    throw InvalidArgument(msg.str());
  }
}

double stable_loss(const AffinityGraph& g0, const KernelTerms& t, double h) {
  double fit = 0.0;
  for (Eigen::Index j = 0; j < t.cos.cols(); ++j) {
    for (Eigen::Index k = 0; k < t.cos.rows(); ++k) {
      if (k != j) fit += g0.P(k, j) * (1.0 - t.cos(k, j));
    }
  }
  return fit / h + t.shift + std::log(t.weight_sum);
}

}  // namespace

double cosine_sim(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("cosine_sim: vectors differ in length");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw InvalidArgument("cosine_sim: zero vector has no direction");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Matrix cosine_matrix(const Matrix& x) {
  const Vector norms = column_norms(x);
  const Matrix unit = x * norms.cwiseInverse().asDiagonal();
  Matrix c = unit.transpose() * unit;
  Matrix out = (0.5 * (c + c.transpose())).cwiseMax(-1.0).cwiseMin(1.0);
  out.diagonal().setOnes();
  return out;
}

AffinityGraph build_affinity(const Matrix& x, double h) {
  const KernelTerms t = kernel_terms(x, h);
  AffinityGraph g;
  g.h = h;
  g.P = t.weights / t.weight_sum;
  return g;
}

double entropy(const AffinityGraph& g) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < g.P.cols(); ++j) {
    for (Eigen::Index k = 0; k < g.P.rows(); ++k) {
      const double p = g.P(k, j);
      if (p > 0.0) acc -= p * std::log(p);
    }
  }
  return acc;
}

GraphLossValue graph_loss(const AffinityGraph& g0, const Matrix& xtilde, double h) {
  require_matching(g0, xtilde);
  const KernelTerms t = kernel_terms(xtilde, h);
  return {stable_loss(g0, t, h)};
}

GraphLossValue graph_loss_direct(const AffinityGraph& g0, const Matrix& xtilde, double h,
                                 double epsilon_log) {
  require_matching(g0, xtilde);
  const AffinityGraph learnt = build_affinity(xtilde, h);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < learnt.P.cols(); ++j) {
    for (Eigen::Index k = 0; k < learnt.P.rows(); ++k) {
      if (k == j) continue;
      acc -= g0.P(k, j) * std::log(std::max(learnt.P(k, j), epsilon_log));
    }
  }
  return {acc};
}

GraphLossWithGrad graph_loss_with_grad(const AffinityGraph& g0, const Matrix& xtilde, double h) {
  require_matching(g0, xtilde);
  const KernelTerms t = kernel_terms(xtilde, h);

  // dL/dc_kj = (P~(k,j) - P0(k,j)) / h for each ordered pair; both
  // orientations of a pair share c_kj, so fold them into one symmetric weight.
  // P~ is symmetric, so the folded weight is (2 P~ - P0 - P0^T) / h.
  Matrix pair_weight = (2.0 / (h * t.weight_sum)) * t.weights;
  pair_weight -= (g0.P + g0.P.transpose()) / h;

  // dc_kj/dx_k = (u_j - c_kj u_k) / |x_k| with u the unit columns
  const Vector self_weight = pair_weight.cwiseProduct(t.cos).colwise().sum().transpose();
  Matrix grad(t.unit.rows(), t.unit.cols());
  grad.noalias() = t.unit * pair_weight;
  grad -= t.unit * self_weight.asDiagonal();
  grad = grad * t.norms.cwiseInverse().asDiagonal();

  return {stable_loss(g0, t, h), std::move(grad)};
}

Matrix graph_loss_grad(const AffinityGraph& g0, const Matrix& xtilde, double h) {
  return graph_loss_with_grad(g0, xtilde, h).grad;
}

}  // namespace gcrl
