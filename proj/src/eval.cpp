#include "gcrl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gcrl {
namespace {

void require_same_length(const Labels& pred, const Labels& gt) {
  if (pred.size() != gt.size()) {
    std::ostringstream msg;
    msg << "label length mismatch: " << pred.size() << " predicted vs " << gt.size()
        << " ground truth";
    throw InvalidArgument(msg.str());
  }
  if (pred.empty()) {
    throw InvalidArgument("labelings must not be empty");
  }
}

std::vector<int> sorted_unique(const Labels& labels) {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int index_of(const std::vector<int>& sorted, int value) {
  return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

double plug_in_entropy(const Eigen::VectorXd& counts, double total) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts(i) > 0.0) {
      const double p = counts(i) / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

Contingency contingency(const Labels& pred, const Labels& gt) {
  require_same_length(pred, gt);
  Contingency c;
  c.pred_labels = sorted_unique(pred);
  c.gt_labels = sorted_unique(gt);
  c.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(c.pred_labels.size()),
                                   static_cast<Eigen::Index>(c.gt_labels.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++c.counts(index_of(c.pred_labels, pred[i]), index_of(c.gt_labels, gt[i]));
  }
  return c;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXi& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  const int n = std::max(rows, cols);
  if (n == 0) return {};
  const long long top = weights.size() ? weights.maxCoeff() : 0;

  // Hungarian method (potentials form) minimizing top - w on the zero-padded
  // square matrix; 1-based with a sentinel column 0.
  auto cost = [&](int i, int j) -> long long {
    const long long w = (i < rows && j < cols) ? weights(i, j) : 0;
    return top - w;
  };
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      long long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= n; ++j) {
    const int i = match[j] - 1;
    if (i < rows && j - 1 < cols) assignment[static_cast<std::size_t>(i)] = j - 1;
  }
  return assignment;
}

double accuracy(const Labels& pred, const Labels& gt) { return evaluate(pred, gt).acc; }

double nmi(const Labels& pred, const Labels& gt) {
  const Contingency c = contingency(pred, gt);
  const double total = static_cast<double>(pred.size());
  const Eigen::MatrixXd joint = c.counts.cast<double>();
  const double h_pred = plug_in_entropy(joint.rowwise().sum(), total);
  const double h_gt = plug_in_entropy(joint.colwise().sum().transpose(), total);

  const bool pred_single = c.pred_labels.size() == 1;
  const bool gt_single = c.gt_labels.size() == 1;
  if (pred_single && gt_single) return 1.0;
  if (pred_single || gt_single) return 0.0;

  const Eigen::VectorXd row_sums = joint.rowwise().sum();
  const Eigen::VectorXd col_sums = joint.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.cols(); ++j) {
      const double nij = joint(i, j);
      if (nij > 0.0) {
        mi += (nij / total) * std::log(nij * total / (row_sums(i) * col_sums(j)));
      }
    }
  }
  const double value = mi / (0.5 * (h_pred + h_gt));
  return std::clamp(value, 0.0, 1.0);
}

MetricReport evaluate(const Labels& pred, const Labels& gt) {
  const Contingency c = contingency(pred, gt);
  MetricReport report;
  report.confusion = c.counts;
  const std::vector<int> assignment = max_weight_assignment(c.counts);
  long long matched = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0) continue;
    matched += c.counts(static_cast<Eigen::Index>(i), assignment[i]);
    report.mapping[c.pred_labels[i]] = c.gt_labels[static_cast<std::size_t>(assignment[i])];
  }
  report.acc = static_cast<double>(matched) / static_cast<double>(pred.size());
  report.nmi = nmi(pred, gt);
  return report;
}

}  // namespace gcrl
