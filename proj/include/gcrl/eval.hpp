// Clustering accuracy and normalized mutual information.

#ifndef GCRL_EVAL_HPP
#define GCRL_EVAL_HPP

#include "gcrl/core.hpp"

#include <map>

namespace gcrl {

/// Contingency counts between two labelings. Rows index the distinct
/// predicted labels, columns the distinct ground-truth labels, both in
/// ascending label order.
struct Contingency {
  Eigen::MatrixXi counts;
  std::vector<int> pred_labels;
  std::vector<int> gt_labels;
};

Contingency contingency(const Labels& pred, const Labels& gt);

/// Maximum-weight one-to-one assignment between rows and columns of a
/// nonnegative weight matrix (rectangular allowed). Returns, for each row,
/// the assigned column or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXi& weights);

struct MetricReport {
  double acc = 0.0;
  double nmi = 0.0;
  Eigen::MatrixXi confusion;
  // predicted label -> ground-truth label (unmatched predicted labels absent)
  std::map<int, int> mapping;
};

/// Fraction of frames whose predicted cluster maps to their ground-truth
/// class under the best one-to-one mapping.
double accuracy(const Labels& pred, const Labels& gt);

/// I(pred; gt) / ((H(pred) + H(gt)) / 2) with plug-in estimates in nats.
double nmi(const Labels& pred, const Labels& gt);

MetricReport evaluate(const Labels& pred, const Labels& gt);

}  // namespace gcrl

#endif  // GCRL_EVAL_HPP
