// Shared domain types for graph-constrained temporal subspace clustering.

#ifndef GCRL_CORE_HPP
#define GCRL_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

/// Raised for violated preconditions on inputs and configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x N feature matrix (one column per time step) with optional
/// ground-truth labels.
struct FeatureSequence {
  Matrix features;
  std::optional<Labels> labels;
  std::string name;

  Eigen::Index dim() const { return features.rows(); }
  Eigen::Index length() const { return features.cols(); }
};

/// Throws InvalidArgument unless the sequence has N >= 2, n >= 1, finite
/// entries and (when present) one label per frame.
void validate(const FeatureSequence& seq);

/// Global min-max rescale of every entry into [0, 1].
Matrix normalize(const Matrix& x);

/// True when every entry lies in [0, 1].
bool is_normalized(const Matrix& x);

enum class SolverMode { Full, TscAblation };

std::string to_string(SolverMode mode);
SolverMode solver_mode_from_string(const std::string& text);

struct SolverConfig {
  double lambda0 = 0.25;
  double lambda1 = 0.004;
  double lambda2 = 10.0;
  double rho = 1.0;
  // similarity kernel bandwidth
  double h = 0.0015;
  // dictionary atoms
  int r = 10;
  // temporal neighbour half-window of the Laplacian
  int s = 7;
  int max_outer_iters = 100;
  int inner_gd_iters = 20;
  double inner_gd_step = 1e-2;
  double tol = 1e-4;
  SolverMode mode = SolverMode::Full;
  std::uint64_t seed = 0;
  double epsilon_log = 1e-300;

  /// Throws InvalidArgument on the first violated constraint.
  void validate() const;
};

/// One row of the per-iteration trace.
struct IterationDiagnostics {
  int iteration = 0;
  double objective = 0.0;
  double graph_loss = 0.0;
  double primal_y_xtilde_fro = 0.0;
  double primal_y_xtilde_max = 0.0;
  double primal_u_d_fro = 0.0;
  double primal_v_z_fro = 0.0;
  double sylvester_residual = 0.0;
  // inner descent for the auxiliary data failed to decrease its objective
  bool descent_stalled = false;
};

/// All ADMM variables. Shapes: Xtilde, Y, LambdaXtilde are n x N; U, D,
/// LambdaU are n x r; V, Z, LambdaV are r x N.
struct SolverState {
  Matrix Xtilde;
  Matrix Y;
  Matrix U;
  Matrix D;
  Matrix V;
  Matrix Z;
  Matrix LambdaXtilde;
  Matrix LambdaU;
  Matrix LambdaV;
  int iteration = 0;
  std::vector<IterationDiagnostics> diagnostics;
};

struct Segment {
  Eigen::Index start = 0;
  // inclusive
  Eigen::Index end = 0;
  int cluster = 0;

  bool operator==(const Segment&) const = default;
};

struct Segmentation {
  Labels labels;
  std::vector<Segment> segments;
  int k = 0;
};

/// Run-length encodes a label sequence into contiguous segments.
std::vector<Segment> segments_from_labels(const Labels& labels);

/// Builds a Segmentation (labels, segments, k) from per-frame labels.
Segmentation make_segmentation(Labels labels, int k);

}  // namespace gcrl

#endif  // GCRL_CORE_HPP
