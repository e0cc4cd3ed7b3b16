// ADMM solver for graph-constrained temporal subspace clustering.
//
// Model: min L_G(S(X~), G0) + lambda0 |X~ - D Z|_F^2 + lambda1/2 |Z|_F^2
//            + lambda2/2 tr(Z L_T Z^T)
//        s.t. Z >= 0, D >= 0, |d_i|_2 <= 1.
//
// Splitting Y = X~, U = D, V = Z gives per-variable updates that are applied
// in the order V, U, Z, D, Y, X~, multipliers. In TscAblation mode the graph
// term is dropped and Y = X~ = X stay fixed.

#ifndef GCRL_OPTIM_HPP
#define GCRL_OPTIM_HPP

#include "gcrl/core.hpp"
#include "gcrl/graph.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gcrl {

/// L_T = D_T - W_T with W_T(i, j) = 1 for 0 < |i - j| <= s, together with its
/// eigendecomposition L_T = Q diag(eigvals) Q^T.
struct TemporalLaplacian {
  Matrix LT;
  Vector eigvals;
  Matrix eigvecs;
};

TemporalLaplacian build_temporal_laplacian(Eigen::Index n_frames, int s);

/// Left-hand operator M = 2 lambda0 U^T U + (lambda1 + rho) I of the V update.
Matrix v_update_operator(const SolverState& state, const SolverConfig& config);

/// Right-hand side C = 2 lambda0 U^T Y - Lambda_V + rho Z of the V update.
Matrix v_update_rhs(const SolverState& state, const SolverConfig& config);

/// Solves M V + lambda2 V L_T = C spectrally.
Matrix update_V(const SolverState& state, const SolverConfig& config, const TemporalLaplacian& lt);

/// |M V + lambda2 V L_T - C|_F / |C|_F for a candidate V (0 when C = 0 and
/// the left-hand side vanishes).
double sylvester_residual(const SolverState& state, const SolverConfig& config,
                          const TemporalLaplacian& lt, const Matrix& v);

/// U = (2 lambda0 Y V^T - Lambda_U + rho D)(2 lambda0 V V^T + rho I)^-1.
Matrix update_U(const SolverState& state, const SolverConfig& config);

/// Z = max(V + Lambda_V / rho, 0).
Matrix update_Z(const SolverState& state, const SolverConfig& config);

/// D = max(U + Lambda_U / rho, 0), then columns longer than one are scaled
/// back onto the unit ball.
Matrix update_D(const SolverState& state, const SolverConfig& config);

/// Projection onto {D >= 0, |d_i| <= 1}.
Matrix project_dictionary(const Matrix& d);

/// Y = (2 lambda0 U V - Lambda_X~ + rho X~) / (2 lambda0 + rho), clipped to [0, 1].
Matrix update_Y(const SolverState& state, const SolverConfig& config);

/// Objective of the X~ subproblem:
/// L_G(S(X~), G0) + <Lambda_X~, Y - X~> + rho/2 |Y - X~|_F^2.
double xtilde_objective(const SolverState& state, const SolverConfig& config,
                        const AffinityGraph& g0, const Matrix& xtilde);

struct XtildeUpdate {
  Matrix xtilde;
  double objective_before = 0.0;
  double objective_after = 0.0;
  int steps_accepted = 0;
  // a step could not decrease the objective after all backtracks
  bool stalled = false;
};

/// Projected gradient descent on the X~ subproblem with step halving.
/// Returns X~ unchanged in TscAblation mode.
XtildeUpdate update_Xtilde(const SolverState& state, const SolverConfig& config,
                           const AffinityGraph& g0);

/// Dual ascent on the three consensus constraints, applied in place.
void update_multipliers(SolverState& state, const SolverConfig& config);

/// Value of the model objective at (X~, D, Z), with the halved lambda1 and
/// lambda2 weights the V update minimizes exactly. The graph term is omitted
/// in TscAblation mode.
double model_objective(const SolverState& state, const SolverConfig& config,
                       const TemporalLaplacian& lt, const AffinityGraph* g0);

struct FitResult {
  Matrix Z;
  Matrix D;
  Matrix Xtilde;
  std::vector<IterationDiagnostics> diagnostics;
  bool converged = false;
  int iterations_run = 0;
  std::vector<std::string> warnings;
};

struct FitOptions {
  // called with the full state after every outer iteration
  std::function<void(const SolverState&)> observer;
};

/// Initial state: D = U uniform [0, 1] with unit columns, Z = V uniform
/// [0, 1e-2], X~ = Y = X, multipliers zero.
SolverState initial_state(const Matrix& x, const SolverConfig& config);

FitResult fit(const FeatureSequence& seq, const SolverConfig& config,
              const FitOptions& options = {});

}  // namespace gcrl

#endif  // GCRL_OPTIM_HPP
