#include "gcrl/optim.hpp"
#include "gcrl/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gcrl {
namespace {

// Columns that clip to all zeros are lifted to this value so their
// direction stays defined.
constexpr double kColumnFloor = 1e-8;
constexpr int kMaxBacktracks = 10;

Matrix clip_unit(const Matrix& m) { return m.cwiseMax(0.0).cwiseMin(1.0); }

void floor_zero_columns(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (!(m.col(j).squaredNorm() > 0.0)) m.col(j).setConstant(kColumnFloor);
  }
}

double temporal_energy(const Matrix& z, const Matrix& lt) {
  return (z * lt).cwiseProduct(z).sum();
}

}  // namespace

TemporalLaplacian build_temporal_laplacian(Eigen::Index n_frames, int s) {
  if (n_frames < 2) {
    throw InvalidArgument("temporal Laplacian needs at least two frames");
  }
  if (s < 1 || s >= n_frames) {
    std::ostringstream msg;
    msg << "temporal window s=" << s << " must satisfy 1 <= s < N=" << n_frames;
    throw InvalidArgument(msg.str());
  }
  TemporalLaplacian lt;
  lt.LT = Matrix::Zero(n_frames, n_frames);
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - s);
    const Eigen::Index hi = std::min<Eigen::Index>(n_frames - 1, i + s);
    for (Eigen::Index j = lo; j <= hi; ++j) {
      if (j != i) lt.LT(i, j) = -1.0;
    }
    lt.LT(i, i) = static_cast<double>(hi - lo);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lt.LT);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the temporal Laplacian failed");
  }
  // PSD up to rounding; the smallest eigenvalue is the constant vector's zero
  lt.eigvals = eig.eigenvalues().cwiseMax(0.0);
  lt.eigvecs = eig.eigenvectors();
  return lt;
}

Matrix v_update_operator(const SolverState& state, const SolverConfig& config) {
  Matrix m = 2.0 * config.lambda0 * (state.U.transpose() * state.U);
  m.diagonal().array() += config.lambda1 + config.rho;
  return 0.5 * (m + m.transpose());
}

Matrix v_update_rhs(const SolverState& state, const SolverConfig& config) {
  return 2.0 * config.lambda0 * (state.U.transpose() * state.Y) - state.LambdaV +
         config.rho * state.Z;
}

Matrix update_V(const SolverState& state, const SolverConfig& config, const TemporalLaplacian& lt) {
  const Matrix m = v_update_operator(state, config);
  const Matrix c = v_update_rhs(state, config);
  if (lt.eigvecs.rows() != c.cols()) {
    throw InvalidArgument("temporal Laplacian size does not match the frame count");
  }

  // With M = P diag(m) P^T and L_T = Q diag(mu) Q^T the equation decouples
  // into (m_i + lambda2 mu_j) W_ij = (P^T C Q)_ij.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the V-update operator failed");
  }
  const Vector& m_vals = eig.eigenvalues();
  const Matrix& p = eig.eigenvectors();

  Matrix w = p.transpose() * c * lt.eigvecs;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const double shift = m_vals(i) + config.lambda2 * lt.eigvals(j);
      if (!(shift > 0.0)) {
        throw NumericalError("singular shifted system in the V update");
      }
      w(i, j) /= shift;
    }
  }
  return p * w * lt.eigvecs.transpose();
}

double sylvester_residual(const SolverState& state, const SolverConfig& config,
                          const TemporalLaplacian& lt, const Matrix& v) {
  const Matrix m = v_update_operator(state, config);
  const Matrix c = v_update_rhs(state, config);
  const double lhs_minus_rhs = (m * v + config.lambda2 * (v * lt.LT) - c).norm();
  const double scale = c.norm();
  return scale > 0.0 ? lhs_minus_rhs / scale : lhs_minus_rhs;
}

Matrix update_U(const SolverState& state, const SolverConfig& config) {
  Matrix gram = 2.0 * config.lambda0 * (state.V * state.V.transpose());
  gram = 0.5 * (gram + gram.transpose());
  gram.diagonal().array() += config.rho;
  const Matrix rhs = 2.0 * config.lambda0 * (state.Y * state.V.transpose()) - state.LambdaU +
                     config.rho * state.D;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("U-update system is not positive definite");
  }
  return llt.solve(rhs.transpose()).transpose();
}

Matrix update_Z(const SolverState& state, const SolverConfig& config) {
  return (state.V + state.LambdaV / config.rho).cwiseMax(0.0);
}

Matrix project_dictionary(const Matrix& d) {
  Matrix out = d.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 1.0) out.col(j) /= norm;
  }
  return out;
}

Matrix update_D(const SolverState& state, const SolverConfig& config) {
  return project_dictionary(state.U + state.LambdaU / config.rho);
}

Matrix update_Y(const SolverState& state, const SolverConfig& config) {
  const double denom = 2.0 * config.lambda0 + config.rho;
  return clip_unit((2.0 * config.lambda0 * (state.U * state.V) - state.LambdaXtilde +
                    config.rho * state.Xtilde) /
                   denom);
}

double xtilde_objective(const SolverState& state, const SolverConfig& config,
                        const AffinityGraph& g0, const Matrix& xtilde) {
  const Matrix gap = state.Y - xtilde;
  return graph_loss(g0, xtilde, config.h).value + state.LambdaXtilde.cwiseProduct(gap).sum() +
         0.5 * config.rho * gap.squaredNorm();
}

XtildeUpdate update_Xtilde(const SolverState& state, const SolverConfig& config,
                           const AffinityGraph& g0) {
  XtildeUpdate out;
  out.xtilde = state.Xtilde;
  if (config.mode == SolverMode::TscAblation) return out;

  auto evaluate = [&](const Matrix& x) {
    GraphLossWithGrad g = graph_loss_with_grad(g0, x, config.h);
    const Matrix gap = state.Y - x;
    const double value = g.value + state.LambdaXtilde.cwiseProduct(gap).sum() +
                         0.5 * config.rho * gap.squaredNorm();
    Matrix grad = g.grad - state.LambdaXtilde - config.rho * gap;
    return std::pair<double, Matrix>(value, std::move(grad));
  };

  auto [value, grad] = evaluate(out.xtilde);
  out.objective_before = value;
  double step = config.inner_gd_step;

  for (int it = 0; it < config.inner_gd_iters; ++it) {
    bool accepted = false;
    for (int attempt = 0; attempt <= kMaxBacktracks; ++attempt) {
      Matrix candidate = clip_unit(out.xtilde - step * grad);
      floor_zero_columns(candidate);
      if (candidate == out.xtilde) {
        // projected step is a fixed point
        out.objective_after = value;
        return out;
      }
      auto [cand_value, cand_grad] = evaluate(candidate);
      if (cand_value <= value) {
        out.xtilde = std::move(candidate);
        value = cand_value;
        grad = std::move(cand_grad);
        accepted = true;
        ++out.steps_accepted;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
  }
  out.objective_after = value;
  return out;
}

void update_multipliers(SolverState& state, const SolverConfig& config) {
  state.LambdaU += config.rho * (state.U - state.D);
  state.LambdaV += config.rho * (state.V - state.Z);
  state.LambdaXtilde += config.rho * (state.Y - state.Xtilde);
}

double model_objective(const SolverState& state, const SolverConfig& config,
                       const TemporalLaplacian& lt, const AffinityGraph* g0) {
  double value = config.lambda0 * (state.Xtilde - state.D * state.Z).squaredNorm() +
                 0.5 * config.lambda1 * state.Z.squaredNorm() +
                 0.5 * config.lambda2 * temporal_energy(state.Z, lt.LT);
  if (config.mode == SolverMode::Full && g0 != nullptr) {
    value += graph_loss(*g0, state.Xtilde, config.h).value;
  }
  return value;
}

SolverState initial_state(const Matrix& x, const SolverConfig& config) {
  const Eigen::Index n = x.rows();
  const Eigen::Index frames = x.cols();
  const Eigen::Index r = config.r;
  Rng rng = seeded_rng(config.seed);

  SolverState state;
  state.D.resize(n, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) state.D(i, j) = rng.uniform();
    const double norm = state.D.col(j).norm();
    if (norm > 0.0) {
      state.D.col(j) /= norm;
    } else {
      state.D.col(j).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    }
  }
  state.U = state.D;
  state.Z.resize(r, frames);
  for (Eigen::Index j = 0; j < frames; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) state.Z(i, j) = rng.uniform(0.0, 1e-2);
  }
  state.V = state.Z;
  state.Xtilde = x;
  state.Y = x;
  state.LambdaXtilde = Matrix::Zero(n, frames);
  state.LambdaU = Matrix::Zero(n, r);
  state.LambdaV = Matrix::Zero(r, frames);
  return state;
}

FitResult fit(const FeatureSequence& seq, const SolverConfig& config, const FitOptions& options) {
  validate(seq);
  config.validate();
  const Matrix& x = seq.features;
  if (!is_normalized(x)) {
    throw InvalidArgument("fit: input features must be normalized to [0, 1]");
  }
  const Eigen::Index frames = x.cols();
  if (config.s >= frames) {
    std::ostringstream msg;
    msg << "fit: temporal window s=" << config.s << " needs more than " << frames << " frames";
    throw InvalidArgument(msg.str());
  }

  const bool full = config.mode == SolverMode::Full;
  const TemporalLaplacian lt = build_temporal_laplacian(frames, config.s);
  AffinityGraph g0;
  if (full) g0 = build_affinity(x, config.h);

  SolverState state = initial_state(x, config);
  FitResult result;

  for (int it = 1; it <= config.max_outer_iters; ++it) {
    IterationDiagnostics diag;
    diag.iteration = it;

    state.V = update_V(state, config, lt);
    diag.sylvester_residual = sylvester_residual(state, config, lt, state.V);
    state.U = update_U(state, config);
    state.Z = update_Z(state, config);
    state.D = update_D(state, config);
    if (full) {
      state.Y = update_Y(state, config);
      XtildeUpdate xt = update_Xtilde(state, config, g0);
      state.Xtilde = std::move(xt.xtilde);
      diag.descent_stalled = xt.stalled;
      if (xt.stalled) {
        std::ostringstream msg;
        msg << "iteration " << it << ": auxiliary-data descent stalled after backtracking";
        result.warnings.push_back(msg.str());
      }
    }
    update_multipliers(state, config);
    state.iteration = it;

    const Matrix gap = state.Y - state.Xtilde;
    diag.primal_y_xtilde_fro = gap.norm();
    diag.primal_y_xtilde_max = gap.size() ? gap.cwiseAbs().maxCoeff() : 0.0;
    diag.primal_u_d_fro = (state.U - state.D).norm();
    diag.primal_v_z_fro = (state.V - state.Z).norm();
    diag.graph_loss = full ? graph_loss(g0, state.Xtilde, config.h).value : 0.0;
    diag.objective = model_objective(state, config, lt, full ? &g0 : nullptr);
    state.diagnostics.push_back(diag);

    if (options.observer) options.observer(state);

    result.iterations_run = it;
    const double primal_max =
        std::max({diag.primal_y_xtilde_max, (state.U - state.D).cwiseAbs().maxCoeff(),
                  (state.V - state.Z).cwiseAbs().maxCoeff()});
    if (primal_max < config.tol) {
      result.converged = true;
      break;
    }
  }

  result.Z = std::move(state.Z);
  result.D = std::move(state.D);
  result.Xtilde = std::move(state.Xtilde);
  result.diagnostics = std::move(state.diagnostics);
  return result;
}

}  // namespace gcrl
