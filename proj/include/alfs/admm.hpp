#pragma once

// ADMM solver for joint sample/feature selection.
//
// Objective over W (n x d), with X the d x n data matrix:
//
//   ||X - XWX||_F^2 + alpha ||W||_{2,1} + beta ||W^T||_{2,1}
//     + gamma ||W||_* + eta ||T o (WX)||_1
//
// split as WX = Z (n x n) and W = W~ (n x d). Each outer iteration updates
// W by L-BFGS on a smoothed subproblem, Z by weighted soft thresholding,
// W~ by singular value thresholding, then the multipliers and penalties.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/lbfgs.hpp"
#include "alfs/prox.hpp"

namespace alfs {

struct RegularizationParams {
  double alpha = 1.0;  // row sparsity of W (samples)
  double beta = 1.0;   // column sparsity of W (features)
  double gamma = 1.0;  // nuclear norm
  double eta = 1.0;    // angular locality
  double varsigma = 1e-8;
  double smoothing_eps = 1e-8;
};

inline void check_params(const RegularizationParams& p) {
  detail::require(p.alpha >= 0.0 && p.beta >= 0.0 && p.gamma >= 0.0 && p.eta >= 0.0,
                  "regularization parameters must be non-negative");
  detail::require(p.varsigma > 0.0, "varsigma must be positive");
  detail::require(p.smoothing_eps > 0.0, "smoothing_eps must be positive");
}

struct SolverConfig {
  double rho1_init = 1e-6;
  double rho2_init = 1e-6;
  double rho_max = 1e10;
  double tau = 1.1;
  double epsilon = 1e-3;
  int max_outer_iters = 1000;
  bool adaptive_rho = true;
  lbfgs::Config inner{};
  std::uint64_t seed = 0;  // unused by the solver itself; echoed in reports
};

inline void check_config(const SolverConfig& c) {
  detail::require(c.rho1_init > 0.0 && c.rho2_init > 0.0, "rho init must be positive");
  detail::require(c.rho1_init <= c.rho_max && c.rho2_init <= c.rho_max, "rho init must not exceed rho_max");
  detail::require(c.tau >= 1.0, "tau must be >= 1");
  detail::require(c.epsilon > 0.0, "epsilon must be positive");
  detail::require(c.max_outer_iters >= 1, "max_outer_iters must be positive");
  lbfgs::check_config(c.inner);
}

struct SolverState {
  MatrixXd w;        // n x d
  MatrixXd z;        // n x n, tracks WX
  MatrixXd w_tilde;  // n x d, tracks W
  MatrixXd lambda1;  // n x n
  MatrixXd lambda2;  // n x d
  double rho1 = 1e-6;
  double rho2 = 1e-6;
  int iter = 0;

  static SolverState zeros(Index d, Index n, double rho1, double rho2) {
    return {MatrixXd::Zero(n, d), MatrixXd::Zero(n, n), MatrixXd::Zero(n, d),
            MatrixXd::Zero(n, n), MatrixXd::Zero(n, d), rho1, rho2, 0};
  }

  bool all_finite() const {
    return w.allFinite() && z.allFinite() && w_tilde.allFinite() && lambda1.allFinite() && lambda2.allFinite();
  }
};

namespace detail {

inline void check_shapes(const MatrixXd& x, const MatrixXd& w) {
  require(w.rows() == x.cols() && w.cols() == x.rows(), "W must be n x d for a d x n data matrix");
}

inline void check_shapes(const MatrixXd& x, const SolverState& s) {
  check_shapes(x, s.w);
  const Index n = x.cols();
  const Index d = x.rows();
  require(s.z.rows() == n && s.z.cols() == n && s.lambda1.rows() == n && s.lambda1.cols() == n,
          "Z and Lambda1 must be n x n");
  require(s.w_tilde.rows() == n && s.w_tilde.cols() == d && s.lambda2.rows() == n && s.lambda2.cols() == d,
          "W~ and Lambda2 must be n x d");
}

inline double smoothed_l21(const MatrixXd& m, double eps) {
  return (m.rowwise().squaredNorm().array() + eps).sqrt().sum();
}

}  // namespace detail

/// Exact (unsmoothed) objective value.
inline double objective(const MatrixXd& x, const MatrixXd& w, const RegularizationParams& p, const AngularWeights& t) {
  detail::check_shapes(x, w);
  detail::require(t.t.rows() == x.cols() && t.t.cols() == x.cols(), "angular weights must be n x n");
  const MatrixXd wx = w * x;
  double f = (x - x * wx).squaredNorm();
  if (p.alpha != 0.0) f += p.alpha * w.rowwise().norm().sum();
  if (p.beta != 0.0) f += p.beta * w.colwise().norm().sum();
  if (p.gamma != 0.0) f += p.gamma * nuclear_norm(w);
  if (p.eta != 0.0) f += p.eta * t.t.cwiseProduct(wx).cwiseAbs().sum();
  if (!std::isfinite(f)) throw NumericalError("objective: non-finite value");
  return f;
}

inline double objective(const Dataset& ds, const MatrixXd& w, const RegularizationParams& p, const AngularWeights& t) {
  return objective(ds.matrix, w, p, t);
}

/// Augmented Lagrangian of the split problem.
inline double augmented_lagrangian(const MatrixXd& x, const SolverState& s, const RegularizationParams& p,
                                   const AngularWeights& t) {
  detail::check_shapes(x, s);
  const MatrixXd wx = s.w * x;
  const MatrixXd r1 = wx - s.z;
  const MatrixXd r2 = s.w - s.w_tilde;
  double f = (x - x * wx).squaredNorm();
  f += p.alpha * s.w.rowwise().norm().sum() + p.beta * s.w.colwise().norm().sum();
  if (p.gamma != 0.0) f += p.gamma * nuclear_norm(s.w_tilde);
  f += p.eta * t.t.cwiseProduct(s.z).cwiseAbs().sum();
  f += (s.lambda1.array() * r1.array()).sum() + (s.lambda2.array() * r2.array()).sum();
  f += 0.5 * s.rho1 * r1.squaredNorm() + 0.5 * s.rho2 * r2.squaredNorm();
  return f;
}

/// Smoothed W-subproblem with Z, W~, the multipliers and penalties frozen.
/// Row/column l2 norms are replaced by sqrt(||.||^2 + smoothing_eps).
class WSubproblem {
 public:
  WSubproblem(const MatrixXd& x, const SolverState& s, const RegularizationParams& p)
      : x_(x),
        xt_(x.transpose()),
        z_shift_(s.z - s.lambda1 / s.rho1),
        wt_shift_(s.w_tilde - s.lambda2 / s.rho2),
        rho1_(s.rho1),
        rho2_(s.rho2),
        alpha_(p.alpha),
        beta_(p.beta),
        eps_(p.smoothing_eps) {
    detail::check_shapes(x, s);
  }

  Index rows() const { return x_.cols(); }
  Index cols() const { return x_.rows(); }

  double value(const Eigen::Ref<const MatrixXd>& w) const {
    const MatrixXd wx = w * x_;
    double f = (x_ - x_ * wx).squaredNorm();
    f += 0.5 * rho1_ * (wx - z_shift_).squaredNorm();
    f += 0.5 * rho2_ * (w - wt_shift_).squaredNorm();
    if (alpha_ != 0.0) f += alpha_ * detail::smoothed_l21(w, eps_);
    if (beta_ != 0.0) f += beta_ * detail::smoothed_l21(w.transpose(), eps_);
    return f;
  }

  /// Value and gradient in one pass.
  double value_and_gradient(const Eigen::Ref<const MatrixXd>& w, MatrixXd& grad) const {
    const MatrixXd wx = w * x_;
    const MatrixXd xw = x_ * w;  // d x d
    const MatrixXd resid = xw * x_ - x_;  // XWX - X
    const MatrixXd r1 = wx - z_shift_;
    const MatrixXd r2 = w - wt_shift_;
    double f = resid.squaredNorm() + 0.5 * rho1_ * r1.squaredNorm() + 0.5 * rho2_ * r2.squaredNorm();
    grad.noalias() = 2.0 * (xt_ * (resid * xt_));
    grad.noalias() += rho1_ * (r1 * xt_);
    grad += rho2_ * r2;
    if (alpha_ != 0.0) {
      const VectorXd norms = (w.rowwise().squaredNorm().array() + eps_).sqrt();
      f += alpha_ * norms.sum();
      grad += alpha_ * (norms.cwiseInverse().asDiagonal() * w);
    }
    if (beta_ != 0.0) {
      const Eigen::RowVectorXd norms = (w.colwise().squaredNorm().array() + eps_).sqrt();
      f += beta_ * norms.sum();
      grad += beta_ * (w * norms.cwiseInverse().asDiagonal());
    }
    return f;
  }

 private:
  const MatrixXd& x_;
  MatrixXd xt_;
  MatrixXd z_shift_;   // Z - Lambda1/rho1
  MatrixXd wt_shift_;  // W~ - Lambda2/rho2
  double rho1_, rho2_, alpha_, beta_, eps_;
};

inline MatrixXd w_subproblem_gradient(const MatrixXd& x, const SolverState& s, const RegularizationParams& p) {
  MatrixXd g;
  WSubproblem(x, s, p).value_and_gradient(s.w, g);
  return g;
}

inline double w_subproblem_objective(const MatrixXd& x, const SolverState& s, const RegularizationParams& p) {
  return WSubproblem(x, s, p).value(s.w);
}

struct WUpdate {
  MatrixXd w;
  lbfgs::Status status = lbfgs::Status::kMaxIterations;
  int iterations = 0;
  double start_value = 0.0;
  double final_value = 0.0;
};

/// Minimizes the smoothed W-subproblem by L-BFGS, warm-started at s.w.
inline WUpdate solve_w_subproblem(const MatrixXd& x, const SolverState& s, const RegularizationParams& p,
                                  const lbfgs::Config& inner) {
  const WSubproblem sub(x, s, p);
  const Index n = sub.rows();
  const Index d = sub.cols();
  MatrixXd grad(n, d);
  auto fn = [&](const VectorXd& v, VectorXd& g) {
    const Eigen::Map<const MatrixXd> w(v.data(), n, d);
    const double f = sub.value_and_gradient(w, grad);
    g = Eigen::Map<const VectorXd>(grad.data(), grad.size());
    return f;
  };
  const VectorXd x0 = Eigen::Map<const VectorXd>(s.w.data(), s.w.size());
  const lbfgs::Result res = lbfgs::minimize(fn, x0, inner);
  WUpdate out;
  out.w = Eigen::Map<const MatrixXd>(res.x.data(), n, d);
  out.status = res.status;
  out.iterations = res.iterations;
  out.start_value = res.objective_trace.front();
  out.final_value = res.f;
  return out;
}

/// Z = soft_threshold(WX + Lambda1/rho1, eta * T / rho1).
inline MatrixXd update_z(const MatrixXd& x, const SolverState& s, const AngularWeights& t, double eta) {
  detail::require(s.rho1 > 0.0, "update_z: rho1 must be positive");
  detail::require(eta >= 0.0, "update_z: eta must be non-negative");
  const MatrixXd k = s.w * x + s.lambda1 / s.rho1;
  if (eta == 0.0) return k;
  return soft_threshold(k, (eta / s.rho1) * t.t);
}

/// W~ = svt(W + Lambda2/rho2, gamma/rho2).
inline MatrixXd update_w_tilde(const SolverState& s, double gamma) {
  detail::require(s.rho2 > 0.0, "update_w_tilde: rho2 must be positive");
  const MatrixXd k = s.w + s.lambda2 / s.rho2;
  if (gamma == 0.0) return k;
  return svt(k, gamma / s.rho2);
}

/// Multiplier ascent followed by the (optional) geometric penalty increase.
inline SolverState update_duals_and_rho(const MatrixXd& x, SolverState s, const SolverConfig& cfg) {
  s.lambda1 += s.rho1 * (s.w * x - s.z);
  s.lambda2 += s.rho2 * (s.w - s.w_tilde);
  if (cfg.adaptive_rho) {
    s.rho1 = std::min(cfg.tau * s.rho1, cfg.rho_max);
    s.rho2 = std::min(cfg.tau * s.rho2, cfg.rho_max);
  }
  return s;
}

struct ConvergenceCheck {
  bool converged = false;
  double residual_z = 0.0;   // ||WX - Z||_inf
  double residual_w = 0.0;   // ||W - W~||_inf
  double relative_change = std::numeric_limits<double>::quiet_NaN();
};

/// All three stopping conditions; without a previous objective the check
/// never passes. A zero previous objective counts as unchanged only if the
/// current one is also zero.
inline ConvergenceCheck check_convergence(const MatrixXd& x, const SolverState& s, std::optional<double> prev_objective,
                                          double curr_objective, double epsilon) {
  detail::require(epsilon > 0.0, "check_convergence: epsilon must be positive");
  ConvergenceCheck c;
  c.residual_z = (s.w * x - s.z).cwiseAbs().maxCoeff();
  c.residual_w = (s.w - s.w_tilde).cwiseAbs().maxCoeff();
  bool objective_ok = false;
  if (prev_objective) {
    if (*prev_objective == 0.0) {
      c.relative_change = curr_objective == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      c.relative_change = std::abs((curr_objective - *prev_objective) / *prev_objective);
    }
    objective_ok = c.relative_change < epsilon;
  }
  c.converged = objective_ok && c.residual_z < epsilon && c.residual_w < epsilon;
  return c;
}

/// Squared H-weighted norm of an iterate difference, H block diagonal with
/// blocks (rho1 X^T X + rho2 I, rho1 I, rho2 I, I/rho1, I/rho2) acting on
/// (W, Z, W~, Lambda1, Lambda2). The first block is applied as
/// rho1 ||dW X||^2 + rho2 ||dW||^2.
inline double h_seminorm_sq(const SolverState& delta, const MatrixXd& x, double rho1, double rho2) {
  detail::require(rho1 > 0.0 && rho2 > 0.0, "h_seminorm_sq: penalties must be positive");
  return rho1 * (delta.w * x).squaredNorm() + rho2 * delta.w.squaredNorm() + rho1 * delta.z.squaredNorm() +
         rho2 * delta.w_tilde.squaredNorm() + delta.lambda1.squaredNorm() / rho1 + delta.lambda2.squaredNorm() / rho2;
}

inline SolverState difference(const SolverState& a, const SolverState& b) {
  return {a.w - b.w, a.z - b.z, a.w_tilde - b.w_tilde, a.lambda1 - b.lambda1, a.lambda2 - b.lambda2, a.rho1, a.rho2, a.iter};
}

// ---------------------------------------------------------------------------

enum class StopReason { kConverged, kMaxIterations };

inline const char* to_string(StopReason r) { return r == StopReason::kConverged ? "converged" : "max_iters"; }

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double residual_z = 0.0;
  double residual_w = 0.0;
  double relative_change = std::numeric_limits<double>::quiet_NaN();
  double h_seminorm_sq = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  int inner_iterations = 0;
  lbfgs::Status inner_status = lbfgs::Status::kConverged;
};

struct ConvergenceReport {
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::kMaxIterations;
  int inner_failures = 0;
};

struct SolveResult {
  MatrixXd w;
  ConvergenceReport report;
  SolverState state;
};

/// Runs the ADMM loop from the all-zero initialization. Throws
/// NumericalError if an iterate stops being finite.
inline SolveResult solve(const MatrixXd& x, const RegularizationParams& params, const SolverConfig& cfg) {
  check_params(params);
  check_config(cfg);
  detail::require(x.rows() >= 1 && x.cols() >= 1, "solve: empty data matrix");
  detail::require_finite(x, "solve");
  const AngularWeights t = angular_weights(x, params.varsigma);

  SolveResult out;
  SolverState s = SolverState::zeros(x.rows(), x.cols(), cfg.rho1_init, cfg.rho2_init);
  std::optional<double> prev_objective;
  for (int k = 0; k < cfg.max_outer_iters; ++k) {
    const SolverState prev = s;

    const WUpdate wu = solve_w_subproblem(x, s, params, cfg.inner);
    s.w = wu.w;
    if (wu.status == lbfgs::Status::kLineSearchFailed) ++out.report.inner_failures;
    s.z = update_z(x, s, t, params.eta);
    s.w_tilde = update_w_tilde(s, params.gamma);
    const double rho1 = s.rho1;
    const double rho2 = s.rho2;
    s = update_duals_and_rho(x, std::move(s), cfg);
    s.iter = k + 1;
    if (!s.all_finite())
      throw NumericalError("solve: non-finite iterate at outer iteration " + std::to_string(k + 1) +
                           " (rho1=" + std::to_string(rho1) + ", rho2=" + std::to_string(rho2) + ")");

    const double f = objective(x, s.w, params, t);
    const ConvergenceCheck check = check_convergence(x, s, prev_objective, f, cfg.epsilon);
    IterationRecord rec;
    rec.iter = k + 1;
    rec.objective = f;
    rec.residual_z = check.residual_z;
    rec.residual_w = check.residual_w;
    rec.relative_change = check.relative_change;
    rec.h_seminorm_sq = h_seminorm_sq(difference(prev, s), x, rho1, rho2);
    rec.rho1 = rho1;
    rec.rho2 = rho2;
    rec.inner_iterations = wu.iterations;
    rec.inner_status = wu.status;
    out.report.iterations.push_back(rec);
    prev_objective = f;
    if (check.converged) {
      out.report.stop_reason = StopReason::kConverged;
      break;
    }
  }
  out.w = s.w;
  out.state = std::move(s);
  return out;
}

inline SolveResult solve(const Dataset& ds, const RegularizationParams& params, const SolverConfig& cfg) {
  return solve(ds.matrix, params, cfg);
}

}  // namespace alfs
