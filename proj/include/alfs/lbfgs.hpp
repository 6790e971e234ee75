#pragma once

// Limited-memory BFGS with a weak-Wolfe bisection line search.
//
// Sign convention: the search direction is d = H * grad and iterates move
// as x_{k+1} = x_k - alpha * d, so d is an ascent direction and the step
// subtracts it.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alfs/error.hpp"

namespace alfs::lbfgs {

using Eigen::VectorXd;

struct Config {
  int history_size = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_iters = 100;
  double grad_tol = 1e-6;
  double initial_scaling = 1.0;
  int max_line_search = 60;
};

/// history_size = 0 is accepted and degenerates to gradient descent.
inline void check_config(const Config& cfg) {
  detail::require(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0, "lbfgs: need 0 < c1 < c2 < 1");
  detail::require(cfg.history_size >= 0, "lbfgs: history_size must be non-negative");
  detail::require(cfg.max_iters >= 0, "lbfgs: max_iters must be non-negative");
  detail::require(cfg.grad_tol >= 0.0, "lbfgs: grad_tol must be non-negative");
  detail::require(cfg.initial_scaling > 0.0, "lbfgs: initial_scaling must be positive");
  detail::require(cfg.max_line_search >= 1, "lbfgs: max_line_search must be positive");
}

struct CurvaturePair {
  VectorXd s;  // x_{k+1} - x_k
  VectorXd y;  // grad_{k+1} - grad_k
};

/// Pairs with <y,s> <= 1e-12 |y||s| would break positive definiteness.
inline bool acceptable_pair(const CurvaturePair& p) {
  const double ys = p.y.dot(p.s);
  return ys > 1e-12 * p.y.norm() * p.s.norm() && ys > 0.0;
}

/// Two-loop recursion: returns H * grad with H0 = initial_scaling * I and
/// `history` ordered oldest first.
inline VectorXd two_loop_direction(const VectorXd& grad, std::span<const CurvaturePair> history,
                                   double initial_scaling) {
  if (!grad.allFinite()) throw NumericalError("lbfgs: non-finite gradient");
  VectorXd q = grad;
  std::vector<double> alpha(history.size());
  std::vector<double> rho(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    rho[i] = 1.0 / history[i].y.dot(history[i].s);
    alpha[i] = rho[i] * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  VectorXd r = initial_scaling * q;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = rho[i] * history[i].y.dot(r);
    r += (alpha[i] - beta) * history[i].s;
  }
  return r;
}

/// Callable computing f(x) and writing grad f(x) into its second argument.
template <typename F>
concept Objective = requires(F f, const VectorXd& x, VectorXd& g) {
  { f(x, g) } -> std::convertible_to<double>;
};

struct LineSearchResult {
  double step = 0.0;
  VectorXd x;
  double f = 0.0;
  VectorXd grad;
  int evaluations = 0;
};

class LineSearchError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Weak Wolfe search along x - step * d by bracketing and bisection.
///   sufficient decrease: f(x - a d) <= f(x) - c1 a <g, d>
///   curvature:           <grad(x - a d), d> <= c2 <g, d>
template <Objective F>
LineSearchResult wolfe_search(F&& fn, const VectorXd& x, double fx, const VectorXd& gx, const VectorXd& d,
                              const Config& cfg, double initial_step = 1.0) {
  const double slope = gx.dot(d);
  if (!(slope > 0.0)) throw LineSearchError("wolfe_search: d is not a descent direction");
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double step = initial_step;
  LineSearchResult out;
  out.grad.resize(x.size());
  for (int it = 0; it < cfg.max_line_search; ++it) {
    out.x = x - step * d;
    out.f = fn(out.x, out.grad);
    ++out.evaluations;
    if (!std::isfinite(out.f) || out.f > fx - cfg.c1 * step * slope) {
      hi = step;
    } else if (out.grad.dot(d) > cfg.c2 * slope) {
      lo = step;
    } else {
      out.step = step;
      return out;
    }
    step = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
  }
  throw LineSearchError("wolfe_search: no Wolfe step after " + std::to_string(cfg.max_line_search) + " trials");
}

enum class Status { kConverged, kMaxIterations, kLineSearchFailed };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kConverged: return "converged";
    case Status::kMaxIterations: return "max_iters";
    case Status::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

struct Result {
  VectorXd x;
  double f = 0.0;
  VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  Status status = Status::kMaxIterations;
  std::string message;
  std::vector<double> objective_trace;  // f at x0 and each accepted iterate
  std::size_t max_history_seen = 0;
  int skipped_pairs = 0;
};

/// Minimizes a smooth function. On line-search failure the last accepted
/// iterate is returned with status kLineSearchFailed.
template <Objective F>
Result minimize(F&& fn, const VectorXd& x0, const Config& cfg = {}) {
  check_config(cfg);
  Result res;
  res.x = x0;
  res.grad.resize(x0.size());
  res.f = fn(res.x, res.grad);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !res.grad.allFinite()) throw NumericalError("lbfgs: objective not finite at x0");
  res.objective_trace.push_back(res.f);

  std::vector<CurvaturePair> history;
  double scaling = cfg.initial_scaling;
  for (;;) {
    if (res.grad.norm() <= cfg.grad_tol) {
      res.status = Status::kConverged;
      return res;
    }
    if (res.iterations >= cfg.max_iters) {
      res.status = Status::kMaxIterations;
      return res;
    }
    const VectorXd d = two_loop_direction(res.grad, history, scaling);
    // Without curvature information the first trial step is normalized.
    const double first_step = history.empty() ? std::min(1.0, 1.0 / (scaling * res.grad.norm())) : 1.0;
    LineSearchResult ls;
    try {
      ls = wolfe_search(fn, res.x, res.f, res.grad, d, cfg, first_step);
    } catch (const LineSearchError& e) {
      res.status = Status::kLineSearchFailed;
      res.message = e.what();
      return res;
    }
    res.evaluations += ls.evaluations;
    CurvaturePair pair{ls.x - res.x, ls.grad - res.grad};
    res.x = std::move(ls.x);
    res.grad = std::move(ls.grad);
    res.f = ls.f;
    res.objective_trace.push_back(res.f);
    ++res.iterations;

    if (cfg.history_size == 0) continue;
    if (!acceptable_pair(pair)) {
      ++res.skipped_pairs;
      continue;
    }
    scaling = pair.s.dot(pair.y) / pair.y.squaredNorm();
    if (static_cast<int>(history.size()) == cfg.history_size) history.erase(history.begin());
    history.push_back(std::move(pair));
    res.max_history_seen = std::max(res.max_history_seen, history.size());
  }
}

}  // namespace alfs::lbfgs
