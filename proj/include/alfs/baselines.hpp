#pragma once

// Comparison methods: uniform random sampling, variance feature ranking and
// leverage-score randomized CUR.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/prox.hpp"
#include "alfs/random.hpp"
#include "alfs/selection.hpp"

namespace alfs {

/// m distinct indices drawn uniformly from 0..n-1, sorted ascending.
inline IndexList random_sampling(Index n, Index m, std::uint64_t seed) {
  detail::require(m >= 0 && m <= n, "random_sampling: m=" + std::to_string(m) + " exceeds n=" + std::to_string(n));
  Rng rng(seed);
  IndexList out = random_prefix(rng, n, m);
  std::sort(out.begin(), out.end());
  return out;
}

/// Sample variance of each feature (row) across samples.
inline VectorXd feature_variances(const MatrixXd& x) {
  const VectorXd mean = x.rowwise().mean();
  const double denom = x.cols() > 1 ? static_cast<double>(x.cols() - 1) : 1.0;
  return (x.colwise() - mean).rowwise().squaredNorm() / denom;
}

/// The r highest-variance features (ties by ascending index), sorted ascending.
inline IndexList variance_feature_select(const MatrixXd& x, Index r) {
  detail::require(r >= 1 && r <= x.rows(), "variance_feature_select: r=" + std::to_string(r) + " outside [1, " +
                                               std::to_string(x.rows()) + "]");
  IndexList out = detail::prefix(detail::rank_descending(feature_variances(x)), r);
  std::sort(out.begin(), out.end());
  return out;
}

inline IndexList variance_feature_select(const Dataset& ds, Index r) { return variance_feature_select(ds.matrix, r); }

struct LeverageScores {
  VectorXd column;  // n entries, sums to k
  VectorXd row;     // d entries, sums to k
  bool degenerate = false;  // sigma_k is not separated from sigma_{k+1}
};

/// Squared row norms of the top-k right (columns) and left (rows) singular
/// vectors.
inline LeverageScores leverage_scores(const MatrixXd& x, Index k) {
  detail::require(k >= 1 && k <= std::min(x.rows(), x.cols()), "leverage_scores: k outside [1, min(d, n)]");
  const ThinSvd svd = thin_svd(x);
  LeverageScores out;
  if (svd.s(0) == 0.0) {  // singular vectors of a zero matrix carry no information
    out.column = VectorXd::Zero(x.cols());
    out.row = VectorXd::Zero(x.rows());
    out.degenerate = true;
    return out;
  }
  out.column = svd.v.leftCols(k).rowwise().squaredNorm();
  out.row = svd.u.leftCols(k).rowwise().squaredNorm();
  const double top = svd.s(0);
  if (svd.s(k - 1) <= 1e-10 * top) out.degenerate = true;
  if (k < svd.s.size() && svd.s(k - 1) - svd.s(k) <= 1e-10 * top) out.degenerate = true;
  return out;
}

/// ||X - X_q||_F^2 for the best rank-q approximation.
inline double svd_tail_energy(const MatrixXd& x, Index q) {
  const VectorXd s = singular_values(x);
  double tail = 0.0;
  for (Index i = std::max<Index>(q, 0); i < s.size(); ++i) tail += s(i) * s(i);
  return tail;
}

struct RcurConfig {
  Index k = 1;
  Index m = 1;  // column draws
  Index r = 1;  // row draws
  double eps = 0.5;
  std::uint64_t seed = 0;
  bool exact_count = false;  // sample without replacement to hit m, r exactly
};

struct RcurResult {
  MatrixXd c;
  MatrixXd u;
  MatrixXd r;
  IndexList column_indices;  // sorted, distinct
  IndexList row_indices;     // sorted, distinct
  double err = 0.0;          // ||X - CUR||_F^2
  double svd_err_k = 0.0;    // ||X - X_k||_F^2
  double lower_bound = 0.0;  // ||X - X_q||_F^2, q = min(m', r')
  bool degenerate_scores = false;
};

namespace detail {

inline IndexList leverage_sample(Rng& rng, const VectorXd& scores, Index draws, bool exact_count) {
  std::vector<double> weights(scores.data(), scores.data() + scores.size());
  for (double& w : weights) w = std::max(w, 0.0);
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw NumericalError("rcur: all leverage scores are zero");
  IndexList picked;
  if (!exact_count) {
    for (Index t = 0; t < draws; ++t) picked.push_back(weighted_draw(rng, weights));
    std::sort(picked.begin(), picked.end());
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    return picked;
  }
  for (Index t = 0; t < draws; ++t) {
    double remaining = 0.0;
    for (double w : weights) remaining += w;
    Index choice;
    if (remaining > 0.0) {
      choice = weighted_draw(rng, weights);
    } else {  // only zero-score items left: uniform among unpicked
      IndexList open;
      for (std::size_t i = 0; i < weights.size(); ++i)
        if (std::find(picked.begin(), picked.end(), static_cast<Index>(i)) == picked.end()) open.push_back(static_cast<Index>(i));
      choice = open[uniform_below(rng, open.size())];
    }
    picked.push_back(choice);
    weights[static_cast<std::size_t>(choice)] = 0.0;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace detail

/// Randomized CUR with leverage-score sampling and core U = C^+ X R^+.
inline RcurResult rcur(const MatrixXd& x, const RcurConfig& cfg) {
  detail::require(cfg.eps > 0.0 && cfg.eps < 1.0, "rcur: eps must lie in (0, 1)");
  detail::require(cfg.m >= 1 && cfg.m <= x.cols(), "rcur: m outside [1, n]");
  detail::require(cfg.r >= 1 && cfg.r <= x.rows(), "rcur: r outside [1, d]");
  const LeverageScores lev = leverage_scores(x, cfg.k);
  Rng rng(cfg.seed);
  RcurResult out;
  out.degenerate_scores = lev.degenerate;
  out.column_indices = detail::leverage_sample(rng, lev.column, cfg.m, cfg.exact_count);
  out.row_indices = detail::leverage_sample(rng, lev.row, cfg.r, cfg.exact_count);
  out.c = x(Eigen::all, out.column_indices);
  out.r = x(out.row_indices, Eigen::all);
  out.u = pseudo_inverse(out.c) * x * pseudo_inverse(out.r);
  out.err = (x - out.c * out.u * out.r).squaredNorm();
  out.svd_err_k = svd_tail_energy(x, cfg.k);
  out.lower_bound = svd_tail_energy(
      x, static_cast<Index>(std::min(out.column_indices.size(), out.row_indices.size())));
  return out;
}

inline RcurResult rcur(const Dataset& ds, const RcurConfig& cfg) { return rcur(ds.matrix, cfg); }

}  // namespace alfs
