#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/prox.hpp"

namespace alfs {

struct RankedIndex {
  Index index = 0;
  double score = 0.0;
};

struct SelectionResult {
  std::vector<RankedIndex> sample_ranking;   // all n rows of W, descending l2 norm
  std::vector<RankedIndex> feature_ranking;  // all d columns of W, descending l2 norm
  Index m = 0;
  Index r = 0;
  IndexList selected_samples;   // top-m prefix
  IndexList selected_features;  // top-r prefix
  bool low_score_warning = false;  // some selected score < 1e-6
};

namespace detail {

/// Descending by score, ascending index on ties.
inline std::vector<RankedIndex> rank_descending(const VectorXd& scores) {
  std::vector<RankedIndex> ranking(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) ranking[static_cast<std::size_t>(i)] = {i, scores(i)};
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const RankedIndex& a, const RankedIndex& b) { return a.score > b.score; });
  return ranking;
}

inline IndexList prefix(const std::vector<RankedIndex>& ranking, Index count) {
  IndexList out;
  for (Index i = 0; i < count; ++i) out.push_back(ranking[static_cast<std::size_t>(i)].index);
  return out;
}

}  // namespace detail

inline constexpr double kLowScore = 1e-6;

/// Ranks samples by row norms and features by column norms of W (n x d).
inline SelectionResult rank_and_select(const MatrixXd& w, const SelectionRequest& req) {
  check_request(req, w.cols(), w.rows());
  SelectionResult out;
  out.m = req.m;
  out.r = req.r;
  out.sample_ranking = detail::rank_descending(w.rowwise().norm());
  out.feature_ranking = detail::rank_descending(w.colwise().norm().transpose());
  out.selected_samples = detail::prefix(out.sample_ranking, req.m);
  out.selected_features = detail::prefix(out.feature_ranking, req.r);
  for (Index i = 0; i < req.m; ++i)
    out.low_score_warning |= out.sample_ranking[static_cast<std::size_t>(i)].score < kLowScore;
  for (Index i = 0; i < req.r; ++i)
    out.low_score_warning |= out.feature_ranking[static_cast<std::size_t>(i)].score < kLowScore;
  return out;
}

/// ||X - C U R||_F^2 with C = X(:, samples), R = X(features, :) and the
/// Frobenius-optimal core U = C^+ X R^+.
inline double reconstruction_error(const MatrixXd& x, const IndexList& samples, const IndexList& features) {
  detail::require(!samples.empty() && !features.empty(), "reconstruction_error: empty index set");
  for (Index s : samples) detail::require(s >= 0 && s < x.cols(), "reconstruction_error: sample index out of range");
  for (Index f : features) detail::require(f >= 0 && f < x.rows(), "reconstruction_error: feature index out of range");
  const MatrixXd c = x(Eigen::all, samples);
  const MatrixXd r = x(features, Eigen::all);
  const MatrixXd u = pseudo_inverse(c) * x * pseudo_inverse(r);
  return (x - c * u * r).squaredNorm();
}

inline double reconstruction_error(const Dataset& ds, const IndexList& samples, const IndexList& features) {
  return reconstruction_error(ds.matrix, samples, features);
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

inline constexpr double kOracleLimit = 1e6;

/// Binomial coefficient as a double (saturates at infinity).
inline double choose(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Advances `comb` (strictly increasing, values < n) to the next combination
/// in lexicographic order; false when exhausted.
inline bool next_combination(IndexList& comb, Index n) {
  const auto k = static_cast<Index>(comb.size());
  for (Index i = k - 1; i >= 0; --i) {
    auto& c = comb[static_cast<std::size_t>(i)];
    if (c < n - k + i) {
      ++c;
      for (Index j = i + 1; j < k; ++j) comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

inline IndexList first_combination(Index k) {
  IndexList comb(static_cast<std::size_t>(k));
  std::iota(comb.begin(), comb.end(), Index{0});
  return comb;
}

struct OracleResult {
  IndexList samples;
  IndexList features;
  double error = std::numeric_limits<double>::infinity();
  double pairs_evaluated = 0;
};

/// Enumerates every (S, F) with |S| = m, |F| = r; the lexicographically
/// first minimizer wins ties.
inline OracleResult oracle_best_subsets(const MatrixXd& x, const SelectionRequest& req) {
  check_request(req, x.rows(), x.cols());
  const double pairs = choose(x.cols(), req.m) * choose(x.rows(), req.r);
  if (pairs > kOracleLimit)
    throw ValidationError("oracle: C(" + std::to_string(x.cols()) + "," + std::to_string(req.m) + ") * C(" +
                          std::to_string(x.rows()) + "," + std::to_string(req.r) + ") = " + detail::format_double(pairs) +
                          " subset pairs exceeds the enumeration limit of 1e6");

  std::vector<MatrixXd> row_projectors;  // R^+ R for every feature subset, in order
  std::vector<IndexList> feature_sets;
  for (IndexList f = first_combination(req.r);;) {
    const MatrixXd r = x(f, Eigen::all);
    row_projectors.push_back(pseudo_inverse(r) * r);
    feature_sets.push_back(f);
    if (!next_combination(f, x.rows())) break;
  }

  OracleResult best;
  for (IndexList s = first_combination(req.m);;) {
    const MatrixXd c = x(Eigen::all, s);
    const MatrixXd projected = c * (pseudo_inverse(c) * x);  // C C^+ X
    for (std::size_t fi = 0; fi < feature_sets.size(); ++fi) {
      const double err = (x - projected * row_projectors[fi]).squaredNorm();
      best.pairs_evaluated += 1;
      if (err < best.error) {
        best.error = err;
        best.samples = s;
        best.features = feature_sets[fi];
      }
    }
    if (!next_combination(s, x.cols())) break;
  }
  return best;
}

inline OracleResult oracle_best_subsets(const Dataset& ds, const SelectionRequest& req) {
  return oracle_best_subsets(ds.matrix, req);
}

}  // namespace alfs
