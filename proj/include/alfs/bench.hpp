#pragma once

// Evaluation harness: pick samples (and optionally features) with a method
// that only sees the unlabeled training matrix, reveal the labels of the
// picked samples, train a nearest-neighbour classifier on them and score it
// on a held-out test set.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alfs/admm.hpp"
#include "alfs/baselines.hpp"
#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/parallel.hpp"
#include "alfs/random.hpp"
#include "alfs/selection.hpp"

namespace alfs {

// ---------------------------------------------------------------------------
// Classifier

struct KnnResult {
  std::vector<std::string> predicted;
  std::optional<double> accuracy;  // present when the test set is labeled
};

/// k-nearest-neighbour majority vote in Euclidean distance. Distance ties go
/// to the lower training index; vote ties go to the label that appears
/// first among the neighbours ordered nearest first.
inline KnnResult knn_classify(const Dataset& train, const Dataset& test, int k = 1) {
  detail::require(train.has_labels(), "knn_classify: training set has no labels");
  detail::require(train.size() >= 1, "knn_classify: empty training set");
  detail::require(k >= 1 && k <= train.size(), "knn_classify: k outside [1, training size]");
  detail::require(train.dim() == test.dim(), "knn_classify: train/test feature counts differ");
  const auto& labels = *train.labels;
  KnnResult out;
  out.predicted.reserve(static_cast<std::size_t>(test.size()));
  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(train.size()));
  for (Index j = 0; j < test.size(); ++j) {
    const auto q = test.matrix.col(j);
    for (Index i = 0; i < train.size(); ++i) dist[static_cast<std::size_t>(i)] = {(train.matrix.col(i) - q).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<std::pair<std::string, int>> votes;  // in order of first appearance
    for (int t = 0; t < k; ++t) {
      const std::string& label = labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(t)].second)];
      auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == label; });
      if (it == votes.end())
        votes.emplace_back(label, 1);
      else
        ++it->second;
    }
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it)
      if (it->second > best->second) best = it;
    out.predicted.push_back(best->first);
  }
  if (test.labels) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < out.predicted.size(); ++j) hits += out.predicted[j] == (*test.labels)[j];
    out.accuracy = out.predicted.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(out.predicted.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Methods

enum class Sampler { kAlfs, kRandom, kRcur };

struct Method {
  Sampler sampler = Sampler::kAlfs;
  bool variance_features = false;  // rank features by variance first

  std::string label() const {
    const char* base = sampler == Sampler::kAlfs ? "alfs" : sampler == Sampler::kRandom ? "random" : "rcur";
    return variance_features ? std::string("variance+") + base : std::string(base);
  }
};

inline Method parse_method(const std::string& id) {
  Method m;
  std::string base = id;
  if (base.rfind("variance+", 0) == 0) {
    m.variance_features = true;
    base = base.substr(9);
  }
  if (base == "alfs")
    m.sampler = Sampler::kAlfs;
  else if (base == "random")
    m.sampler = Sampler::kRandom;
  else if (base == "rcur")
    m.sampler = Sampler::kRcur;
  else
    throw ValidationError("unknown method '" + id + "' (expected alfs, random, rcur or variance+<sampler>)");
  return m;
}

struct BenchSpec {
  Method method;
  IndexList sample_budgets;
  IndexList feature_budgets;  // empty: curve over samples in the full feature space
  int repeats = 10;
  std::uint64_t seed = 0;
  int knn_k = 1;
  RegularizationParams params;
  SolverConfig solver;
  Index rcur_rank = 0;  // 0: target rank equals the smaller budget
};

/// Which budget the curve varies.
enum class CurveAxis { kSamples, kFeatures };

inline CurveAxis curve_axis(const BenchSpec& spec) {
  return spec.feature_budgets.empty() ? CurveAxis::kSamples : CurveAxis::kFeatures;
}

inline void check_spec(const BenchSpec& spec, Index d, Index n) {
  detail::require(spec.repeats >= 1, "bench: repeats must be >= 1");
  detail::require(spec.knn_k >= 1, "bench: knn k must be >= 1");
  detail::require(!spec.sample_budgets.empty(), "bench: no sample budgets");
  for (Index m : spec.sample_budgets)
    detail::require(m >= 1 && m <= n, "bench: sample budget " + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  for (Index r : spec.feature_budgets)
    detail::require(r >= 1 && r <= d, "bench: feature budget " + std::to_string(r) + " outside [1, " + std::to_string(d) + "]");
  if (curve_axis(spec) == CurveAxis::kFeatures)
    detail::require(spec.sample_budgets.size() == 1, "bench: a feature-budget curve needs exactly one sample budget");
  else
    detail::require(!spec.method.variance_features, "bench: variance+<sampler> needs feature budgets");
  check_params(spec.params);
  check_config(spec.solver);
}

struct Picked {
  IndexList samples;
  IndexList features;  // empty: all features
};

/// Label-free selection on an unlabeled d x n matrix. ALFS solutions are
/// cached per feature subset because W does not depend on the budgets.
class Selector {
 public:
  Selector(const MatrixXd& x, const BenchSpec& spec) : x_(x), spec_(spec) {}

  Picked pick(Index m, std::optional<Index> r, std::uint64_t seed) {
    Picked out;
    IndexList candidate_features;
    if (spec_.method.variance_features) candidate_features = variance_feature_select(x_, *r);

    switch (spec_.method.sampler) {
      case Sampler::kRandom: {
        out.samples = random_sampling(x_.cols(), m, seed);
        if (r && !spec_.method.variance_features) out.features = random_sampling(x_.rows(), *r, seed ^ kFeatureStream);
        break;
      }
      case Sampler::kRcur: {
        const MatrixXd sub = candidate_features.empty() ? x_ : MatrixXd(x_(candidate_features, Eigen::all));
        RcurConfig cfg;
        cfg.m = m;
        cfg.r = r && !spec_.method.variance_features ? *r : sub.rows();
        const Index rank_cap = std::min(sub.rows(), sub.cols());
        cfg.k = std::clamp<Index>(spec_.rcur_rank > 0 ? spec_.rcur_rank : std::min(m, cfg.r), 1, rank_cap);
        cfg.seed = seed;
        cfg.exact_count = true;
        const RcurResult res = rcur(sub, cfg);
        out.samples = res.column_indices;
        if (r && !spec_.method.variance_features) out.features = res.row_indices;
        break;
      }
      case Sampler::kAlfs: {
        const MatrixXd& w = alfs_solution(candidate_features);
        const SelectionResult sel = rank_and_select(w, {m, r && !spec_.method.variance_features ? *r : 1});
        out.samples = sel.selected_samples;
        if (r && !spec_.method.variance_features) out.features = sel.selected_features;
        break;
      }
    }
    if (spec_.method.variance_features) out.features = candidate_features;
    return out;
  }

  int solver_invocations() const { return invocations_; }

 private:
  static constexpr std::uint64_t kFeatureStream = 0x9E3779B97F4A7C15ULL;

  const MatrixXd& alfs_solution(const IndexList& features) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(features);
    if (it != cache_.end()) return it->second;
    const MatrixXd sub = features.empty() ? x_ : MatrixXd(x_(features, Eigen::all));
    ++invocations_;
    return cache_.emplace(features, solve(sub, spec_.params, spec_.solver).w).first->second;
  }

  const MatrixXd& x_;
  const BenchSpec& spec_;
  std::map<IndexList, MatrixXd> cache_;
  std::mutex mutex_;
  int invocations_ = 0;
};

struct AccuracyCurve {
  std::string method;
  CurveAxis axis = CurveAxis::kSamples;
  IndexList budgets;
  std::vector<double> mean;                     // per budget, over successful repeats
  std::vector<std::vector<double>> per_repeat;  // [budget][repeat]; NaN marks a failed cell
  std::vector<std::string> failures;
};

/// Accuracy of a classifier trained on the picked training samples.
inline double evaluate_pick(const Dataset& train, const Dataset& test, const Picked& pick, int knn_k) {
  Dataset revealed = select_samples(train, pick.samples);
  Dataset probe = test;
  if (!pick.features.empty()) {
    revealed = select_features(revealed, pick.features);
    probe = select_features(probe, pick.features);
  }
  const int k = std::min<int>(knn_k, static_cast<int>(revealed.size()));
  return *knn_classify(revealed, probe, k).accuracy;
}

inline AccuracyCurve run_curve(const Dataset& train, const Dataset& test, const BenchSpec& spec) {
  detail::require(train.has_labels() && test.has_labels(), "bench: train and test sets need labels");
  detail::require(train.dim() == test.dim(), "bench: train/test feature counts differ");
  check_spec(spec, train.dim(), train.size());

  AccuracyCurve curve;
  curve.method = spec.method.label();
  curve.axis = curve_axis(spec);
  curve.budgets = curve.axis == CurveAxis::kSamples ? spec.sample_budgets : spec.feature_budgets;
  const std::size_t budgets = curve.budgets.size();
  const auto repeats = static_cast<std::size_t>(spec.repeats);
  curve.per_repeat.assign(budgets, std::vector<double>(repeats, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::string> errors(budgets * repeats);

  Selector selector(train.matrix, spec);
  parallel_for(budgets * repeats, [&](std::size_t cell) {
    const std::size_t b = cell / repeats;
    const std::size_t t = cell % repeats;
    const Index budget = curve.budgets[b];
    const Index m = curve.axis == CurveAxis::kSamples ? budget : spec.sample_budgets.front();
    std::optional<Index> r;
    if (curve.axis == CurveAxis::kFeatures) r = budget;
    try {
      const Picked pick = selector.pick(m, r, spec.seed + t);
      curve.per_repeat[b][t] = evaluate_pick(train, test, pick, spec.knn_k);
    } catch (const Error& e) {
      errors[cell] = "budget " + std::to_string(budget) + ", repeat " + std::to_string(t) + ": " + e.what();
    }
  });
  for (auto& e : errors)
    if (!e.empty()) curve.failures.push_back(std::move(e));

  curve.mean.resize(budgets);
  for (std::size_t b = 0; b < budgets; ++b) {
    double sum = 0.0;
    int ok = 0;
    for (double a : curve.per_repeat[b])
      if (!std::isnan(a)) {
        sum += a;
        ++ok;
      }
    curve.mean[b] = ok ? sum / ok : std::numeric_limits<double>::quiet_NaN();
  }
  return curve;
}

/// Like run_curve, but repeat t draws its own train/test split with seed
/// spec.seed + t, so the average also covers the split.
inline AccuracyCurve run_curve_resampled(const Dataset& ds, Index n_train, const BenchSpec& spec) {
  detail::require(ds.has_labels(), "bench: dataset has no labels");
  AccuracyCurve total;
  for (int t = 0; t < spec.repeats; ++t) {
    const Split sp = split(ds, {n_train, spec.seed + static_cast<std::uint64_t>(t)});
    BenchSpec one = spec;
    one.repeats = 1;
    one.seed = spec.seed + static_cast<std::uint64_t>(t);
    AccuracyCurve c = run_curve(sp.train, sp.test, one);
    if (t == 0) {
      total = c;
      continue;
    }
    for (std::size_t b = 0; b < c.budgets.size(); ++b) total.per_repeat[b].push_back(c.per_repeat[b][0]);
    total.failures.insert(total.failures.end(), c.failures.begin(), c.failures.end());
  }
  for (std::size_t b = 0; b < total.budgets.size(); ++b) {
    double sum = 0.0;
    int ok = 0;
    for (double a : total.per_repeat[b])
      if (!std::isnan(a)) {
        sum += a;
        ++ok;
      }
    total.mean[b] = ok ? sum / ok : std::numeric_limits<double>::quiet_NaN();
  }
  return total;
}

/// CSV with one row per (method, budget, repeat).
inline void write_curves_csv(std::ostream& out, const std::vector<AccuracyCurve>& curves) {
  out << "method,budget,repeat,accuracy\n";
  for (const auto& c : curves)
    for (std::size_t b = 0; b < c.budgets.size(); ++b)
      for (std::size_t t = 0; t < c.per_repeat[b].size(); ++t)
        out << c.method << ',' << c.budgets[b] << ',' << t << ',' << detail::format_double(c.per_repeat[b][t]) << '\n';
}

// ---------------------------------------------------------------------------
// Parameter grid search

struct GridSpec {
  std::vector<double> alpha{0.1, 1.0, 10.0, 100.0};
  std::vector<double> beta{0.1, 1.0, 10.0, 100.0};
  std::vector<double> eta{0.1, 1.0, 10.0, 100.0};
  double gamma = 1.0;
};

/// Grid points in alpha-major order (alpha, then beta, then eta).
inline std::vector<RegularizationParams> expand_grid(const GridSpec& grid, const RegularizationParams& base) {
  std::vector<RegularizationParams> points;
  for (double a : grid.alpha)
    for (double b : grid.beta)
      for (double e : grid.eta) {
        RegularizationParams p = base;
        p.alpha = a;
        p.beta = b;
        p.eta = e;
        p.gamma = grid.gamma;
        points.push_back(p);
      }
  return points;
}

struct GridPoint {
  RegularizationParams params;
  double score = -std::numeric_limits<double>::infinity();
  bool ok = false;
  std::string message;
};

struct GridSearchResult {
  RegularizationParams best;
  double best_score = -std::numeric_limits<double>::infinity();
  MatrixXd best_w;
  std::vector<GridPoint> points;  // in grid order
  int solver_invocations = 0;
};

/// Evaluates every grid point (higher score is better); the first point in
/// grid order wins ties. `solve_fn(params) -> W`, `score_fn(params, W) -> double`.
template <typename SolveFn, typename ScoreFn>
GridSearchResult grid_search(const GridSpec& grid, const RegularizationParams& base, SolveFn&& solve_fn,
                             ScoreFn&& score_fn) {
  const std::vector<RegularizationParams> params = expand_grid(grid, base);
  detail::require(!params.empty(), "grid_search: empty grid");
  GridSearchResult out;
  out.points.resize(params.size());
  std::vector<MatrixXd> solutions(params.size());
  std::atomic<int> invocations{0};
  parallel_for(params.size(), [&](std::size_t i) {
    GridPoint& gp = out.points[i];
    gp.params = params[i];
    try {
      ++invocations;
      solutions[i] = solve_fn(params[i]);
      gp.score = score_fn(params[i], solutions[i]);
      gp.ok = std::isfinite(gp.score);
      if (!gp.ok) gp.message = "non-finite score";
    } catch (const Error& e) {
      gp.message = e.what();
    }
  });
  out.solver_invocations = invocations.load();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < out.points.size(); ++i)
    if (out.points[i].ok && (!best || out.points[i].score > out.points[*best].score)) best = i;
  if (!best) {
    std::string msg = "grid_search: every grid point failed";
    for (const auto& gp : out.points)
      msg += "\n  alpha=" + detail::format_double(gp.params.alpha) + " beta=" + detail::format_double(gp.params.beta) +
             " eta=" + detail::format_double(gp.params.eta) + ": " + gp.message;
    throw NumericalError(msg);
  }
  out.best = out.points[*best].params;
  out.best_score = out.points[*best].score;
  out.best_w = std::move(solutions[*best]);
  return out;
}

/// Default scoring: with at least 10 revealed samples, 1-NN accuracy on a
/// seeded 20% hold-out of the revealed set; otherwise the negated
/// reconstruction error of the selected samples and features.
class ValidationProtocol {
 public:
  ValidationProtocol(const Dataset& train, SelectionRequest req, std::uint64_t seed = 0, int knn_k = 1)
      : train_(train), req_(req), seed_(seed), knn_k_(knn_k) {}

  double operator()(const RegularizationParams&, const MatrixXd& w) const {
    const SelectionResult sel = rank_and_select(w, req_);
    if (req_.m < 10 || !train_.has_labels())
      return -reconstruction_error(train_.matrix, sel.selected_samples, sel.selected_features);
    IndexList revealed = sel.selected_samples;
    Rng rng(seed_);
    const IndexList order = random_prefix(rng, static_cast<Index>(revealed.size()), static_cast<Index>(revealed.size()));
    const auto holdout = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(revealed.size())));
    IndexList fit, check;
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < holdout ? check : fit).push_back(revealed[static_cast<std::size_t>(order[i])]);
    const Dataset fit_ds = select_samples(train_, fit);
    const Dataset check_ds = select_samples(train_, check);
    return *knn_classify(fit_ds, check_ds, std::min<int>(knn_k_, static_cast<int>(fit.size()))).accuracy;
  }

 private:
  const Dataset& train_;
  SelectionRequest req_;
  std::uint64_t seed_;
  int knn_k_;
};

/// Grid search running the ADMM solver and scoring with ValidationProtocol.
inline GridSearchResult grid_search(const Dataset& train, const SelectionRequest& req, const GridSpec& grid,
                                    const RegularizationParams& base, const SolverConfig& cfg,
                                    std::uint64_t seed = 0) {
  return grid_search(
      grid, base, [&](const RegularizationParams& p) { return solve(train.matrix, p, cfg).w; },
      ValidationProtocol(train, req, seed));
}

}  // namespace alfs
