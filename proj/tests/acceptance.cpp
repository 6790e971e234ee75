// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "alfs/alfs.hpp"
#include "oracles.hpp"

namespace {

using namespace alfs;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    out.pass = false;
    out.detail += " (over time limit " + std::to_string(limit_seconds) + " s)";
  }
  if (!out.pass) ++failures;
  std::printf("%s criterion %d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SolverState random_state(Rng& rng, Index d, Index n) {
  return {gaussian_matrix(rng, n, d), gaussian_matrix(rng, n, n), gaussian_matrix(rng, n, d), gaussian_matrix(rng, n, n),
          gaussian_matrix(rng, n, d), 0.5 + uniform01(rng),     0.5 + uniform01(rng),     0};
}

Outcome gradient_check() {
  Rng rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const MatrixXd x = gaussian_matrix(rng, 6, 9);
    const SolverState s = random_state(rng, 6, 9);
    RegularizationParams p;
    p.alpha = 0.1 + 2.0 * uniform01(rng);
    p.beta = 0.1 + 2.0 * uniform01(rng);
    const MatrixXd analytic = w_subproblem_gradient(x, s, p);
    const auto f = [&](const MatrixXd& w) {
      SolverState probe = s;
      probe.w = w;
      return w_subproblem_objective(x, probe, p);
    };
    worst = std::max(worst, oracle::relative_error(analytic, oracle::numeric_gradient(f, s.w, 1e-5)));
  }
  return {worst < 1e-5, fmt("worst relative error %.3g over 20 instances (limit 1e-5)", worst)};
}

Outcome prox_check() {
  Rng rng(7);
  long violations = 0, checked = 0;
  for (int t = 0; t < 100; ++t) {
    const MatrixXd k = 2.0 * gaussian_matrix(rng, 6, 6);
    const MatrixXd mu = gaussian_matrix(rng, 6, 6).cwiseAbs();
    const MatrixXd l = soft_threshold(k, mu);
    for (Index i = 0; i < k.size(); ++i) {
      ++checked;
      const double res = k(i) - l(i);
      // Subgradient condition: res = mu*sign(l) where l != 0, |res| <= mu where l == 0,
      // up to the rounding of the subtraction itself.
      const double ulp = 4e-16 * std::abs(k(i));
      const bool ok = l(i) == 0.0 ? std::abs(res) <= mu(i) + ulp
                                  : std::abs(std::abs(res) - mu(i)) <= ulp && std::signbit(res) == std::signbit(l(i));
      violations += !ok;
    }
  }
  int beaten = 0;
  for (int m = 0; m < 10; ++m) {
    const MatrixXd k = gaussian_matrix(rng, 6, 5);
    const double mu = 0.2 + uniform01(rng);
    const MatrixXd l = svt(k, mu);
    const auto obj = [&](const MatrixXd& c) { return mu * oracle::eig_nuclear(c) + 0.5 * (c - k).squaredNorm(); };
    const double best = obj(l);
    for (int t = 0; t < 1000; ++t) {
      const double scale = std::pow(10.0, -4.0 + 4.0 * uniform01(rng));
      beaten += obj(l + scale * gaussian_matrix(rng, 6, 5)) + 1e-12 < best;
    }
  }
  return {violations == 0 && beaten == 0,
          fmt("soft-threshold certificate violations %.0f/%.0f; svt beaten by %.0f of 10000 perturbations", violations,
              checked, beaten)};
}

Outcome admm_convergence() {
  Rng rng(42);
  const MatrixXd x = gaussian_matrix(rng, 20, 40);
  const SolveResult res = solve(x, RegularizationParams{}, SolverConfig{});
  const IterationRecord& last = res.report.iterations.back();
  const bool ok = last.residual_z < 1e-3 && last.residual_w < 1e-3 && res.report.iterations.size() <= 1000;
  return {ok, std::string(to_string(res.report.stop_reason)) +
                  fmt(" after %.0f iterations, residuals %.3g / %.3g", static_cast<double>(res.report.iterations.size()),
                      last.residual_z, last.residual_w)};
}

Outcome h_seminorm_diagnostic() {
  Rng rng(4);
  const MatrixXd x = gaussian_matrix(rng, 10, 20);
  SolverConfig cfg;
  cfg.adaptive_rho = false;
  cfg.rho1_init = cfg.rho2_init = 1.0;
  cfg.epsilon = 1e-300;  // run every iteration
  cfg.max_outer_iters = 100;
  cfg.inner.grad_tol = 1e-10;
  cfg.inner.max_iters = 2000;
  const SolveResult res = solve(x, RegularizationParams{}, cfg);
  const auto& it = res.report.iterations;
  int pairs = 0, good = 0;
  double worst = 0.0;
  for (std::size_t k = 1; k < it.size(); ++k) {
    ++pairs;
    const double prev = it[k - 1].h_seminorm_sq, curr = it[k].h_seminorm_sq;
    if (curr <= prev) {
      ++good;
    } else {
      worst = std::max(worst, (curr - prev) / std::max(prev, 1e-300));
    }
  }
  const bool ok = pairs > 0 && good >= 0.9 * pairs && worst <= 0.05;
  return {ok, fmt("%.0f/%.0f consecutive pairs non-increasing, worst relative increase %.3g", good, pairs, worst)};
}

Outcome oracle_equivalence() {
  SolverConfig cfg;
  int good = 0;
  std::string ratios;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(1000 + static_cast<std::uint64_t>(inst));
    const Dataset ds = make_dataset(gaussian_matrix(rng, 5, 6));
    const SelectionRequest req{2, 2};
    const GridSearchResult grid = grid_search(ds, req, GridSpec{}, RegularizationParams{}, cfg);
    const SelectionResult sel = rank_and_select(grid.best_w, req);
    const double err = reconstruction_error(ds.matrix, sel.selected_samples, sel.selected_features);
    const double best = oracle_best_subsets(ds, req).error;
    const bool hit = err <= 1.25 * best + 1e-12;
    good += hit;
    if (!hit) ratios += " " + fmt("#%.0f:%.3g", inst, err / best);
  }
  return {good >= 16, fmt("%.0f/20 instances within 1.25x of the exhaustive optimum (need 16)", good) +
                          (ratios.empty() ? "" : "; misses" + ratios)};
}

Outcome sparsity_monotone() {
  Rng rng(1);
  MatrixXd x(10, 20);
  x.topRows(6) = gaussian_matrix(rng, 6, 3) * gaussian_matrix(rng, 3, 20) * 0.3 + gaussian_matrix(rng, 6, 20) * 0.05;
  x.bottomRows(4) = gaussian_matrix(rng, 4, 20) * 0.05;
  SolverConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.max_outer_iters = 3000;
  const std::vector<double> grid{0.1, 1.0, 10.0, 100.0};
  std::vector<Index> rows, cols;
  for (double a : grid) {
    RegularizationParams p;
    p.smoothing_eps = 1e-16;
    p.alpha = a;
    const MatrixXd w = solve(x, p, cfg).w;
    rows.push_back((w.rowwise().norm().array() > 1e-6).count());
  }
  for (double b : grid) {
    RegularizationParams p;
    p.smoothing_eps = 1e-16;
    p.beta = b;
    const MatrixXd w = solve(x, p, cfg).w;
    cols.push_back((w.colwise().norm().array() > 1e-6).count());
  }
  bool ok = true;
  std::string detail = "nonzero rows along alpha:";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    detail += " " + std::to_string(rows[k]);
    if (k && rows[k] > rows[k - 1]) ok = false;
  }
  detail += "; nonzero columns along beta:";
  for (std::size_t k = 0; k < cols.size(); ++k) {
    detail += " " + std::to_string(cols[k]);
    if (k && cols[k] > cols[k - 1]) ok = false;
  }
  return {ok, detail};
}

/// Three Gaussian clusters in d dimensions, labels by cluster.
Dataset planted_clusters(std::uint64_t seed, Index d, Index n, double noise) {
  Rng rng(seed);
  const MatrixXd centres = gaussian_matrix(rng, d, 3);
  MatrixXd x(d, n);
  std::vector<std::string> labels;
  for (Index j = 0; j < n; ++j) {
    const Index c = static_cast<Index>(uniform_below(rng, 3));
    x.col(j) = centres.col(c) + noise * gaussian_matrix(rng, d, 1);
    labels.push_back("class" + std::to_string(c));
  }
  return make_dataset(x, {}, labels);
}

std::string curve_text(const AccuracyCurve& c) {
  std::string s = c.method + " [";
  for (std::size_t b = 0; b < c.budgets.size(); ++b) s += (b ? " " : "") + fmt("%.4f", c.mean[b]);
  return s + "]";
}

bool dominates(const AccuracyCurve& a, const AccuracyCurve& b) {
  for (std::size_t k = 0; k < a.mean.size(); ++k)
    if (!(a.mean[k] >= b.mean[k])) return false;
  return true;
}

Outcome benchmark_dominance() {
  const Dataset ds = planted_clusters(7, 30, 120, 0.3);
  BenchSpec spec;
  spec.sample_budgets = {5, 10, 20};
  spec.repeats = 10;
  spec.seed = 100;
  spec.method = parse_method("alfs");
  const AccuracyCurve alfs_curve = run_curve_resampled(ds, 80, spec);
  spec.method = parse_method("random");
  const AccuracyCurve random_curve = run_curve_resampled(ds, 80, spec);
  return {dominates(alfs_curve, random_curve) && alfs_curve.failures.empty(),
          "means at budgets 5/10/20: " + curve_text(alfs_curve) + " vs " + curve_text(random_curve)};
}

/// Optional check on a locally supplied Libras Movement CSV (90 features and a
/// trailing class column, with or without a header).
std::optional<Dataset> load_libras() {
  const fs::path path = fs::path(ALFS_DATA_DIR) / "libras.csv";
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  std::stringstream raw;
  raw << in.rdbuf();
  std::string text = raw.str();
  const std::string first = text.substr(0, text.find('\n'));
  const std::size_t fields = static_cast<std::size_t>(std::count(first.begin(), first.end(), ',')) + 1;
  std::string label = "label";
  bool numeric_first = true;
  try {
    std::stod(first.substr(0, first.find(',')));
  } catch (const std::exception&) {
    numeric_first = false;
  }
  if (numeric_first) {
    std::string header;
    for (std::size_t c = 0; c + 1 < fields; ++c) header += "f" + std::to_string(c) + ",";
    text = header + label + "\n" + text;
  } else {
    label = first.substr(first.rfind(',') + 1);
  }
  std::istringstream stream(text);
  return parse_csv(stream, {true, label, Orientation::kRowsAreSamples}, path.string());
}

Outcome libras_dominance(const Dataset& ds) {
  const Split sp = split(ds, {200, 0});
  BenchSpec spec;
  spec.sample_budgets = {10, 20, 40};
  spec.repeats = 10;
  spec.seed = 0;
  spec.method = parse_method("alfs");
  const AccuracyCurve a = run_curve(sp.train, sp.test, spec);
  spec.method = parse_method("random");
  const AccuracyCurve r = run_curve(sp.train, sp.test, spec);
  return {dominates(a, r), "200/160 split: " + curve_text(a) + " vs " + curve_text(r)};
}

Outcome rcur_quality() {
  int good = 0;
  bool bound_ok = true;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(500 + seed);
    const MatrixXd x = gaussian_matrix(rng, 30, 3) * gaussian_matrix(rng, 3, 40) + 0.05 * gaussian_matrix(rng, 30, 40);
    RcurConfig cfg;
    cfg.k = 3;
    cfg.m = 20;
    cfg.r = 20;
    cfg.seed = seed;
    const RcurResult res = rcur(x, cfg);
    const double ratio = res.err / res.svd_err_k;
    worst_ratio = std::max(worst_ratio, ratio);
    good += ratio <= 2.0;
    const auto q = static_cast<Index>(std::min(res.column_indices.size(), res.row_indices.size()));
    bound_ok = bound_ok && res.err >= res.lower_bound && res.lower_bound >= oracle::rank_q_tail(x, q) - 1e-9;
  }
  return {good >= 8 && bound_ok, fmt("%.0f/10 seeds within 2x of the rank-3 SVD error (worst ratio %.3g); lower bound ",
                                     good, worst_ratio) +
                                     (bound_ok ? "respected" : "VIOLATED")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("alfs_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = std::string("'") + ALFS_CLI_PATH + "'";
  const std::string data = ALFS_DATA_DIR;
  const std::string out = (dir / "out").string();
  const std::vector<std::string> commands = {
      "solve --data '" + data + "/tiny.csv' --m 3 --r 2 --out '" + out + "'",
      "select --data '" + data + "/tiny.csv' --method alfs --m 3 --r 2 --seed 5 --out '" + out + "'",
      "select --data '" + data + "/tiny.csv' --method random --m 3 --r 2 --seed 5 --out '" + out + "'",
      "select --data '" + data + "/tiny.csv' --method rcur --m 3 --r 2 --seed 5 --out '" + out + "'",
      "select --data '" + data + "/tiny.csv' --method variance+rcur --m 3 --r 2 --seed 5 --out '" + out + "'",
      "bench --data '" + data + "/labeled.csv' --methods alfs,random,rcur --budgets 3:9:3 --repeats 3 --seed 4 --out '" +
          out + "'",
      "bench --data '" + data + "/labeled.csv' --methods variance+alfs --feature-budgets 1:4:1 --sample-budget 6 "
          "--repeats 2 --out '" + out + "'",
      "oracle --data '" + data + "/tiny.csv' --m 2 --r 2 --out '" + out + "'",
  };
  int identical = 0;
  std::string bad;
  for (const auto& args : commands) {
    std::string outputs[2];
    bool ran = true;
    for (auto& o : outputs) {
      fs::remove(out);
      const std::string cmd = cli + " " + args + " >'" + (dir / "stdout").string() + "' 2>/dev/null";
      const int status = std::system(cmd.c_str());
      ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
      o = slurp(out) + "\x1f" + slurp(dir / "stdout");
    }
    if (ran && outputs[0] == outputs[1] && outputs[0].size() > 1)
      ++identical;
    else
      bad += " [" + args.substr(0, args.find(' ')) + (ran ? " differs" : " failed") + "]";
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(commands.size()),
          fmt("%.0f/%.0f commands byte-identical across reruns", identical, static_cast<double>(commands.size())) + bad};
}

}  // namespace

int main() {
  report(1, "gradient correctness", 10, gradient_check);
  report(2, "prox correctness", 30, prox_check);
  report(3, "ADMM convergence", 120, admm_convergence);
  report(4, "H-seminorm diagnostic", 60, h_seminorm_diagnostic);
  report(5, "oracle near-equivalence", 300, oracle_equivalence);
  report(6, "sparsity monotonicity", 120, sparsity_monotone);
  report(7, "benchmark dominance", 600, benchmark_dominance);
  if (const auto libras = load_libras())
    report(7, "benchmark dominance (Libras, optional)", 600, [&] { return libras_dominance(*libras); });
  else
    std::printf("SKIP criterion 7 extended check: no data/libras.csv\n");
  report(8, "R-CUR quality", 60, rcur_quality);
  report(9, "CLI determinism", 0, cli_determinism);
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
