// alfs: command-line front end.
//
//   alfs solve  --data X.csv [--config run.json] --out result.json
//   alfs select --data X.csv --method rcur --m 10 --r 5 --out picked.json
//   alfs bench  --data X.csv --methods alfs,random --budgets 5:20:5 --out curves.csv
//   alfs oracle --data X.csv --m 2 --r 2
//
// Exit codes: 0 success, 2 usage/validation error, 3 numerical failure.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alfs/alfs.hpp"

namespace {

using namespace alfs;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fails early when --out cannot be created, before any computation runs.
void check_writable(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (fs::is_directory(p)) throw ValidationError("output path is a directory: " + path);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(dir) || ::access(dir.c_str(), W_OK) != 0)
    throw ValidationError("output directory is not writable: " + dir.string());
  if (fs::exists(p) && ::access(p.c_str(), W_OK) != 0) throw ValidationError("output file is not writable: " + path);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  out << content;
  if (!out) throw ValidationError("failed writing " + path);
}

/// "lo:hi:step" or "a,b,c".
IndexList parse_budgets(const std::string& text) {
  IndexList out;
  auto to_index = [&](const std::string& s) -> Index {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<Index>(v);
    } catch (const std::exception&) {
      throw ValidationError("bad budget list '" + text + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ValidationError("budgets must look like lo:hi:step, got '" + text + "'");
    const Index lo = to_index(parts[0]), hi = to_index(parts[1]), step = to_index(parts[2]);
    if (step <= 0 || lo > hi) throw ValidationError("budget range '" + text + "' is empty");
    for (Index b = lo; b <= hi; b += step) out.push_back(b);
    return out;
  }
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(to_index(part));
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');)
    if (!part.empty()) out.push_back(part);
  return out;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

struct CommonFlags {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::string> label_column;
  bool no_header = false;
  bool rows_are_features = false;
  bool standardize = false;

  void add_to(CLI::App* cmd, bool out_required) {
    cmd->add_option("--data", data, "CSV data file");
    cmd->add_option("--config", config, "JSON run configuration");
    auto* o = cmd->add_option("--out", out, "output file");
    if (out_required) o->required();
    cmd->add_option("--label-column", label_column, "header name of the label column");
    cmd->add_flag("--no-header", no_header, "the CSV has no header row");
    cmd->add_flag("--rows-are-features", rows_are_features, "each CSV row is a feature, not a sample");
    cmd->add_flag("--standardize", standardize, "z-score every feature before solving");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : parse_run_config_text(read_file(config));
    if (!data.empty()) cfg.data.path = data;
    if (label_column) cfg.data.label_column = *label_column;
    if (no_header) cfg.data.has_header = false;
    if (rows_are_features) cfg.data.orientation = Orientation::kRowsAreFeatures;
    if (standardize) cfg.data.standardize = true;
    return cfg;
  }
};

// ---------------------------------------------------------------------------

int cmd_solve(const CommonFlags& flags, std::optional<Index> m, std::optional<Index> r, bool timing) {
  RunConfig cfg = flags.resolve();
  if (m) cfg.m = *m;
  if (r) cfg.r = *r;
  validate_run_config(cfg);
  check_writable(flags.out);
  const Dataset ds = load_configured_data(cfg.data);
  const SelectionRequest req = cfg.request_for(ds.dim(), ds.size());
  check_request(req, ds.dim(), ds.size());
  cfg.m = req.m;
  cfg.r = req.r;

  const auto start = std::chrono::steady_clock::now();
  const SolveResult solved = solve(ds, cfg.params, cfg.solver);
  const SelectionResult sel = rank_and_select(solved.w, req);
  std::optional<double> elapsed;
  if (timing) elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_file(flags.out, dump(result_document(cfg, solved, sel, elapsed)));
  std::cerr << "solve: " << to_string(solved.report.stop_reason) << " after " << solved.report.iterations.size()
            << " outer iterations\n";
  if (sel.low_score_warning) std::cerr << "warning: a selected score is below 1e-6; the budget exceeds the sparsity of W\n";
  return kExitOk;
}

int cmd_select(const CommonFlags& flags, const std::string& method_id, std::optional<Index> m, std::optional<Index> r,
               std::uint64_t seed) {
  RunConfig cfg = flags.resolve();
  if (m) cfg.m = *m;
  if (r) cfg.r = *r;
  validate_run_config(cfg);
  const Method method = parse_method(method_id);
  check_writable(flags.out);
  const Dataset ds = load_configured_data(cfg.data);
  const SelectionRequest req = cfg.request_for(ds.dim(), ds.size());
  check_request(req, ds.dim(), ds.size());
  cfg.m = req.m;
  cfg.r = req.r;

  BenchSpec spec;
  spec.method = method;
  spec.params = cfg.params;
  spec.solver = cfg.solver;
  spec.rcur_rank = cfg.bench.rcur_rank;
  Selector selector(ds.matrix, spec);
  const Picked picked = selector.pick(req.m, req.r, seed);

  Json doc;
  doc["method"] = method.label();
  doc["seed"] = seed;
  doc["selected_samples"] = picked.samples;
  doc["selected_features"] = picked.features;
  doc["reconstruction_error"] = reconstruction_error(ds.matrix, picked.samples, picked.features);
  doc["config_echo"] = to_json(cfg);
  doc["tool_version"] = kToolVersion;
  write_file(flags.out, dump(doc));
  return kExitOk;
}

struct BenchFlags {
  std::string methods;
  std::string budgets;
  std::string feature_budgets;
  std::optional<Index> sample_budget;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  std::optional<Index> n_train;
  std::string test_data;
};

int cmd_bench(const CommonFlags& flags, const BenchFlags& bf) {
  RunConfig cfg = flags.resolve();
  if (!cfg.data.label_column) cfg.data.label_column = "label";
  if (!bf.methods.empty()) cfg.bench.methods = split_list(bf.methods);
  if (!bf.budgets.empty()) cfg.bench.sample_budgets = parse_budgets(bf.budgets);
  if (!bf.feature_budgets.empty()) cfg.bench.feature_budgets = parse_budgets(bf.feature_budgets);
  if (bf.sample_budget) cfg.bench.sample_budgets = {*bf.sample_budget};
  if (bf.repeats) cfg.bench.repeats = *bf.repeats;
  if (bf.seed) cfg.bench.seed = *bf.seed;
  if (bf.n_train) cfg.bench.n_train = *bf.n_train;
  validate_run_config(cfg);
  detail::require(!cfg.bench.sample_budgets.empty(), "bench: no sample budgets (--budgets or --sample-budget)");
  check_writable(flags.out);

  Dataset ds = load_configured_data(cfg.data);
  if (!ds.has_labels()) throw ValidationError("bench: the dataset has no labels");

  std::vector<AccuracyCurve> curves;
  for (const std::string& id : cfg.bench.methods) {
    BenchSpec spec;
    spec.method = parse_method(id);
    spec.sample_budgets = cfg.bench.sample_budgets;
    spec.feature_budgets = cfg.bench.feature_budgets;
    spec.repeats = cfg.bench.repeats;
    spec.seed = cfg.bench.seed;
    spec.knn_k = cfg.bench.knn_k;
    spec.params = cfg.params;
    spec.solver = cfg.solver;
    spec.rcur_rank = cfg.bench.rcur_rank;
    if (!bf.test_data.empty()) {
      DataConfig test_cfg = cfg.data;
      test_cfg.path = bf.test_data;
      const Dataset test = load_configured_data(test_cfg);
      curves.push_back(run_curve(ds, test, spec));
    } else {
      const Index n_train = cfg.bench.n_train.value_or(ds.size() / 2);
      curves.push_back(run_curve_resampled(ds, n_train, spec));
    }
    for (const auto& f : curves.back().failures) std::cerr << "bench: " << id << " failed at " << f << "\n";
  }
  std::ostringstream csv;
  write_curves_csv(csv, curves);
  write_file(flags.out, csv.str());
  for (const auto& c : curves) {
    std::cerr << c.method << ":";
    for (std::size_t b = 0; b < c.budgets.size(); ++b) std::cerr << " " << c.budgets[b] << "=" << c.mean[b];
    std::cerr << "\n";
  }
  return kExitOk;
}

std::string join(const IndexList& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
  return s;
}

int cmd_oracle(const CommonFlags& flags, Index m, Index r) {
  RunConfig cfg = flags.resolve();
  cfg.m = m;
  cfg.r = r;
  if (!flags.out.empty()) check_writable(flags.out);
  const Dataset ds = load_configured_data(cfg.data);
  const OracleResult best = oracle_best_subsets(ds, {m, r});
  std::cout << "samples: " << join(best.samples) << "\n"
            << "features: " << join(best.features) << "\n"
            << "error: " << detail::format_double(best.error) << "\n";
  if (!flags.out.empty()) {
    Json doc;
    doc["samples"] = best.samples;
    doc["features"] = best.features;
    doc["error"] = best.error;
    doc["pairs_evaluated"] = best.pairs_evaluated;
    doc["config_echo"] = to_json(cfg);
    doc["tool_version"] = kToolVersion;
    write_file(flags.out, dump(doc));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint active sample and feature selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonFlags solve_flags, select_flags, bench_flags, oracle_flags;
  std::optional<Index> solve_m, solve_r, select_m, select_r;
  bool timing = false;
  auto* solve_cmd = app.add_subcommand("solve", "run the ADMM solver and rank samples/features");
  solve_flags.add_to(solve_cmd, true);
  solve_cmd->add_option("--m", solve_m, "sample budget");
  solve_cmd->add_option("--r", solve_r, "feature budget");
  solve_cmd->add_flag("--timing", timing, "record wall_time_seconds (makes output run-dependent)");

  std::string method = "alfs";
  std::uint64_t select_seed = 0;
  auto* select_cmd = app.add_subcommand("select", "pick samples and features with one method");
  select_flags.add_to(select_cmd, true);
  select_cmd->add_option("--method", method, "alfs, random, rcur or variance+<sampler>");
  select_cmd->add_option("--m", select_m, "sample budget");
  select_cmd->add_option("--r", select_r, "feature budget");
  select_cmd->add_option("--seed", select_seed, "seed for randomized methods");

  BenchFlags bf;
  auto* bench_cmd = app.add_subcommand("bench", "accuracy curves over budgets");
  bench_flags.add_to(bench_cmd, true);
  bench_cmd->add_option("--methods", bf.methods, "comma-separated methods");
  bench_cmd->add_option("--budgets", bf.budgets, "sample budgets lo:hi:step or a,b,c");
  bench_cmd->add_option("--feature-budgets", bf.feature_budgets, "feature budgets lo:hi:step (curve over features)");
  bench_cmd->add_option("--sample-budget", bf.sample_budget, "fixed sample budget for feature curves");
  bench_cmd->add_option("--repeats", bf.repeats, "repeats per budget");
  bench_cmd->add_option("--seed", bf.seed, "base seed; repeat t uses seed + t");
  bench_cmd->add_option("--n-train", bf.n_train, "training split size (default n/2)");
  bench_cmd->add_option("--test-data", bf.test_data, "fixed test CSV instead of random splits");

  Index oracle_m = 0, oracle_r = 0;
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive best sample/feature subsets (tiny data only)");
  oracle_flags.add_to(oracle_cmd, false);
  oracle_cmd->add_option("--m", oracle_m, "sample budget")->required();
  oracle_cmd->add_option("--r", oracle_r, "feature budget")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_flags, solve_m, solve_r, timing);
    if (*select_cmd) return cmd_select(select_flags, method, select_m, select_r, select_seed);
    if (*bench_cmd) return cmd_bench(bench_flags, bf);
    if (*oracle_cmd) return cmd_oracle(oracle_flags, oracle_m, oracle_r);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}
