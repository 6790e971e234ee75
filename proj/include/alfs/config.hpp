#pragma once

// JSON run configuration and result documents for the command-line tool.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "alfs/admm.hpp"
#include "alfs/bench.hpp"
#include "alfs/dataset.hpp"
#include "alfs/error.hpp"
#include "alfs/selection.hpp"

namespace alfs {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

struct DataConfig {
  std::string path;
  bool has_header = true;
  std::optional<std::string> label_column;
  Orientation orientation = Orientation::kRowsAreSamples;
  bool standardize = false;

  CsvOptions csv_options() const { return {has_header, label_column, orientation}; }
};

struct BenchConfig {
  std::vector<std::string> methods{"alfs", "random"};
  IndexList sample_budgets;
  IndexList feature_budgets;
  int repeats = 10;
  std::uint64_t seed = 0;
  int knn_k = 1;
  std::optional<Index> n_train;  // default: half the samples
  Index rcur_rank = 0;
};

struct RunConfig {
  DataConfig data;
  RegularizationParams params;
  SolverConfig solver;
  std::optional<Index> m;  // default: min(10, n)
  std::optional<Index> r;  // default: min(10, d)
  BenchConfig bench;

  SelectionRequest request_for(Index d, Index n) const {
    return {m.value_or(std::min<Index>(10, n)), r.value_or(std::min<Index>(10, d))};
  }
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ValidationError("config: unknown key '" + where + "." + key + "'");
}

template <typename T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    const Json& v = obj.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ValidationError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ValidationError("");
      if constexpr (std::is_unsigned_v<T>)
        if (v.get<long long>() < 0) throw ValidationError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ValidationError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ValidationError("");
    }
    out = v.get<T>();
  } catch (const std::exception&) {
    throw ValidationError("config: '" + where + "." + key + "' has the wrong type");
  }
}

inline IndexList read_index_list(const Json& obj, const char* key, const std::string& where) {
  IndexList out;
  if (!obj.contains(key)) return out;
  const Json& v = obj.at(key);
  if (!v.is_array()) throw ValidationError("config: '" + where + "." + key + "' must be an array of integers");
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ValidationError("config: '" + where + "." + key + "' must be an array of integers");
    out.push_back(e.get<Index>());
  }
  return out;
}

inline const char* orientation_name(Orientation o) {
  return o == Orientation::kRowsAreSamples ? "rows-are-samples" : "rows-are-features";
}

}  // namespace detail

inline void validate_run_config(const RunConfig& cfg);

/// Parses and validates a run configuration. Every section and key is
/// optional; unknown keys are errors.
inline RunConfig parse_run_config(const Json& doc) {
  using detail::read;
  detail::reject_unknown(doc, {"data", "params", "solver", "selection", "bench"}, "config");
  RunConfig cfg;
  if (doc.contains("data")) {
    const Json& d = doc["data"];
    detail::reject_unknown(d, {"path", "has_header", "label_column", "orientation", "standardize"}, "data");
    read(d, "path", cfg.data.path, "data");
    read(d, "has_header", cfg.data.has_header, "data");
    read(d, "standardize", cfg.data.standardize, "data");
    if (d.contains("label_column") && !d["label_column"].is_null()) {
      std::string label;
      read(d, "label_column", label, "data");
      cfg.data.label_column = label;
    }
    if (d.contains("orientation")) {
      std::string o;
      read(d, "orientation", o, "data");
      if (o == "rows-are-samples")
        cfg.data.orientation = Orientation::kRowsAreSamples;
      else if (o == "rows-are-features")
        cfg.data.orientation = Orientation::kRowsAreFeatures;
      else
        throw ValidationError("config: data.orientation must be rows-are-samples or rows-are-features");
    }
  }
  if (doc.contains("params")) {
    const Json& p = doc["params"];
    detail::reject_unknown(p, {"alpha", "beta", "gamma", "eta", "varsigma", "smoothing_eps"}, "params");
    read(p, "alpha", cfg.params.alpha, "params");
    read(p, "beta", cfg.params.beta, "params");
    read(p, "gamma", cfg.params.gamma, "params");
    read(p, "eta", cfg.params.eta, "params");
    read(p, "varsigma", cfg.params.varsigma, "params");
    read(p, "smoothing_eps", cfg.params.smoothing_eps, "params");
  }
  if (doc.contains("solver")) {
    const Json& s = doc["solver"];
    detail::reject_unknown(s, {"rho1_init", "rho2_init", "rho_max", "tau", "epsilon", "max_outer_iters", "adaptive_rho",
                               "seed", "inner"},
                           "solver");
    read(s, "rho1_init", cfg.solver.rho1_init, "solver");
    read(s, "rho2_init", cfg.solver.rho2_init, "solver");
    read(s, "rho_max", cfg.solver.rho_max, "solver");
    read(s, "tau", cfg.solver.tau, "solver");
    read(s, "epsilon", cfg.solver.epsilon, "solver");
    read(s, "max_outer_iters", cfg.solver.max_outer_iters, "solver");
    read(s, "adaptive_rho", cfg.solver.adaptive_rho, "solver");
    read(s, "seed", cfg.solver.seed, "solver");
    if (s.contains("inner")) {
      const Json& i = s["inner"];
      detail::reject_unknown(
          i, {"history_size", "c1", "c2", "max_iters", "grad_tol", "initial_scaling", "max_line_search"}, "solver.inner");
      auto& in = cfg.solver.inner;
      read(i, "history_size", in.history_size, "solver.inner");
      read(i, "c1", in.c1, "solver.inner");
      read(i, "c2", in.c2, "solver.inner");
      read(i, "max_iters", in.max_iters, "solver.inner");
      read(i, "grad_tol", in.grad_tol, "solver.inner");
      read(i, "initial_scaling", in.initial_scaling, "solver.inner");
      read(i, "max_line_search", in.max_line_search, "solver.inner");
    }
  }
  if (doc.contains("selection")) {
    const Json& s = doc["selection"];
    detail::reject_unknown(s, {"m", "r"}, "selection");
    if (s.contains("m") && !s["m"].is_null()) {
      Index m = 0;
      read(s, "m", m, "selection");
      cfg.m = m;
    }
    if (s.contains("r") && !s["r"].is_null()) {
      Index r = 0;
      read(s, "r", r, "selection");
      cfg.r = r;
    }
  }
  if (doc.contains("bench")) {
    const Json& b = doc["bench"];
    detail::reject_unknown(b, {"methods", "sample_budgets", "feature_budgets", "repeats", "seed", "knn_k", "n_train",
                               "rcur_rank"},
                           "bench");
    if (b.contains("methods")) {
      if (!b["methods"].is_array()) throw ValidationError("config: 'bench.methods' must be an array of strings");
      cfg.bench.methods.clear();
      for (const auto& m : b["methods"]) {
        if (!m.is_string()) throw ValidationError("config: 'bench.methods' must be an array of strings");
        cfg.bench.methods.push_back(m.get<std::string>());
      }
    }
    cfg.bench.sample_budgets = detail::read_index_list(b, "sample_budgets", "bench");
    cfg.bench.feature_budgets = detail::read_index_list(b, "feature_budgets", "bench");
    read(b, "repeats", cfg.bench.repeats, "bench");
    read(b, "seed", cfg.bench.seed, "bench");
    read(b, "knn_k", cfg.bench.knn_k, "bench");
    read(b, "rcur_rank", cfg.bench.rcur_rank, "bench");
    if (b.contains("n_train") && !b["n_train"].is_null()) {
      Index n = 0;
      read(b, "n_train", n, "bench");
      cfg.bench.n_train = n;
    }
  }
  validate_run_config(cfg);
  return cfg;
}

/// Type-level checks that do not need the data.
inline void validate_run_config(const RunConfig& cfg) {
  check_params(cfg.params);
  check_config(cfg.solver);
  if (cfg.m) detail::require(*cfg.m >= 1, "config: selection.m must be >= 1");
  if (cfg.r) detail::require(*cfg.r >= 1, "config: selection.r must be >= 1");
  detail::require(cfg.bench.repeats >= 1, "config: bench.repeats must be >= 1");
  detail::require(cfg.bench.knn_k >= 1, "config: bench.knn_k must be >= 1");
  detail::require(cfg.bench.rcur_rank >= 0, "config: bench.rcur_rank must be >= 0");
  for (const auto& m : cfg.bench.methods) parse_method(m);
  for (Index b : cfg.bench.sample_budgets) detail::require(b >= 1, "config: bench.sample_budgets must be positive");
  for (Index b : cfg.bench.feature_budgets) detail::require(b >= 1, "config: bench.feature_budgets must be positive");
  if (cfg.bench.n_train) detail::require(*cfg.bench.n_train >= 1, "config: bench.n_train must be >= 1");
}

inline RunConfig parse_run_config_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

/// The effective configuration with every default spelled out.
inline Json to_json(const RunConfig& cfg) {
  Json doc;
  doc["data"] = {{"path", cfg.data.path},
                 {"has_header", cfg.data.has_header},
                 {"label_column", cfg.data.label_column ? Json(*cfg.data.label_column) : Json(nullptr)},
                 {"orientation", detail::orientation_name(cfg.data.orientation)},
                 {"standardize", cfg.data.standardize}};
  doc["params"] = {{"alpha", cfg.params.alpha},       {"beta", cfg.params.beta},
                   {"gamma", cfg.params.gamma},       {"eta", cfg.params.eta},
                   {"varsigma", cfg.params.varsigma}, {"smoothing_eps", cfg.params.smoothing_eps}};
  const auto& in = cfg.solver.inner;
  doc["solver"] = {{"rho1_init", cfg.solver.rho1_init},
                   {"rho2_init", cfg.solver.rho2_init},
                   {"rho_max", cfg.solver.rho_max},
                   {"tau", cfg.solver.tau},
                   {"epsilon", cfg.solver.epsilon},
                   {"max_outer_iters", cfg.solver.max_outer_iters},
                   {"adaptive_rho", cfg.solver.adaptive_rho},
                   {"seed", cfg.solver.seed},
                   {"inner",
                    {{"history_size", in.history_size},
                     {"c1", in.c1},
                     {"c2", in.c2},
                     {"max_iters", in.max_iters},
                     {"grad_tol", in.grad_tol},
                     {"initial_scaling", in.initial_scaling},
                     {"max_line_search", in.max_line_search}}}};
  doc["selection"] = {{"m", cfg.m ? Json(*cfg.m) : Json(nullptr)}, {"r", cfg.r ? Json(*cfg.r) : Json(nullptr)}};
  doc["bench"] = {{"methods", cfg.bench.methods},
                  {"sample_budgets", cfg.bench.sample_budgets},
                  {"feature_budgets", cfg.bench.feature_budgets},
                  {"repeats", cfg.bench.repeats},
                  {"seed", cfg.bench.seed},
                  {"knn_k", cfg.bench.knn_k},
                  {"n_train", cfg.bench.n_train ? Json(*cfg.bench.n_train) : Json(nullptr)},
                  {"rcur_rank", cfg.bench.rcur_rank}};
  return doc;
}

/// Loads the dataset a configuration points at.
inline Dataset load_configured_data(const DataConfig& data) {
  detail::require(!data.path.empty(), "no data file given (--data or data.path)");
  Dataset ds = load_csv(data.path, data.csv_options());
  return data.standardize ? standardize_features(ds) : ds;
}

// ---------------------------------------------------------------------------
// Result documents

inline Json ranking_scores(const std::vector<RankedIndex>& ranking) {
  Json arr = Json::array();
  for (const auto& r : ranking) arr.push_back({{"index", r.index}, {"score", r.score}});
  return arr;
}

/// Solve output: selections, traces and the echoed configuration.
/// `wall_time_seconds` is null unless a timing was supplied.
inline Json result_document(const RunConfig& effective, const SolveResult& solved, const SelectionResult& sel,
                            std::optional<double> wall_time_seconds) {
  Json doc;
  doc["selected_samples"] = sel.selected_samples;
  doc["selected_features"] = sel.selected_features;
  doc["sample_scores"] = ranking_scores(sel.sample_ranking);
  doc["feature_scores"] = ranking_scores(sel.feature_ranking);
  doc["low_score_warning"] = sel.low_score_warning;
  Json objective = Json::array(), res_z = Json::array(), res_w = Json::array(), h = Json::array();
  for (const auto& it : solved.report.iterations) {
    objective.push_back(it.objective);
    res_z.push_back(it.residual_z);
    res_w.push_back(it.residual_w);
    h.push_back(it.h_seminorm_sq);
  }
  doc["objective_trace"] = std::move(objective);
  doc["residual_traces"] = {{"wx_minus_z_inf", std::move(res_z)}, {"w_minus_w_tilde_inf", std::move(res_w)}};
  doc["h_seminorm_trace"] = std::move(h);
  doc["stop_reason"] = to_string(solved.report.stop_reason);
  doc["outer_iterations"] = solved.report.iterations.size();
  doc["inner_failures"] = solved.report.inner_failures;
  doc["wall_time_seconds"] = wall_time_seconds ? Json(*wall_time_seconds) : Json(nullptr);
  doc["config_echo"] = to_json(effective);
  doc["tool_version"] = kToolVersion;
  return doc;
}

}  // namespace alfs
