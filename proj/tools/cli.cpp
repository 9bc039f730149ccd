#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "boostrpf/analytical.hpp"
#include "boostrpf/datagen.hpp"
#include "boostrpf/error.hpp"
#include "boostrpf/eval.hpp"
#include "boostrpf/io.hpp"
#include "boostrpf/rng.hpp"
#include "boostrpf/sequential.hpp"

namespace boostrpf::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Failures owned by the CLI itself rather than a library module.
class CliError : public std::runtime_error {
 public:
  CliError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

constexpr int kManifestVersion = 1;

enum SeedTag : std::uint64_t { kGridSeed = 1, kScenarioSeed, kSplitSeed, kGbtSeed, kBenchSeed };

std::uint64_t derive_seed(std::uint64_t seed, SeedTag tag, std::uint64_t index = 0) {
  return Rng(seed, tag, index).next();
}

std::string indexed(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, k, ext);
  return buf;
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> keys,
                    std::string_view where) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::SchemaError, std::string(where) + " config must be a JSON object");
  }
  for (const auto& item : doc.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw Error(ErrorCode::SchemaError,
                  "unknown " + std::string(where) + " config key '" + item.key() + "'");
    }
  }
}

template <class T>
T take(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("config key '") + key + "': " + e.what());
  }
}

json section(const json& doc, const char* key) {
  const json sub = doc.value(key, json::object());
  if (!sub.is_object()) {
    throw Error(ErrorCode::SchemaError, std::string("config key '") + key + "' must be an object");
  }
  return sub;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::BadConfig, message);
}

json solver_json(const SolverOptions& s) { return {{"tol", s.tol}, {"max_iter", s.max_iter}}; }

SolverOptions solver_from(const json& doc) {
  reject_unknown(doc, {"tol", "max_iter"}, "solver");
  SolverOptions s;
  s.tol = take(doc, "tol", s.tol);
  s.max_iter = take(doc, "max_iter", s.max_iter);
  s.validate();
  return s;
}

json without_seed(json doc) {
  doc.erase("seed");
  return doc;
}

// Sizes come from grid_sizes, so the per-grid n_buses would only mislead.
json grid_template(const GridGenConfig& c) {
  json doc = without_seed(to_json(c));
  doc.erase("n_buses");
  return doc;
}

// ---- run bookkeeping

struct Input {
  std::string path;
  std::string sha256;
};

struct Output {
  std::string file;
  std::string content;
  bool deterministic = true;
};

struct RunResult {
  std::vector<Input> inputs;
  std::vector<Output> outputs;
  json derived_seeds = json::object();
  json summary = json::object();
};

std::string read_input(const std::string& path, RunResult& r) {
  std::string text = read_text_file(path);
  r.inputs.push_back({path, sha256_hex(text)});
  return text;
}

json parse_doc(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

std::string pretty(const json& doc) { return doc.dump(2) + "\n"; }

std::vector<GridDataset> load_data_dir(const std::string& dir, RunResult& r) {
  std::vector<GridDataset> sets;
  for (std::size_t k = 0;; ++k) {
    const fs::path grid_path = fs::path(dir) / indexed("grid", k, ".json");
    if (!fs::exists(grid_path)) break;
    RadialGrid grid = grid_from_json(parse_doc(read_input(grid_path.string(), r), grid_path.string()));
    const fs::path data_path = fs::path(dir) / indexed("dataset", k, ".jsonl");
    std::istringstream is(read_input(data_path.string(), r));
    auto samples = read_dataset(is, &grid);
    sets.push_back({std::move(grid), std::move(samples)});
  }
  if (sets.empty()) throw Error(ErrorCode::IoError, "no grid_000.json under '" + dir + "'");
  return sets;
}

TrainedPredictor load_predictor(const std::string& path, RunResult& r) {
  return predictor_from_json(parse_doc(read_input(path, r), path));
}

// ---- solution methods shared by eval, solve and bench

enum class Method { Ldf, DistFlow, Ac, Model };

VoltageState solve_with(Method m, const RadialGrid& g, const Orientation& o, const Scenario& s,
                        const SolverOptions& solver, const TrainedPredictor* predictor) {
  switch (m) {
    case Method::Ldf:
      return lindistflow_solve(g, o, s);
    case Method::DistFlow:
      return distflow_solve(g, o, s, solver).state;
    case Method::Ac:
      return ac_oracle_solve(g, o, s, solver);
    case Method::Model:
      return infer(g, o, s, *predictor);
  }
  throw Error(ErrorCode::BadConfig, "unknown method");
}

Method solver_method(const std::string& name) {
  if (name == "ldf") return Method::Ldf;
  if (name == "distflow") return Method::DistFlow;
  if (name == "ac") return Method::Ac;
  if (name == "xgb") return Method::Model;
  throw Error(ErrorCode::BadConfig, "unknown method '" + name + "' (expected ldf, distflow, ac or xgb)");
}

// ---- generate

struct GenerateConfig {
  std::uint64_t seed = 0;
  std::vector<int> grid_sizes{116};
  int n_samples = 1800;
  GridGenConfig grid;
  ScenarioGenConfig scenario;
  SolverOptions solver;
  int retry_budget = 5;
  double mismatch_tol = 1e-8;
  unsigned threads = 1;
};

GenerateConfig parse_generate(const json& doc) {
  reject_unknown(doc, {"seed", "grid_sizes", "n_samples", "grid", "scenario", "solver",
                       "retry_budget", "mismatch_tol", "threads"},
                 "generate");
  GenerateConfig c;
  c.seed = take(doc, "seed", c.seed);
  c.grid_sizes = take(doc, "grid_sizes", c.grid_sizes);
  c.n_samples = take(doc, "n_samples", c.n_samples);
  c.grid = grid_gen_config_from_json(section(doc, "grid"));
  c.scenario = scenario_gen_config_from_json(section(doc, "scenario"));
  c.solver = solver_from(section(doc, "solver"));
  c.retry_budget = take(doc, "retry_budget", c.retry_budget);
  c.mismatch_tol = take(doc, "mismatch_tol", c.mismatch_tol);
  c.threads = take(doc, "threads", c.threads);
  require(!c.grid_sizes.empty(), "grid_sizes is empty");
  for (int n : c.grid_sizes) require(n >= 2, "every grid needs at least 2 buses");
  require(c.n_samples >= 1, "n_samples must be positive");
  require(c.retry_budget >= 0, "retry_budget must be non-negative");
  require(c.mismatch_tol > 0.0, "mismatch_tol must be positive");
  require(c.threads >= 1, "threads must be positive");
  c.scenario.validate();
  return c;
}

json dump_generate(const GenerateConfig& c) {
  return {{"seed", c.seed},
          {"grid_sizes", c.grid_sizes},
          {"n_samples", c.n_samples},
          {"grid", grid_template(c.grid)},
          {"scenario", without_seed(to_json(c.scenario))},
          {"solver", solver_json(c.solver)},
          {"retry_budget", c.retry_budget},
          {"mismatch_tol", c.mismatch_tol},
          {"threads", c.threads}};
}

RunResult run_generate(const GenerateConfig& c) {
  RunResult r;
  DatasetOptions opts;
  opts.solver = c.solver;
  opts.retry_budget = c.retry_budget;
  opts.mismatch_tol = c.mismatch_tol;
  opts.threads = c.threads;
  for (std::size_t k = 0; k < c.grid_sizes.size(); ++k) {
    GridGenConfig gc = c.grid;
    gc.n_buses = c.grid_sizes[k];
    gc.seed = derive_seed(c.seed, kGridSeed, k);
    ScenarioGenConfig sc = c.scenario;
    sc.seed = derive_seed(c.seed, kScenarioSeed, k);
    const RadialGrid grid = gen_grid(gc);
    const auto samples = build_dataset(grid, sc, c.n_samples, opts);
    std::ostringstream os;
    write_dataset(os, samples);
    r.outputs.push_back({indexed("grid", k, ".json"), pretty(to_json(grid))});
    r.outputs.push_back({indexed("dataset", k, ".jsonl"), os.str()});
    r.derived_seeds[indexed("grid", k, "")] = {{"grid", gc.seed}, {"scenario", sc.seed}};
  }
  r.summary = {{"grid_sizes", c.grid_sizes}, {"samples_per_grid", c.n_samples}};
  return r;
}

// ---- train

struct TrainConfig {
  std::uint64_t seed = 0;
  std::string data;
  Variant variant = Variant::ParentResidual;
  SplitMode split_mode = SplitMode::Scenarios;
  std::array<double, 3> split{4.0, 1.0, 1.0};
  int test_grid = -1;  // -1 selects the last grid
  GbtParams gbt;
  unsigned threads = 1;
};

Variant variant_from(const std::string& name) {
  const auto v = parse_variant(name);
  if (!v) throw Error(ErrorCode::BadConfig, "unknown variant '" + name + "'");
  return *v;
}

SplitMode split_mode_from(const std::string& name) {
  if (name == "scenarios") return SplitMode::Scenarios;
  if (name == "grids") return SplitMode::Grids;
  throw Error(ErrorCode::BadConfig, "unknown split mode '" + name + "'");
}

std::array<double, 3> split_from(const json& doc) {
  if (!doc.contains("split")) return {4.0, 1.0, 1.0};
  const json& v = doc.at("split");
  std::vector<double> parts;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string piece;
    while (std::getline(ss, piece, ':')) {
      try {
        std::size_t used = 0;
        parts.push_back(std::stod(piece, &used));
        if (used != piece.size()) throw std::invalid_argument(piece);
      } catch (const std::exception&) {
        throw Error(ErrorCode::SchemaError, "split '" + v.get<std::string>() + "' is not of the form a:b:c");
      }
    }
  } else {
    parts = take(doc, "split", parts);
  }
  if (parts.size() != 3) throw Error(ErrorCode::SchemaError, "split needs three ratios");
  return {parts[0], parts[1], parts[2]};
}

TrainConfig parse_train(const json& doc) {
  reject_unknown(doc, {"seed", "data", "variant", "split_mode", "split", "test_grid", "gbt", "threads"},
                 "train");
  TrainConfig c;
  c.seed = take(doc, "seed", c.seed);
  c.data = take(doc, "data", c.data);
  c.variant = variant_from(take<std::string>(doc, "variant", "parent"));
  c.split_mode = split_mode_from(take<std::string>(doc, "split_mode", "scenarios"));
  c.split = split_from(doc);
  c.test_grid = take(doc, "test_grid", c.test_grid);
  c.gbt = gbt_params_from_json(section(doc, "gbt"));
  c.threads = take(doc, "threads", c.threads);
  require(!c.data.empty(), "train needs a data directory");
  require(c.test_grid >= -1, "test_grid must be a grid index or -1");
  require(c.threads >= 1, "threads must be positive");
  c.gbt.validate();
  return c;
}

json dump_train(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"data", c.data},
          {"variant", to_string(c.variant)},
          {"split_mode", to_string(c.split_mode)},
          {"split", c.split},
          {"test_grid", c.test_grid},
          {"gbt", without_seed(to_json(c.gbt))},
          {"threads", c.threads}};
}

GridDataset subset(const GridDataset& ds, const std::vector<std::size_t>& indices) {
  GridDataset out{ds.grid, {}};
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) out.samples.push_back(ds.samples[i]);
  return out;
}

json split_json(const std::vector<GridSplit>& split, SplitMode mode, std::size_t test_grid) {
  json grids = json::array();
  for (const GridSplit& s : split) grids.push_back({{"train", s.train}, {"val", s.val}, {"test", s.test}});
  json doc{{"mode", to_string(mode)}, {"grids", std::move(grids)}};
  if (mode == SplitMode::Grids) doc["test_grid"] = test_grid;
  return doc;
}

RunResult run_train(const TrainConfig& c) {
  RunResult r;
  const auto sets = load_data_dir(c.data, r);
  std::vector<std::size_t> counts;
  for (const auto& ds : sets) counts.push_back(ds.samples.size());
  const std::size_t test_grid = c.test_grid < 0 ? sets.size() - 1 : static_cast<std::size_t>(c.test_grid);
  const std::uint64_t split_seed = derive_seed(c.seed, kSplitSeed);
  const auto split = make_split(counts, c.split_mode, c.split, test_grid, split_seed);

  std::vector<GridDataset> train_sets, val_sets;
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (!split[k].train.empty()) train_sets.push_back(subset(sets[k], split[k].train));
    if (!split[k].val.empty()) val_sets.push_back(subset(sets[k], split[k].val));
    n_train += split[k].train.size();
    n_val += split[k].val.size();
    n_test += split[k].test.size();
  }

  GbtParams params = c.gbt;
  params.seed = derive_seed(c.seed, kGbtSeed);
  std::ostringstream log;
  log.precision(17);
  log << "round,train_rmse_vm,train_rmse_va,valid_rmse_vm,valid_rmse_va\n";
  TrainOptions opts;
  opts.validation = val_sets;
  opts.threads = c.threads;
  opts.on_round = [&log](const RoundStats& s) {
    log << s.round << ',' << s.train_rmse[0] << ',' << s.train_rmse[1] << ',';
    if (s.valid_rmse.size() == 2) {
      log << s.valid_rmse[0] << ',' << s.valid_rmse[1];
    } else {
      log << ',';
    }
    log << '\n';
  };
  const TrainedPredictor predictor = train(train_sets, c.variant, params, opts);

  r.outputs.push_back({"predictor.json", pretty(to_json(predictor))});
  r.outputs.push_back({"train_log.csv", log.str()});
  r.outputs.push_back({"split.json", split_json(split, c.split_mode, test_grid).dump() + "\n"});
  r.derived_seeds = {{"split", split_seed}, {"gbt", params.seed}};
  r.summary = {{"variant", to_string(c.variant)},
               {"train_samples", n_train},
               {"val_samples", n_val},
               {"test_samples", n_test},
               {"rounds", predictor.model().params.n_estimators}};
  return r;
}

// ---- eval

struct EvalConfig {
  std::uint64_t seed = 0;
  std::string data;
  std::string method = "lindistflow";
  std::string predictor;
  std::string split;
  std::string subset = "test";
  bool include_slack = false;
  SolverOptions solver;
};

// Variant behind an "xgb-*" method name, if it is one.
std::optional<Variant> model_variant(const std::string& method) {
  if (method.rfind("xgb-", 0) != 0) return std::nullopt;
  return parse_variant(method.substr(4));
}

EvalConfig parse_eval(const json& doc) {
  reject_unknown(doc, {"seed", "data", "method", "predictor", "split", "subset", "include_slack",
                       "solver"},
                 "eval");
  EvalConfig c;
  c.seed = take(doc, "seed", c.seed);
  c.data = take(doc, "data", c.data);
  c.method = take(doc, "method", c.method);
  c.predictor = take(doc, "predictor", c.predictor);
  c.split = take(doc, "split", c.split);
  c.subset = take(doc, "subset", c.subset);
  c.include_slack = take(doc, "include_slack", c.include_slack);
  c.solver = solver_from(section(doc, "solver"));
  require(!c.data.empty(), "eval needs a data directory");
  const bool model = model_variant(c.method).has_value();
  require(model || c.method == "lindistflow" || c.method == "distflow",
          "unknown method '" + c.method +
              "' (expected xgb-absolute, xgb-parent, xgb-ldf, lindistflow or distflow)");
  require(!model || !c.predictor.empty(), "method " + c.method + " needs a predictor file");
  require(c.subset == "train" || c.subset == "val" || c.subset == "test" || c.subset == "all",
          "subset must be train, val, test or all");
  return c;
}

json dump_eval(const EvalConfig& c) {
  return {{"seed", c.seed},       {"data", c.data},         {"method", c.method},
          {"predictor", c.predictor}, {"split", c.split},   {"subset", c.subset},
          {"include_slack", c.include_slack}, {"solver", solver_json(c.solver)}};
}

std::vector<std::vector<std::size_t>> selected_samples(const EvalConfig& c,
                                                       const std::vector<GridDataset>& sets,
                                                       RunResult& r) {
  std::vector<std::vector<std::size_t>> chosen(sets.size());
  if (c.split.empty() || c.subset == "all") {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      chosen[k].resize(sets[k].samples.size());
      std::iota(chosen[k].begin(), chosen[k].end(), std::size_t{0});
    }
    if (!c.split.empty()) (void)read_input(c.split, r);
    return chosen;
  }
  const json doc = parse_doc(read_input(c.split, r), c.split);
  try {
    const json& grids = doc.at("grids");
    if (grids.size() != sets.size()) {
      throw Error(ErrorCode::DimensionMismatch, "split file covers " + std::to_string(grids.size()) +
                                                    " grids but the data has " +
                                                    std::to_string(sets.size()));
    }
    for (std::size_t k = 0; k < sets.size(); ++k) {
      chosen[k] = grids[k].at(c.subset).get<std::vector<std::size_t>>();
      for (std::size_t i : chosen[k]) {
        if (i >= sets[k].samples.size()) {
          throw Error(ErrorCode::SchemaError, "split index " + std::to_string(i) + " is out of range");
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, c.split + ": " + e.what());
  }
  return chosen;
}

RunResult run_eval(const EvalConfig& c) {
  RunResult r;
  const auto sets = load_data_dir(c.data, r);
  const auto variant = model_variant(c.method);
  std::optional<TrainedPredictor> predictor;
  if (variant) {
    predictor.emplace(load_predictor(c.predictor, r));
    require(predictor->variant() == *variant,
            "predictor was trained for variant '" + std::string(to_string(predictor->variant())) +
                "' but the method is " + c.method);
  }
  const Method method = variant ? Method::Model
                        : c.method == "distflow" ? Method::DistFlow
                                                 : Method::Ldf;
  const auto chosen = selected_samples(c, sets, r);

  std::vector<EvalReport> reports;
  json per_grid = json::array();
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (chosen[k].empty()) continue;
    const RadialGrid& g = sets[k].grid;
    const Orientation o = orient(g);
    std::vector<VoltageState> preds, truths;
    for (std::size_t i : chosen[k]) {
      const LabeledSample& s = sets[k].samples[i];
      preds.push_back(solve_with(method, g, o, s.scenario, c.solver, predictor ? &*predictor : nullptr));
      truths.push_back(s.truth);
    }
    EvalReport report = evaluate(g, o, preds, truths, {c.include_slack});
    report.method = c.method;
    json doc = to_json(report);
    doc["grid"] = k;
    per_grid.push_back(std::move(doc));
    reports.push_back(std::move(report));
  }
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "the selected subset has no samples");

  const EvalReport merged = merge_reports(reports);
  json doc = to_json(merged);
  doc["grids"] = std::move(per_grid);
  r.outputs.push_back({"report.json", pretty(doc)});
  r.outputs.push_back({"per_hop.csv", per_hop_csv(merged.per_hop)});
  r.summary = {{"method", c.method},
               {"rmse_vm", merged.rmse_vm},
               {"rmse_va", merged.rmse_va},
               {"n_samples", merged.n_samples}};
  return r;
}

// ---- solve

struct SolveConfig {
  std::uint64_t seed = 0;
  std::string grid;
  std::string scenario;
  std::string dataset;
  std::size_t index = 0;
  std::string method = "ac";
  std::string predictor;
  SolverOptions solver;
};

SolveConfig parse_solve(const json& doc) {
  reject_unknown(doc, {"seed", "grid", "scenario", "dataset", "index", "method", "predictor", "solver"},
                 "solve");
  SolveConfig c;
  c.seed = take(doc, "seed", c.seed);
  c.grid = take(doc, "grid", c.grid);
  c.scenario = take(doc, "scenario", c.scenario);
  c.dataset = take(doc, "dataset", c.dataset);
  c.index = take(doc, "index", c.index);
  c.method = take(doc, "method", c.method);
  c.predictor = take(doc, "predictor", c.predictor);
  c.solver = solver_from(section(doc, "solver"));
  require(!c.grid.empty(), "solve needs a grid file");
  require(c.scenario.empty() != c.dataset.empty(), "solve needs exactly one of scenario or dataset");
  const Method m = solver_method(c.method);
  require(m != Method::Model || !c.predictor.empty(), "method xgb needs a predictor file");
  return c;
}

json dump_solve(const SolveConfig& c) {
  return {{"seed", c.seed},           {"grid", c.grid},     {"scenario", c.scenario},
          {"dataset", c.dataset},     {"index", c.index},   {"method", c.method},
          {"predictor", c.predictor}, {"solver", solver_json(c.solver)}};
}

RunResult run_solve(const SolveConfig& c) {
  RunResult r;
  const RadialGrid g = grid_from_json(parse_doc(read_input(c.grid, r), c.grid));
  Scenario scenario;
  std::optional<VoltageState> truth;
  if (!c.scenario.empty()) {
    scenario = scenario_from_json(parse_doc(read_input(c.scenario, r), c.scenario));
  } else {
    std::istringstream is(read_input(c.dataset, r));
    const auto samples = read_dataset(is, &g);
    require(c.index < samples.size(), "index " + std::to_string(c.index) + " is past the end of " +
                                          c.dataset);
    scenario = samples[c.index].scenario;
    truth = samples[c.index].truth;
  }
  check_scenario(g, scenario);
  const Method m = solver_method(c.method);
  std::optional<TrainedPredictor> predictor;
  if (m == Method::Model) predictor.emplace(load_predictor(c.predictor, r));
  const VoltageState state = solve_with(m, g, orient(g), scenario, c.solver,
                                        predictor ? &*predictor : nullptr);
  r.outputs.push_back({"state.json", pretty(to_json(state))});
  r.summary = {{"method", c.method},
               {"n_buses", g.size()},
               {"min_vm", *std::min_element(state.vm.begin(), state.vm.end())}};
  if (truth) {
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(state.vm[i] - truth->vm[i]));
    r.summary["max_abs_vm_error"] = worst;
  }
  return r;
}

// ---- bench

struct BenchConfig {
  std::uint64_t seed = 0;
  std::string method = "xgb";
  std::string predictor;
  std::vector<int> grid_sizes = ScalingOptions{}.grid_sizes;
  int scenarios_per_size = 5;
  int repetitions = 10;
  int warmups = 3;
  GridGenConfig grid;
  ScenarioGenConfig scenario;
  SolverOptions solver;
};

BenchConfig parse_bench(const json& doc) {
  reject_unknown(doc, {"seed", "method", "predictor", "grid_sizes", "scenarios_per_size", "repetitions",
                       "warmups", "grid", "scenario", "solver"},
                 "bench");
  BenchConfig c;
  c.seed = take(doc, "seed", c.seed);
  c.method = take(doc, "method", c.method);
  c.predictor = take(doc, "predictor", c.predictor);
  c.grid_sizes = take(doc, "grid_sizes", c.grid_sizes);
  c.scenarios_per_size = take(doc, "scenarios_per_size", c.scenarios_per_size);
  c.repetitions = take(doc, "repetitions", c.repetitions);
  c.warmups = take(doc, "warmups", c.warmups);
  c.grid = grid_gen_config_from_json(section(doc, "grid"));
  c.scenario = scenario_gen_config_from_json(section(doc, "scenario"));
  c.solver = solver_from(section(doc, "solver"));
  const Method m = solver_method(c.method);
  require(m != Method::Model || !c.predictor.empty(), "method xgb needs a predictor file");
  return c;
}

json dump_bench(const BenchConfig& c) {
  return {{"seed", c.seed},
          {"method", c.method},
          {"predictor", c.predictor},
          {"grid_sizes", c.grid_sizes},
          {"scenarios_per_size", c.scenarios_per_size},
          {"repetitions", c.repetitions},
          {"warmups", c.warmups},
          {"grid", grid_template(c.grid)},
          {"scenario", without_seed(to_json(c.scenario))},
          {"solver", solver_json(c.solver)}};
}

RunResult run_bench(const BenchConfig& c) {
  RunResult r;
  const Method m = solver_method(c.method);
  // Deserialised up front so the timed window holds inference only.
  std::optional<TrainedPredictor> predictor;
  if (m == Method::Model) predictor.emplace(load_predictor(c.predictor, r));

  ScalingOptions opts;
  opts.grid_sizes = c.grid_sizes;
  opts.scenarios_per_size = c.scenarios_per_size;
  opts.repetitions = c.repetitions;
  opts.warmups = c.warmups;
  opts.grid_config = c.grid;
  opts.scenario_config = c.scenario;
  opts.seed = derive_seed(c.seed, kBenchSeed);
  const TrainedPredictor* model = predictor ? &*predictor : nullptr;
  const SolverOptions solver = c.solver;
  const ScalingReport report = scaling_study(
      [m, model, solver](const RadialGrid& g, const Scenario& s) {
        return solve_with(m, g, orient(g), s, solver, model);
      },
      opts);

  r.outputs.push_back({"scaling.json", pretty(to_json(report)), false});
  r.outputs.push_back({"scaling.csv", scaling_csv(report), false});
  r.derived_seeds = {{"bench", opts.seed}};
  r.summary = {{"method", c.method},
               {"slope_ms_per_bus", report.linear_fit.slope},
               {"r2", report.linear_fit.r2}};
  return r;
}

// ---- command table, manifests and replay

struct CommandSpec {
  std::function<json(const json&)> normalise;
  std::function<RunResult(const json&)> execute;
};

template <class Config>
CommandSpec make_command(Config (*parse)(const json&), json (*dump)(const Config&),
                 RunResult (*exec)(const Config&)) {
  return {[=](const json& doc) { return dump(parse(doc)); },
          [=](const json& doc) { return exec(parse(doc)); }};
}

const std::map<std::string, CommandSpec>& command_table() {
  static const std::map<std::string, CommandSpec> table{
      {"generate", make_command(&parse_generate, &dump_generate, &run_generate)},
      {"train", make_command(&parse_train, &dump_train, &run_train)},
      {"eval", make_command(&parse_eval, &dump_eval, &run_eval)},
      {"solve", make_command(&parse_solve, &dump_solve, &run_solve)},
      {"bench", make_command(&parse_bench, &dump_bench, &run_bench)},
  };
  return table;
}

json make_manifest(const std::string& command, const json& config, const RunResult& r) {
  json inputs = json::array();
  for (const Input& in : r.inputs) inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  json outputs = json::array();
  for (const Output& out : r.outputs) {
    outputs.push_back({{"file", out.file},
                       {"sha256", sha256_hex(out.content)},
                       {"deterministic", out.deterministic}});
  }
  return {{"format_version", kManifestVersion},
          {"command", command},
          {"seed", config.at("seed")},
          {"config", config},
          {"derived_seeds", r.derived_seeds},
          {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)}};
}

void check_replay(const json& recorded, const json& fresh) {
  if (recorded.at("inputs") != fresh.at("inputs")) {
    throw CliError("ReplayMismatch", "inputs differ from the ones recorded in the manifest");
  }
  const json& before = recorded.at("outputs");
  const json& after = fresh.at("outputs");
  if (before.size() != after.size()) throw CliError("ReplayMismatch", "the run produced a different file set");
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].at("file") != after[i].at("file")) {
      throw CliError("ReplayMismatch", "the run produced a different file set");
    }
    if (before[i].at("deterministic").get<bool>() && before[i].at("sha256") != after[i].at("sha256")) {
      throw CliError("ReplayMismatch", before[i].at("file").get<std::string>() + " differs from the recorded run");
    }
  }
}

json execute(const std::string& command, const json& config, const fs::path& out_dir,
             const json* recorded) {
  const CommandSpec& cmd = command_table().at(command);
  const json effective = cmd.normalise(config);
  const RunResult r = cmd.execute(effective);
  const json manifest = make_manifest(command, effective, r);
  if (recorded) check_replay(*recorded, manifest);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
  for (const Output& out : r.outputs) write_text_file(out_dir / out.file, out.content);
  write_json_file(out_dir / "manifest.json", manifest);

  json summary{{"command", command}, {"out", out_dir.string()}};
  summary.update(r.summary);
  return summary;
}

json replay(const std::string& manifest_path, const fs::path& out_dir) {
  const json recorded = read_json_file(manifest_path);
  try {
    if (recorded.at("format_version").get<int>() != kManifestVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported manifest version");
    }
    const std::string command = recorded.at("command").get<std::string>();
    if (!command_table().count(command)) {
      throw Error(ErrorCode::SchemaError, "manifest names unknown command '" + command + "'");
    }
    json summary = execute(command, recorded.at("config"), out_dir, &recorded);
    summary["replayed"] = manifest_path;
    return summary;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, manifest_path + ": " + e.what());
  }
}

// ---- command line

void emit_error(std::ostream& err, const std::string& code, const std::string& message,
                json extra = json::object()) {
  json record{{"code", code}, {"message", message}};
  record.update(extra);
  err << json{{"error", std::move(record)}}.dump() << '\n';
}

// Flag values are applied over the config file as JSON-pointer patches.
struct Patch {
  std::vector<std::pair<json::json_pointer, json>> entries;

  template <class T>
  CLI::Option* bind(CLI::App* app, const std::string& flag, const std::string& pointer,
                    const std::string& help) {
    return app->add_option_function<T>(
        flag, [this, pointer](const T& v) { entries.emplace_back(json::json_pointer(pointer), json(v)); },
        help);
  }
};

}  // namespace

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::Scenarios ? "scenarios" : "grids";
}

std::vector<GridSplit> make_split(const std::vector<std::size_t>& sample_counts, SplitMode mode,
                                  const std::array<double, 3>& ratios, std::size_t test_grid,
                                  std::uint64_t seed) {
  for (double w : ratios) require(std::isfinite(w) && w >= 0.0, "split ratios must be non-negative");
  require(ratios[0] > 0.0, "the train ratio must be positive");
  const double total = ratios[0] + ratios[1] + ratios[2];
  require(!sample_counts.empty(), "there are no grids to split");
  if (mode == SplitMode::Grids) {
    require(sample_counts.size() >= 2, "splitting by grid needs at least two grids");
    require(test_grid < sample_counts.size(), "test_grid " + std::to_string(test_grid) + " does not exist");
  }

  std::vector<GridSplit> out(sample_counts.size());
  for (std::size_t k = 0; k < sample_counts.size(); ++k) {
    const std::size_t n = sample_counts[k];
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (mode == SplitMode::Grids && k == test_grid) {
      out[k].test = std::move(idx);
      continue;
    }
    Rng rng(seed, k);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);

    const double nd = static_cast<double>(n);
    std::size_t n_val = 0, n_test = 0;
    if (mode == SplitMode::Grids) {
      n_val = static_cast<std::size_t>(std::llround(nd * ratios[1] / (ratios[0] + ratios[1])));
    } else {
      n_val = static_cast<std::size_t>(std::llround(nd * ratios[1] / total));
      n_test = static_cast<std::size_t>(std::llround(nd * ratios[2] / total));
    }
    require(n == 0 || n_val + n_test < n,
            "grid " + std::to_string(k) + " has too few samples for a non-empty training split");
    const auto first_val = idx.begin() + static_cast<std::ptrdiff_t>(n_test);
    const auto first_train = first_val + static_cast<std::ptrdiff_t>(n_val);
    out[k].test.assign(idx.begin(), first_val);
    out[k].val.assign(first_val, first_train);
    out[k].train.assign(first_train, idx.end());
    std::sort(out[k].train.begin(), out[k].train.end());
    std::sort(out[k].val.begin(), out[k].val.end());
    std::sort(out[k].test.begin(), out[k].test.end());
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-based voltage prediction for radial distribution grids", "boostrpf"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::string manifest_path;
  Patch patch;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its keys");
    patch.bind<std::uint64_t>(sub, "--seed", "/seed", "Root seed for all randomness");
    sub->add_option("--out", out_dir, "Output directory")->required();
  };

  auto* gen = app.add_subcommand("generate", "Generate random grids and oracle-labelled datasets");
  common(gen);
  patch.bind<int>(gen, "--n-samples", "/n_samples", "Scenarios per grid");
  patch.bind<std::vector<int>>(gen, "--grid-sizes", "/grid_sizes", "Bus counts, one grid each")
      ->delimiter(',');
  gen->add_option_function<int>(
      "--n-buses", [&patch](const int& n) { patch.entries.emplace_back(json::json_pointer("/grid_sizes"), json::array({n})); },
      "Single grid with this many buses");
  patch.bind<unsigned>(gen, "--threads", "/threads", "Labelling threads");
  patch.bind<int>(gen, "--retry-budget", "/retry_budget", "Redraws per sample on non-convergence");

  auto* trn = app.add_subcommand("train", "Train a path-based predictor");
  common(trn);
  patch.bind<std::string>(trn, "--data", "/data", "Directory written by generate");
  patch.bind<std::string>(trn, "--variant", "/variant", "absolute, parent or ldf");
  patch.bind<std::string>(trn, "--split-mode", "/split_mode", "scenarios or grids");
  patch.bind<std::string>(trn, "--split", "/split", "train:val:test ratios, e.g. 4:1:1");
  patch.bind<int>(trn, "--test-grid", "/test_grid", "Held-out grid index in grids mode (-1: last)");
  patch.bind<int>(trn, "--n-estimators", "/gbt/n_estimators", "Boosting rounds");
  patch.bind<int>(trn, "--max-depth", "/gbt/max_depth", "Tree depth");
  patch.bind<double>(trn, "--learning-rate", "/gbt/learning_rate", "Shrinkage");
  patch.bind<unsigned>(trn, "--threads", "/threads", "Split-search threads");

  auto* evl = app.add_subcommand("eval", "Score a method against the oracle labels");
  common(evl);
  patch.bind<std::string>(evl, "--data", "/data", "Directory written by generate");
  patch.bind<std::string>(evl, "--method", "/method",
                          "xgb-absolute, xgb-parent, xgb-ldf, lindistflow or distflow");
  patch.bind<std::string>(evl, "--predictor", "/predictor", "predictor.json for xgb-* methods");
  patch.bind<std::string>(evl, "--split", "/split", "split.json written by train");
  patch.bind<std::string>(evl, "--subset", "/subset", "train, val, test or all (with --split)");
  evl->add_flag_callback(
      "--include-slack", [&patch] { patch.entries.emplace_back(json::json_pointer("/include_slack"), true); },
      "Score the slack bus too");

  auto* slv = app.add_subcommand("solve", "Solve one scenario");
  common(slv);
  patch.bind<std::string>(slv, "--grid", "/grid", "Grid file");
  patch.bind<std::string>(slv, "--scenario", "/scenario", "Scenario file");
  patch.bind<std::string>(slv, "--dataset", "/dataset", "Dataset file to take the scenario from");
  patch.bind<std::size_t>(slv, "--index", "/index", "Sample index within --dataset");
  patch.bind<std::string>(slv, "--method", "/method", "ldf, distflow, ac or xgb");
  patch.bind<std::string>(slv, "--predictor", "/predictor", "predictor.json for xgb");

  auto* bch = app.add_subcommand("bench", "Time inference against grid size");
  common(bch);
  patch.bind<std::string>(bch, "--method", "/method", "ldf, distflow, ac or xgb");
  patch.bind<std::string>(bch, "--predictor", "/predictor", "predictor.json for xgb");
  patch.bind<std::vector<int>>(bch, "--grid-sizes", "/grid_sizes", "Bus counts to time")->delimiter(',');
  patch.bind<int>(bch, "--scenarios", "/scenarios_per_size", "Scenarios per size");
  patch.bind<int>(bch, "--repetitions", "/repetitions", "Timed calls per scenario");
  patch.bind<int>(bch, "--warmups", "/warmups", "Untimed calls per scenario");

  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest and verify its outputs");
  rep->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rep->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> store{"boostrpf"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, "Usage", e.what());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    json summary;
    if (command == "replay") {
      summary = replay(manifest_path, out_dir);
    } else {
      json config = config_path.empty() ? json::object() : read_json_file(config_path);
      if (!config.is_object()) throw Error(ErrorCode::SchemaError, config_path + " is not a JSON object");
      for (const auto& [pointer, value] : patch.entries) config[pointer] = value;
      summary = execute(command, config, out_dir, nullptr);
    }
    out << summary.dump() << '\n';
    return 0;
  } catch (const NonConvergenceError& e) {
    emit_error(err, std::string(to_string(e.code())), e.what(),
               {{"command", command}, {"iterations", e.iterations()}, {"residual", e.residual()}});
  } catch (const Error& e) {
    emit_error(err, std::string(to_string(e.code())), e.what(), {{"command", command}});
  } catch (const CliError& e) {
    emit_error(err, e.code(), e.what(), {{"command", command}});
  } catch (const std::exception& e) {
    emit_error(err, "Internal", e.what(), {{"command", command}});
    return 3;
  }
  return 1;
}

}  // namespace boostrpf::cli
