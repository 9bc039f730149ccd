// Acceptance gate: one PASS/FAIL line per criterion.
//
//   boostrpf_acceptance [--work DIR] [AC1 ... AC10]
//
// With no names every criterion runs in order. The exit code is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <boostrpf/analytical.hpp>
#include <boostrpf/datagen.hpp>
#include <boostrpf/error.hpp>
#include <boostrpf/eval.hpp>
#include <boostrpf/gbt.hpp>
#include <boostrpf/io.hpp>
#include <boostrpf/paths.hpp>
#include <boostrpf/rng.hpp>
#include <boostrpf/sequential.hpp>

#include "cli.hpp"

using namespace boostrpf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  if (cli::run(args, out, err) != 0) throw std::runtime_error("boostrpf " + args.front() + ": " + err.str());
  return json::parse(out.str());
}

// Random feeder with N in [10, 130] and one moderately loaded scenario.
struct Case {
  RadialGrid grid;
  Scenario scenario;
};

Case random_case(std::uint64_t seed) {
  Rng rng(seed, 0xacce);
  GridGenConfig gc;
  gc.n_buses = 10 + static_cast<int>(rng.below(121));
  gc.seed = seed;
  RadialGrid g = gen_grid(gc);
  ScenarioGenConfig sc;
  sc.seed = seed;
  Scenario s = gen_scenario(g, sc, 0);
  return {std::move(g), std::move(s)};
}

Scenario scaled(Scenario s, double factor) {
  for (std::size_t i = 0; i < s.p_inj.size(); ++i) {
    s.p_inj[i] *= factor;
    s.q_inj[i] *= factor;
  }
  return s;
}

// ---- AC1: AC oracle validity

// Mismatch from an explicit complex admittance sum, independent of the
// library's own residual routine.
double complex_mismatch(const RadialGrid& g, const Scenario& s, const VoltageState& v) {
  using cplx = std::complex<double>;
  const std::size_t n = g.size();
  std::vector<cplx> volt(n), current(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) volt[i] = std::polar(v.vm[i], v.va_deg[i] * std::numbers::pi / 180.0);
  for (const Branch& br : g.branches()) {
    const cplx y = 1.0 / cplx(br.r, br.x);
    const auto a = static_cast<std::size_t>(br.from), b = static_cast<std::size_t>(br.to);
    const cplx i_ab = y * (volt[a] - volt[b]);
    current[a] += i_ab;
    current[b] -= i_ab;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<BusId>(i) == g.slack()) continue;
    const cplx s_calc = volt[i] * std::conj(current[i]);
    worst = std::max({worst, std::abs(s.p_inj[i] - s_calc.real()), std::abs(s.q_inj[i] - s_calc.imag())});
  }
  return worst;
}

Outcome ac1(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int min_n = 1000, max_n = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const Case c = random_case(1000 + k);
    const VoltageState v = ac_oracle_solve(c.grid, orient(c.grid), c.scenario);
    worst = std::max(worst, complex_mismatch(c.grid, c.scenario, v));
    min_n = std::min(min_n, static_cast<int>(c.grid.size()));
    max_n = std::max(max_n, static_cast<int>(c.grid.size()));
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-8 && elapsed < 30.0,
          fmt("100 grids, N in [%.0f, %.0f]: max |dP|,|dQ| = %.3e (< 1e-8), %.2f s (< 30 s)", min_n, max_n,
              worst, elapsed)};
}

// ---- AC2: linearisation consistency

Outcome ac2(Context&) {
  const BusVoltage step = lindistflow_step({1.0, 0.0, 0.01, 0.01, 0.1, 0.05, 1.0});
  const double va_expect = -0.0005 * 180.0 / std::numbers::pi;
  double step_err = std::max(std::abs(step.vm - 0.9985), std::abs(step.va_deg - va_expect));

  GridData d;
  d.buses = {{0, BusKind::Slack, std::nullopt}, {1, BusKind::PQ, std::nullopt}};
  d.branches = {{0, 1, 0.01, 0.01}};
  const RadialGrid two = validate_grid(d);
  Scenario s{{0.0, -0.1}, {0.0, -0.05}, 1.0, 0.0};
  const VoltageState sweep = lindistflow_solve(two, orient(two), s);
  step_err = std::max({step_err, std::abs(sweep.vm[1] - 0.9985), std::abs(sweep.va_deg[1] - va_expect)});

  double worst_ratio = 1e300;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Case c = random_case(2000 + k);
    const Orientation o = orient(c.grid);
    auto gap = [&](const Scenario& sc) {
      const VoltageState exact = ac_oracle_solve(c.grid, o, sc);
      const VoltageState lin = lindistflow_solve(c.grid, o, sc);
      double m = 0.0;
      for (std::size_t i = 0; i < c.grid.size(); ++i) m = std::max(m, std::abs(exact.vm[i] - lin.vm[i]));
      return m;
    };
    worst_ratio = std::min(worst_ratio, gap(c.scenario) / gap(scaled(c.scenario, 0.5)));
  }
  return {step_err <= 1e-12 && worst_ratio > 2.0,
          fmt("2-bus step error %.1e (<= 1e-12); halving injections shrinks the LDF gap by >= %.2fx (> 2) on 20 "
              "grids",
              step_err, worst_ratio)};
}

// ---- AC3: DistFlow fixed point

// Branch-flow relations re-evaluated from the returned flows and voltages.
double distflow_relations(const RadialGrid& g, const Orientation& o, const Scenario& s,
                          const DistFlowSolution& sol) {
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const BusId i = o.parent[j];
    if (i == kNoParent) continue;
    const Branch& br = g.branches()[o.parent_branch[j]];
    double p = -s.p_inj[j], q = -s.q_inj[j];
    for (BusId k : o.children[j]) {
      const auto kk = static_cast<std::size_t>(k);
      const Branch& bk = g.branches()[o.parent_branch[kk]];
      const double loss = (sol.p_flow[kk] * sol.p_flow[kk] + sol.q_flow[kk] * sol.q_flow[kk]) / sol.v_sq[j];
      p += sol.p_flow[kk] + bk.r * loss;
      q += sol.q_flow[kk] + bk.x * loss;
    }
    const double vi = sol.v_sq[static_cast<std::size_t>(i)];
    const double pj = sol.p_flow[j], qj = sol.q_flow[j];
    const double v = vi - 2.0 * (br.r * pj + br.x * qj) + (br.r * br.r + br.x * br.x) * (pj * pj + qj * qj) / vi;
    worst = std::max({worst, std::abs(p - pj), std::abs(q - qj), std::abs(v - sol.v_sq[j])});
  }
  return worst;
}

Outcome ac3(Context&) {
  const SolverOptions opts;
  double residual = 0.0, light_gap = 0.0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const Case c = random_case(3000 + k);
    const Orientation o = orient(c.grid);
    residual = std::max(residual, distflow_relations(c.grid, o, c.scenario, distflow_solve(c.grid, o, c.scenario, opts)));
    // Light loading: the largest per-bus |S| is 1e-4 p.u.
    double peak = 0.0;
    for (std::size_t i = 0; i < c.grid.size(); ++i) peak = std::max(peak, std::hypot(c.scenario.p_inj[i], c.scenario.q_inj[i]));
    const Scenario light = scaled(c.scenario, 1e-4 / peak);
    const VoltageState df = distflow_solve(c.grid, o, light, opts).state;
    const VoltageState ldf = lindistflow_solve(c.grid, o, light);
    for (std::size_t i = 0; i < c.grid.size(); ++i) light_gap = std::max(light_gap, std::abs(df.vm[i] - ldf.vm[i]));
  }
  return {residual < opts.tol && light_gap < 1e-6,
          fmt("50 grids: relation residual %.2e (< tol %.0e); light load (max |S| = 1e-4 p.u.) |V_DF - V_LDF| %.2e (< 1e-6)", residual,
              opts.tol, light_gap)};
}

// ---- AC4: GBT correctness

// Best single split by exhaustive enumeration; returns the fitted values
// (base + leaf) for every row. Ties keep the earlier candidate, using the
// same relative rounding allowance as the library.
std::vector<std::vector<double>> stump_oracle(const Matrix& x, const Matrix& y, double lambda, double mcw) {
  const std::size_t n = x.rows(), k = y.cols();
  std::vector<double> base(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < k; ++o) base[o] += y(r, o) / static_cast<double>(n);
  }
  auto grad_sum = [&](const std::vector<std::size_t>& rows) {
    std::vector<double> g(k, 0.0);
    for (std::size_t r : rows) {
      for (std::size_t o = 0; o < k; ++o) g[o] += base[o] - y(r, o);
    }
    return g;
  };
  auto score = [&](const std::vector<double>& g, double h) {
    double s = 0.0;
    for (double v : g) s += v * v / (h + lambda);
    return s;
  };
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const double parent = score(grad_sum(all), static_cast<double>(n));
  double best = 0.0;
  int best_f = -1;
  double best_thr = 0.0;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < n; ++r) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
      const double thr = 0.5 * (vals[t] + vals[t + 1]);
      std::vector<std::size_t> l, r;
      for (std::size_t i = 0; i < n; ++i) (x(i, f) < thr ? l : r).push_back(i);
      if (static_cast<double>(l.size()) < mcw || static_cast<double>(r.size()) < mcw) continue;
      const double gain = 0.5 * (score(grad_sum(l), static_cast<double>(l.size())) +
                                 score(grad_sum(r), static_cast<double>(r.size())) - parent);
      if (gain > best + 1e-11 * (parent + best)) {
        best = gain;
        best_f = static_cast<int>(f);
        best_thr = thr;
      }
    }
  }
  std::vector<std::size_t> l, r;
  for (std::size_t i = 0; i < n; ++i) {
    (best_f >= 0 && !(x(i, static_cast<std::size_t>(best_f)) < best_thr) ? r : l).push_back(i);
  }
  std::vector<std::vector<double>> fitted(n, base);
  for (const auto* side : {&l, &r}) {
    if (side->empty()) continue;
    const auto g = grad_sum(*side);
    for (std::size_t i : *side) {
      for (std::size_t o = 0; o < k; ++o) fitted[i][o] += -g[o] / (static_cast<double>(side->size()) + lambda);
    }
  }
  return fitted;
}

Outcome ac4(Context&) {
  Rng rng(4);
  int datasets = 0;
  double oracle_gap = 0.0;
  for (std::size_t rows = 2; rows <= 64; ++rows) {
    for (int rep = 0; rep < 5; ++rep) {
      const std::size_t feats = 1 + rng.below(4), outs = 1 + rng.below(2);
      const bool discrete = rep % 2 == 1;
      Matrix x(rows, feats), y(rows, outs);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t f = 0; f < feats; ++f) {
          x(r, f) = discrete ? static_cast<double>(rng.below(4)) : rng.uniform(-1, 1);
        }
        for (std::size_t o = 0; o < outs; ++o) y(r, o) = rng.uniform(-2, 2) + x(r, 0) * (o + 1.0);
      }
      GbtParams p;
      p.n_estimators = 1;
      p.max_depth = 1;
      p.learning_rate = 1.0;
      p.subsample = 1.0;
      p.min_child_weight = 1.0;
      p.reg_lambda = rep % 3 == 0 ? 0.0 : 1.0;
      const GbtModel m = fit(x, y, p);
      const auto expect = stump_oracle(x, y, p.reg_lambda, p.min_child_weight);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto got = m.predict(x.row(r));
        for (std::size_t o = 0; o < outs; ++o) oracle_gap = std::max(oracle_gap, std::abs(got[o] - expect[r][o]));
      }
      ++datasets;
    }
  }

  Matrix x(400, 5), y(400, 2);
  for (std::size_t r = 0; r < 400; ++r) {
    for (std::size_t f = 0; f < 5; ++f) x(r, f) = rng.uniform(-1, 1);
    y(r, 0) = std::sin(3 * x(r, 0)) + x(r, 1) * x(r, 2) + 0.1 * rng.uniform(-1, 1);
    y(r, 1) = std::abs(x(r, 3)) - x(r, 4) + 0.1 * rng.uniform(-1, 1);
  }
  GbtParams full;
  full.subsample = 1.0;
  full.colsample_bytree = 1.0;
  full.seed = 11;
  std::vector<double> trace;
  FitOptions fo;
  fo.on_round = [&](const RoundStats& s) { trace.push_back(std::hypot(s.train_rmse[0], s.train_rmse[1])); };
  const GbtModel model = fit(x, y, full, fo);
  int increases = 0;
  for (std::size_t t = 1; t < trace.size(); ++t) increases += trace[t] > trace[t - 1];

  const GbtModel back = gbt_model_from_json(json::parse(to_json(model).dump()));
  bool bit_exact = back == model;
  for (std::size_t r = 0; r < x.rows() && bit_exact; ++r) bit_exact = back.predict(x.row(r)) == model.predict(x.row(r));

  GbtParams sampled = full;
  sampled.subsample = 0.7;
  sampled.colsample_bytree = 0.6;
  const bool deterministic = fit(x, y, sampled) == fit(x, y, sampled);

  const bool pass = oracle_gap <= 1e-12 && trace.size() == 200 && increases == 0 && bit_exact && deterministic;
  return {pass, fmt("stump oracle on %.0f sets (2..64 rows): max gap %.1e; %.0f RMSE increases over %.0f rounds",
                    datasets, oracle_gap, increases, static_cast<double>(trace.size())) +
                    "; round trip " + (bit_exact ? "bit-exact" : "DIFFERS") + "; fixed seed " +
                    (deterministic ? "deterministic" : "NOT deterministic")};
}

// ---- AC5: variant algebra

class ZeroModel : public EdgeRegressor {
 public:
  BusVoltage predict(const FeatureVector&) const override { return {0.0, 0.0}; }
};

Outcome ac5(Context&) {
  Rng rng(5);
  double algebra = 0.0;
  for (Variant v : {Variant::Absolute, Variant::ParentResidual, Variant::PhysicsResidual}) {
    for (int i = 0; i < 100000; ++i) {
      const BusVoltage truth{rng.uniform(0.85, 1.1), rng.uniform(-10, 10)};
      const BusVoltage parent{rng.uniform(0.85, 1.1), rng.uniform(-10, 10)};
      const BusVoltage ldf{rng.uniform(0.85, 1.1), rng.uniform(-10, 10)};
      const BusVoltage back = reconstruct(v, make_target(v, truth, parent, ldf), parent, ldf);
      algebra = std::max({algebra, std::abs(back.vm - truth.vm), std::abs(back.va_deg - truth.va_deg)});
    }
  }
  const ZeroModel zero;
  double zero_gap = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const Case c = random_case(5000 + k);
    const Orientation o = orient(c.grid);
    const VoltageState got = infer(c.grid, o, c.scenario, Variant::PhysicsResidual, zero);
    const VoltageState ldf = lindistflow_solve(c.grid, o, c.scenario);
    for (std::size_t i = 0; i < c.grid.size(); ++i) zero_gap = std::max(zero_gap, std::abs(got.vm[i] - ldf.vm[i]));
  }
  return {algebra <= 1e-12 && zero_gap <= 1e-12,
          fmt("3 x 1e5 random states: max round-trip error %.1e; zero-model physics vs LDF %.1e (both <= 1e-12)",
              algebra, zero_gap)};
}

// ---- AC6: sample counts

Outcome ac6(Context&) {
  GridGenConfig gc;
  gc.seed = 6;
  const RadialGrid g = gen_grid(gc);
  ScenarioGenConfig sc;
  sc.seed = 6;
  const auto samples = build_dataset(g, sc, 1200);
  GridDataset big{g, samples};
  GridDataset small{g, {samples.begin(), samples.begin() + 300}};
  const std::size_t rows_big = build_edge_table(std::span(&big, 1), Variant::ParentResidual).features.rows();
  const std::size_t rows_small = build_edge_table(std::span(&small, 1), Variant::ParentResidual).features.rows();
  return {g.size() == 116 && rows_big == 138000 && rows_small == 34500,
          fmt("%.0f-bus grid: 1200 scenarios -> %.0f rows (138000), 300 -> %.0f rows (34500)",
              static_cast<double>(g.size()), static_cast<double>(rows_big), static_cast<double>(rows_small))};
}

// ---- AC7 / AC10: fixed-grid experiment through the CLI

struct FixedGridRun {
  double parent_vm = 0.0;
  double distflow_vm = 0.0;
  json parent_hops;
};

fs::path fixed_grid_dir(const Context& ctx) { return ctx.work / "fixed_grid"; }

FixedGridRun fixed_grid_experiment(const Context& ctx, bool reuse) {
  const fs::path dir = fixed_grid_dir(ctx);
  const fs::path parent_report = dir / "eval_parent" / "report.json";
  const fs::path distflow_report = dir / "eval_distflow" / "report.json";
  if (!reuse || !fs::exists(parent_report) || !fs::exists(distflow_report)) {
    fs::remove_all(dir);
    const std::string d = dir.string();
    run_cli({"generate", "--seed", "1", "--n-buses", "116", "--n-samples", "1800", "--out", d + "/data"});
    // 1500 training and 300 test scenarios; no validation split.
    run_cli({"train", "--seed", "1", "--variant", "parent", "--split", "5:0:1", "--data", d + "/data", "--out",
             d + "/model"});
    run_cli({"eval", "--method", "xgb-parent", "--predictor", d + "/model/predictor.json", "--split",
             d + "/model/split.json", "--data", d + "/data", "--out", d + "/eval_parent"});
    run_cli({"eval", "--method", "distflow", "--split", d + "/model/split.json", "--data", d + "/data", "--out",
             d + "/eval_distflow"});
  }
  const json parent = read_json_file(parent_report);
  const json distflow = read_json_file(distflow_report);
  return {parent.at("rmse_vm").get<double>(), distflow.at("rmse_vm").get<double>(), parent.at("per_hop")};
}

Outcome ac7(Context& ctx) {
  const FixedGridRun r = fixed_grid_experiment(ctx, false);
  return {r.parent_vm < r.distflow_vm && r.parent_vm < 5e-3,
          fmt("116 buses, 1500 train / 300 test: xgb-parent RMSE VM %.3e vs DistFlow %.3e (need parent < DistFlow "
              "and < 5e-3)",
              r.parent_vm, r.distflow_vm)};
}

Outcome ac10(Context& ctx) {
  const FixedGridRun r = fixed_grid_experiment(ctx, true);
  const json& hops = r.parent_hops;
  const double first = hops.front().at("rmse_vm").get<double>();
  const double last = hops.back().at("rmse_vm").get<double>();
  const double drift = last - first;
  return {drift < 5e-3, fmt("xgb-parent per-hop RMSE VM: hop 1 %.3e -> hop %.0f %.3e, drift %.3e (< 5e-3)", first,
                            hops.back().at("depth").get<double>(), last, drift)};
}

// ---- AC8: unseen grid

Outcome ac8(Context& ctx) {
  const fs::path dir = ctx.work / "unseen_grid";
  fs::remove_all(dir);
  const std::string d = dir.string();
  run_cli({"generate", "--seed", "1", "--grid-sizes", "15,44,59,97,111,129", "--n-samples", "300", "--out",
           d + "/data"});
  run_cli({"train", "--seed", "1", "--variant", "parent", "--split-mode", "grids", "--test-grid", "5", "--data",
           d + "/data", "--out", d + "/model"});
  const json parent = run_cli({"eval", "--method", "xgb-parent", "--predictor", d + "/model/predictor.json",
                               "--split", d + "/model/split.json", "--data", d + "/data", "--out", d + "/eval_parent"});
  const json distflow = run_cli({"eval", "--method", "distflow", "--split", d + "/model/split.json", "--data",
                                 d + "/data", "--out", d + "/eval_distflow"});
  const double p = parent.at("rmse_vm"), q = distflow.at("rmse_vm");
  return {p <= 3.0 * q, fmt("train on 15/44/59/97/111 buses, test on 129: xgb-parent RMSE VM %.3e vs DistFlow %.3e "
                            "(ratio %.2f, need <= 3)",
                            p, q, p / q)};
}

// ---- AC9: linear scaling

Outcome ac9(Context&) {
  GridGenConfig gc;
  gc.seed = 9;
  const RadialGrid g = gen_grid(gc);
  ScenarioGenConfig sc;
  sc.seed = 9;
  GridDataset ds{g, build_dataset(g, sc, 60)};
  const TrainedPredictor model = train(std::span(&ds, 1), Variant::ParentResidual, GbtParams{});

  ScalingOptions opts;
  opts.seed = 9;
  const ScalingReport lin = scaling_study(
      [&model](const RadialGrid& grid, const Scenario& s) { return infer(grid, orient(grid), s, model); }, opts);

  const ScalingReport flat = scaling_study(
      [](const RadialGrid& grid, const Scenario&) {
        const auto until = std::chrono::steady_clock::now() + std::chrono::microseconds(500);
        while (std::chrono::steady_clock::now() < until) {
        }
        return VoltageState::flat(grid.size(), 1.0, 0.0);
      },
      opts);
  const bool control_flat = slope_negligible(flat);
  const LinearFit& f = lin.linear_fit;
  return {f.r2 >= 0.9 && f.slope > 0.0 && control_flat,
          fmt("xgb-parent over N = 15..129: slope %.3e ms/bus, r2 %.4f (>= 0.9); constant control slope %.2e ms/bus",
              f.slope, f.r2, flat.linear_fit.slope) +
              (control_flat ? " (negligible)" : " (NOT negligible)")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
  };
  Context ctx{fs::current_path() / "acceptance_work"};
  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      ctx.work = argv[++i];
    } else {
      selected.push_back(a);
    }
  }
  for (const auto& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
      std::cerr << "unknown criterion " << name << "\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << name << (name.size() < 4 ? "  " : " ") << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
              << fmt("%.1f s", seconds_since(t0)) << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
