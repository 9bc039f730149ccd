#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "boostrpf/datagen.hpp"
#include "boostrpf/grid.hpp"
#include "boostrpf/paths.hpp"

namespace boostrpf {

struct RmsePair {
  double vm = 0.0;  // p.u.
  double va = 0.0;  // degrees
};

struct RmseOptions {
  /// Slack values are inputs, so by default they are kept out of the pool.
  bool include_slack = false;
};

/// RMSE pooled over every (sample, bus) pair. All states must belong to
/// `grid`. Throws Error{DimensionMismatch | EmptyInput}.
RmsePair rmse(const RadialGrid& grid, std::span<const VoltageState> predictions,
              std::span<const VoltageState> truths, const RmseOptions& options = {});

struct HopError {
  int depth = 0;
  double rmse_vm = 0.0;
  double rmse_va = 0.0;
  std::size_t count = 0;
};

/// One row per depth 1..max_depth (depth 0 joins only with include_slack).
std::vector<HopError> per_hop_profile(const RadialGrid& grid, const Orientation& orientation,
                                      std::span<const VoltageState> predictions,
                                      std::span<const VoltageState> truths,
                                      const RmseOptions& options = {});

/// Count-weighted recombination of a per-hop table into pooled RMSE.
RmsePair pooled_from_hops(std::span<const HopError> hops);

struct EvalReport {
  std::string method;
  double rmse_vm = 0.0;
  double rmse_va = 0.0;
  std::vector<HopError> per_hop;
  std::size_t n_samples = 0;
  std::size_t n_buses = 0;
};

EvalReport evaluate(const RadialGrid& grid, const Orientation& orientation,
                    std::span<const VoltageState> predictions,
                    std::span<const VoltageState> truths, const RmseOptions& options = {});

/// Pools reports from several grids: per-hop buckets are merged by depth
/// and the totals recombined with their counts. n_buses is the sum over
/// the inputs. Throws Error{EmptyInput}.
EvalReport merge_reports(std::span<const EvalReport> reports);

nlohmann::json to_json(const EvalReport& report);
std::string per_hop_csv(std::span<const HopError> hops);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ScalingPoint {
  int n_buses = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  LinearFit linear_fit;
};

/// Anything timed by the scaling study: full inference for one scenario.
using InferenceFn = std::function<VoltageState(const RadialGrid&, const Scenario&)>;

struct ScalingOptions {
  std::vector<int> grid_sizes{15, 44, 59, 97, 111, 116, 129};
  int scenarios_per_size = 5;
  int repetitions = 10;
  int warmups = 3;
  /// n_buses and seed are overridden per size.
  GridGenConfig grid_config;
  ScenarioGenConfig scenario_config;
  std::uint64_t seed = 0;
  /// Called right around every timed call; tests use them to check that
  /// nothing but inference happens inside the window.
  std::function<void()> on_measure_begin;
  std::function<void()> on_measure_end;

  void validate() const;
};

/// Wall-clock timing of `infer` on freshly generated grids. Each scenario
/// contributes the median of its repetitions; points report the mean and
/// standard deviation of those medians. Runs on the calling thread only.
/// Throws Error{BadConfig}.
ScalingReport scaling_study(const InferenceFn& infer, const ScalingOptions& options);

/// True when the fitted slope moves the prediction by no more than
/// `fraction` of the mean time across the measured size range.
bool slope_negligible(const ScalingReport& report, double fraction = 0.1);

nlohmann::json to_json(const ScalingReport& report);
std::string scaling_csv(const ScalingReport& report);

}  // namespace boostrpf
