#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "boostrpf/analytical.hpp"
#include "boostrpf/grid.hpp"

namespace boostrpf {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

/// Random radial feeder: slack is bus 0, children are attached breadth
/// first with a mean of `branching` children per bus.
struct GridGenConfig {
  int n_buses = 116;
  double branching = 1.3;
  Range r_range{0.01, 0.04};   // p.u.
  Range x_range{0.004, 0.015}; // p.u.
  /// Conductor sizing: when every PQ bus drawing design_load_pu at
  /// design_power_factor would drop some bus more than max_design_drop
  /// below the slack (LinDistFlow estimate), all impedances are scaled down
  /// until it does not. 0 disables the check.
  double design_load_pu = 0.004;
  double design_power_factor = 0.95;
  double max_design_drop = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const GridGenConfig&, const GridGenConfig&) = default;
};

/// Residential loads with stochastic DER assets. Powers are in kW; the
/// p.u. conversion uses s_base_mva.
struct ScenarioGenConfig {
  Range base_load_kw_range{1.0, 5.0};
  std::array<double, 3> load_scale_choices{0.5, 1.0, 2.5};
  std::array<double, 3> load_scale_weights{1.0, 1.0, 1.0};
  /// Fraction of PQ buses that host a household (and can host DER).
  double load_bus_fraction = 1.0;
  double pv_penetration = 0.40;
  Range pv_kwp_range{5.0, 15.0};
  /// Per-draw PV output as a fraction of kWp.
  Range pv_output_range{0.0, 1.0};
  double ev_penetration = 0.20;
  double ev_kw = 11.0;
  double hp_penetration = 0.15;
  Range hp_kw_range{3.0, 6.0};
  double batt_fraction_of_pv = 0.30;
  double batt_kw = 5.0;
  /// Load power factor (lagging); PV and batteries run at unity.
  double power_factor = 0.95;
  double s_base_mva = 1.0;
  double slack_vm = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const ScenarioGenConfig&, const ScenarioGenConfig&) = default;
};

RadialGrid gen_grid(const GridGenConfig& config);

/// Largest LinDistFlow voltage drop below a 1.0 p.u. slack when every PQ
/// bus draws `p_load` at power factor `pf`.
double design_drop(const RadialGrid& grid, double p_load, double pf);

/// Assets placed on one grid. Fixed for a (grid, config seed) pair.
struct DerPlacement {
  std::vector<char> is_load;
  std::vector<double> load_scale;
  std::vector<double> pv_kwp;  // 0 where absent
  std::vector<double> ev_kw;
  std::vector<double> hp_kw;
  std::vector<double> batt_kw;
};

/// Draws scenarios for one grid. Placement is sampled once in the
/// constructor; each draw_index then gets an independent random stream.
class ScenarioGenerator {
 public:
  ScenarioGenerator(const RadialGrid& grid, ScenarioGenConfig config);

  const DerPlacement& placement() const noexcept { return placement_; }
  Scenario draw(std::uint64_t draw_index, std::uint64_t attempt = 0) const;

 private:
  std::size_t n_ = 0;
  BusId slack_ = 0;
  ScenarioGenConfig config_;
  DerPlacement placement_;
};

Scenario gen_scenario(const RadialGrid& grid, const ScenarioGenConfig& config,
                      std::uint64_t draw_index);

struct DatasetOptions {
  SolverOptions solver;
  /// Redraws allowed per sample when the oracle fails to converge.
  int retry_budget = 5;
  /// Upper bound on |dP|, |dQ| at PQ buses accepted for a label.
  double mismatch_tol = 1e-8;
  unsigned threads = 1;
};

/// n_samples oracle-labelled samples in draw-index order. Throws
/// NonConvergenceError once a sample exhausts its retry budget.
std::vector<LabeledSample> build_dataset(const RadialGrid& grid,
                                         const ScenarioGenConfig& scenario_config,
                                         int n_samples, const DatasetOptions& opts = {});

nlohmann::json to_json(const GridGenConfig& config);
GridGenConfig grid_gen_config_from_json(const nlohmann::json& doc, GridGenConfig defaults = {});
nlohmann::json to_json(const ScenarioGenConfig& config);
ScenarioGenConfig scenario_gen_config_from_json(const nlohmann::json& doc,
                                                ScenarioGenConfig defaults = {});

}  // namespace boostrpf
