#include "boostrpf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "boostrpf/error.hpp"
#include "boostrpf/paths.hpp"
#include "boostrpf/rng.hpp"

namespace boostrpf {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadConfig, what);
}

void require_range(const Range& r, bool allow_zero, const std::string& name) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi &&
              (allow_zero ? r.lo >= 0.0 : r.lo > 0.0),
          name + " must be an ordered " + (allow_zero ? "non-negative" : "positive") + " interval");
}

// Stream tags keep placement and per-draw randomness independent.
constexpr std::uint64_t kPlacementStream = 0x706c6163656d656eULL;
constexpr std::uint64_t kDrawStream = 0x6472617773ULL;

}  // namespace

void GridGenConfig::validate() const {
  require(n_buses >= 2, "n_buses must be >= 2");
  require(branching > 0.0 && std::isfinite(branching), "branching must be positive");
  require_range(r_range, false, "r_range");
  require_range(x_range, false, "x_range");
  require(design_load_pu >= 0.0 && std::isfinite(design_load_pu), "design_load_pu must be non-negative");
  require(design_power_factor > 0.0 && design_power_factor <= 1.0, "design_power_factor must be in (0, 1]");
  require(max_design_drop >= 0.0 && max_design_drop < 1.0, "max_design_drop must be in [0, 1)");
}

void ScenarioGenConfig::validate() const {
  require_range(base_load_kw_range, true, "base_load_kw_range");
  require_range(pv_kwp_range, true, "pv_kwp_range");
  require_range(hp_kw_range, true, "hp_kw_range");
  require(pv_output_range.lo >= 0.0 && pv_output_range.lo <= pv_output_range.hi &&
              pv_output_range.hi <= 1.0,
          "pv_output_range must lie in [0, 1]");
  for (double p : {load_bus_fraction, pv_penetration, ev_penetration, hp_penetration,
                   batt_fraction_of_pv}) {
    require(p >= 0.0 && p <= 1.0, "penetrations and fractions must lie in [0, 1]");
  }
  double total_weight = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    require(load_scale_weights[i] >= 0.0 && load_scale_choices[i] >= 0.0,
            "load scales and weights must be non-negative");
    total_weight += load_scale_weights[i];
  }
  require(total_weight > 0.0, "at least one load scale needs positive weight");
  require(ev_kw >= 0.0 && batt_kw >= 0.0, "asset ratings must be non-negative");
  require(power_factor > 0.0 && power_factor <= 1.0, "power_factor must lie in (0, 1]");
  require(s_base_mva > 0.0, "s_base_mva must be positive");
  require(slack_vm > 0.0, "slack_vm must be positive");
}

RadialGrid gen_grid(const GridGenConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto n = static_cast<std::size_t>(config.n_buses);

  GridData data;
  data.slack_id = 0;
  data.buses.reserve(n);
  data.buses.push_back(Bus{0, BusKind::Slack, std::nullopt});
  data.branches.reserve(n - 1);

  // Geometric child counts with mean `branching`; when the frontier dies out
  // growth restarts from a uniformly chosen existing bus.
  const double stop = 1.0 / (1.0 + config.branching);
  std::deque<BusId> frontier{0};
  std::size_t next = 1;
  while (next < n) {
    BusId parent;
    std::size_t children = 0;
    if (frontier.empty()) {
      parent = static_cast<BusId>(rng.below(next));
      children = 1;
    } else {
      parent = frontier.front();
      frontier.pop_front();
    }
    while (!rng.bernoulli(stop)) ++children;
    for (std::size_t c = 0; c < children && next < n; ++c, ++next) {
      const auto child = static_cast<BusId>(next);
      data.buses.push_back(Bus{child, BusKind::PQ, std::nullopt});
      data.branches.push_back(Branch{parent, child, rng.uniform(config.r_range.lo, config.r_range.hi),
                                     rng.uniform(config.x_range.lo, config.x_range.hi)});
      frontier.push_back(child);
    }
  }

  RadialGrid grid = validate_grid(data);
  if (config.max_design_drop > 0.0) {
    const double drop = design_drop(grid, config.design_load_pu, config.design_power_factor);
    if (drop > config.max_design_drop) {
      const double scale = config.max_design_drop / drop;
      for (Branch& br : data.branches) {
        br.r *= scale;
        br.x *= scale;
      }
      grid = validate_grid(std::move(data));
    }
  }
  return grid;
}

double design_drop(const RadialGrid& grid, double p_load, double pf) {
  const Orientation o = orient(grid);
  const double q_load = p_load * std::tan(std::acos(pf));
  std::vector<double> downstream(grid.size(), 0.0);
  for (auto it = o.bfs_order.rbegin(); it != o.bfs_order.rend(); ++it) {
    const auto j = static_cast<std::size_t>(*it);
    if (o.parent[j] == kNoParent) continue;
    downstream[j] += 1.0;
    downstream[static_cast<std::size_t>(o.parent[j])] += downstream[j];
  }
  std::vector<double> drop(grid.size(), 0.0);
  double worst = 0.0;
  for (BusId b : o.bfs_order) {
    const auto j = static_cast<std::size_t>(b);
    if (o.parent[j] == kNoParent) continue;
    const Branch& br = grid.branches()[o.parent_branch[j]];
    drop[j] = drop[static_cast<std::size_t>(o.parent[j])] +
              downstream[j] * (br.r * p_load + br.x * q_load);
    worst = std::max(worst, drop[j]);
  }
  return worst;
}

ScenarioGenerator::ScenarioGenerator(const RadialGrid& grid, ScenarioGenConfig config)
    : n_(grid.size()), slack_(grid.slack()), config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.seed, kPlacementStream, n_);
  placement_.is_load.assign(n_, 0);
  placement_.load_scale.assign(n_, 0.0);
  placement_.pv_kwp.assign(n_, 0.0);
  placement_.ev_kw.assign(n_, 0.0);
  placement_.hp_kw.assign(n_, 0.0);
  placement_.batt_kw.assign(n_, 0.0);

  const auto& w = config_.load_scale_weights;
  const double total_weight = w[0] + w[1] + w[2];
  for (std::size_t b = 0; b < n_; ++b) {
    if (static_cast<BusId>(b) == slack_) continue;
    if (!rng.bernoulli(config_.load_bus_fraction)) continue;
    placement_.is_load[b] = 1;
    const double u = rng.uniform() * total_weight;
    const std::size_t pick = u < w[0] ? 0 : (u < w[0] + w[1] ? 1 : 2);
    placement_.load_scale[b] = config_.load_scale_choices[pick];
    if (rng.bernoulli(config_.pv_penetration)) {
      placement_.pv_kwp[b] = rng.uniform(config_.pv_kwp_range.lo, config_.pv_kwp_range.hi);
      if (rng.bernoulli(config_.batt_fraction_of_pv)) placement_.batt_kw[b] = config_.batt_kw;
    }
    if (rng.bernoulli(config_.ev_penetration)) placement_.ev_kw[b] = config_.ev_kw;
    if (rng.bernoulli(config_.hp_penetration)) {
      placement_.hp_kw[b] = rng.uniform(config_.hp_kw_range.lo, config_.hp_kw_range.hi);
    }
  }
}

Scenario ScenarioGenerator::draw(std::uint64_t draw_index, std::uint64_t attempt) const {
  Rng rng(config_.seed ^ kDrawStream, draw_index, attempt);
  Scenario s;
  s.p_inj.assign(n_, 0.0);
  s.q_inj.assign(n_, 0.0);
  s.slack_vm = config_.slack_vm;
  s.slack_va_deg = 0.0;

  const double to_pu = 1.0 / (1000.0 * config_.s_base_mva);
  const double q_ratio = std::tan(std::acos(config_.power_factor));
  for (std::size_t b = 0; b < n_; ++b) {
    if (!placement_.is_load[b]) continue;
    const double base =
        rng.uniform(config_.base_load_kw_range.lo, config_.base_load_kw_range.hi) *
        placement_.load_scale[b];
    const double pv = placement_.pv_kwp[b] *
                      rng.uniform(config_.pv_output_range.lo, config_.pv_output_range.hi);
    const double ev = placement_.ev_kw[b] * rng.uniform();
    const double hp = placement_.hp_kw[b] * rng.uniform();
    // Positive = discharging into the grid.
    const double batt = placement_.batt_kw[b] * rng.uniform(-1.0, 1.0);

    const double p_load = base + ev + hp;
    s.p_inj[b] = (pv + batt - p_load) * to_pu;
    s.q_inj[b] = -p_load * q_ratio * to_pu;
  }
  return s;
}

Scenario gen_scenario(const RadialGrid& grid, const ScenarioGenConfig& config,
                      std::uint64_t draw_index) {
  return ScenarioGenerator(grid, config).draw(draw_index);
}

std::vector<LabeledSample> build_dataset(const RadialGrid& grid,
                                         const ScenarioGenConfig& scenario_config,
                                         int n_samples, const DatasetOptions& opts) {
  require(n_samples >= 0, "n_samples must be non-negative");
  require(opts.retry_budget >= 0, "retry_budget must be non-negative");
  opts.solver.validate();
  const ScenarioGenerator gen(grid, scenario_config);
  const Orientation orientation = orient(grid);
  std::vector<LabeledSample> out(static_cast<std::size_t>(n_samples));

  const auto label = [&](std::size_t i) {
    std::string last_failure;
    for (int attempt = 0; attempt <= opts.retry_budget; ++attempt) {
      Scenario scenario = gen.draw(i, static_cast<std::uint64_t>(attempt));
      try {
        VoltageState truth = ac_oracle_solve(grid, orientation, scenario, opts.solver);
        const double worst = power_mismatch(grid, scenario, truth).max_abs_pq(grid);
        if (worst < opts.mismatch_tol) {
          out[i] = LabeledSample{std::move(scenario), std::move(truth)};
          return;
        }
        last_failure = "power mismatch " + std::to_string(worst);
      } catch (const NonConvergenceError& e) {
        last_failure = e.what();
      }
    }
    throw NonConvergenceError("sample " + std::to_string(i) + " could not be labelled after " +
                                  std::to_string(opts.retry_budget + 1) + " draws: " + last_failure,
                              VoltageState{}, 0.0, opts.solver.max_iter);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(out.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < out.size(); ++i) label(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < out.size(); i += workers) label(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.lo, r.hi}); }

Range range_from(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::SchemaError, std::string("'") + key + "' must be a [lo, hi] pair");
  }
  return Range{j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read_if(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

void read_range_if(const nlohmann::json& doc, const char* key, Range& out) {
  if (doc.contains(key)) out = range_from(doc.at(key), key);
}

template <typename F>
auto wrap_schema(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const GridGenConfig& c) {
  return nlohmann::json{{"n_buses", c.n_buses},
                        {"branching", c.branching},
                        {"r_range", range_json(c.r_range)},
                        {"x_range", range_json(c.x_range)},
                        {"design_load_pu", c.design_load_pu},
                        {"design_power_factor", c.design_power_factor},
                        {"max_design_drop", c.max_design_drop},
                        {"seed", c.seed}};
}

GridGenConfig grid_gen_config_from_json(const nlohmann::json& doc, GridGenConfig c) {
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "grid config must be an object");
  return wrap_schema("grid config", [&] {
    read_if(doc, "n_buses", c.n_buses);
    read_if(doc, "branching", c.branching);
    read_range_if(doc, "r_range", c.r_range);
    read_range_if(doc, "x_range", c.x_range);
    read_if(doc, "design_load_pu", c.design_load_pu);
    read_if(doc, "design_power_factor", c.design_power_factor);
    read_if(doc, "max_design_drop", c.max_design_drop);
    read_if(doc, "seed", c.seed);
    return c;
  });
}

nlohmann::json to_json(const ScenarioGenConfig& c) {
  return nlohmann::json{{"base_load_kw_range", range_json(c.base_load_kw_range)},
                        {"load_scale_choices", c.load_scale_choices},
                        {"load_scale_weights", c.load_scale_weights},
                        {"load_bus_fraction", c.load_bus_fraction},
                        {"pv_penetration", c.pv_penetration},
                        {"pv_kwp_range", range_json(c.pv_kwp_range)},
                        {"pv_output_range", range_json(c.pv_output_range)},
                        {"ev_penetration", c.ev_penetration},
                        {"ev_kw", c.ev_kw},
                        {"hp_penetration", c.hp_penetration},
                        {"hp_kw_range", range_json(c.hp_kw_range)},
                        {"batt_fraction_of_pv", c.batt_fraction_of_pv},
                        {"batt_kw", c.batt_kw},
                        {"power_factor", c.power_factor},
                        {"s_base_mva", c.s_base_mva},
                        {"slack_vm", c.slack_vm},
                        {"seed", c.seed}};
}

ScenarioGenConfig scenario_gen_config_from_json(const nlohmann::json& doc, ScenarioGenConfig c) {
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "scenario config must be an object");
  return wrap_schema("scenario config", [&] {
    read_range_if(doc, "base_load_kw_range", c.base_load_kw_range);
    read_if(doc, "load_scale_choices", c.load_scale_choices);
    read_if(doc, "load_scale_weights", c.load_scale_weights);
    read_if(doc, "load_bus_fraction", c.load_bus_fraction);
    read_if(doc, "pv_penetration", c.pv_penetration);
    read_range_if(doc, "pv_kwp_range", c.pv_kwp_range);
    read_range_if(doc, "pv_output_range", c.pv_output_range);
    read_if(doc, "ev_penetration", c.ev_penetration);
    read_if(doc, "ev_kw", c.ev_kw);
    read_if(doc, "hp_penetration", c.hp_penetration);
    read_range_if(doc, "hp_kw_range", c.hp_kw_range);
    read_if(doc, "batt_fraction_of_pv", c.batt_fraction_of_pv);
    read_if(doc, "batt_kw", c.batt_kw);
    read_if(doc, "power_factor", c.power_factor);
    read_if(doc, "s_base_mva", c.s_base_mva);
    read_if(doc, "slack_vm", c.slack_vm);
    read_if(doc, "seed", c.seed);
    return c;
  });
}

}  // namespace boostrpf
