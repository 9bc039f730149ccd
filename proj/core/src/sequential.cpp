#include "boostrpf/sequential.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "boostrpf/analytical.hpp"
#include "boostrpf/error.hpp"

namespace boostrpf {

TrainedPredictor::TrainedPredictor(Variant variant, GbtModel model)
    : variant_(variant), model_(std::move(model)) {
  if (model_.feature_dim != kFeatureDim || model_.output_dim != kTargetDim) {
    throw Error(ErrorCode::DimensionMismatch,
                "voltage predictors need a " + std::to_string(kFeatureDim) + "-feature, " +
                    std::to_string(kTargetDim) + "-output model");
  }
}

BusVoltage TrainedPredictor::predict(const FeatureVector& features) const {
  std::array<double, kTargetDim> out{};
  model_.predict_into(features, out);
  return {out[0], out[1]};
}

nlohmann::json to_json(const TrainedPredictor& predictor) {
  nlohmann::json doc = to_json(predictor.model());
  doc["variant"] = std::string(to_string(predictor.variant()));
  nlohmann::json order = nlohmann::json::array();
  for (std::string_view name : kFeatureNames) order.push_back(std::string(name));
  doc["feature_order"] = std::move(order);
  return doc;
}

TrainedPredictor predictor_from_json(const nlohmann::json& doc) {
  GbtModel model = gbt_model_from_json(doc);
  if (!doc.contains("variant") || !doc.at("variant").is_string()) {
    throw Error(ErrorCode::SchemaError, "predictor document: missing 'variant'");
  }
  const auto variant = parse_variant(doc.at("variant").get<std::string>());
  if (!variant) throw Error(ErrorCode::SchemaError, "predictor document: unknown variant");
  if (!doc.contains("feature_order") || !doc.at("feature_order").is_array() ||
      doc.at("feature_order").size() != kFeatureDim) {
    throw Error(ErrorCode::SchemaError, "predictor document: bad 'feature_order'");
  }
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    const auto& name = doc.at("feature_order")[i];
    if (!name.is_string() || name.get<std::string>() != kFeatureNames[i]) {
      throw Error(ErrorCode::SchemaError,
                  "predictor document: feature " + std::to_string(i) + " must be '" +
                      std::string(kFeatureNames[i]) + "'");
    }
  }
  try {
    return TrainedPredictor(*variant, std::move(model));
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaError, std::string("predictor document: ") + e.what());
  }
}

EdgeTable build_edge_table(std::span<const GridDataset> datasets, Variant variant) {
  std::size_t total = 0;
  for (const GridDataset& ds : datasets) total += ds.samples.size() * (ds.grid.size() - 1);

  std::vector<double> features;
  std::vector<double> targets;
  features.reserve(total * kFeatureDim);
  targets.reserve(total * kTargetDim);
  for (const GridDataset& ds : datasets) {
    const Orientation o = orient(ds.grid);
    for (const LabeledSample& sample : ds.samples) {
      const Aggregates agg = aggregate_downstream(ds.grid, o, sample.scenario);
      const VoltageState ldf = teacher_forced_ldf(ds.grid, o, sample.scenario, agg, sample.truth);
      for (const EdgeSample& e :
           extract_edge_samples(ds.grid, o, sample.scenario, sample.truth, variant, agg, ldf)) {
        features.insert(features.end(), e.features.begin(), e.features.end());
        targets.insert(targets.end(), e.target.begin(), e.target.end());
      }
    }
  }
  const std::size_t rows = features.size() / kFeatureDim;
  return EdgeTable{Matrix(rows, kFeatureDim, std::move(features)),
                   Matrix(rows, kTargetDim, std::move(targets))};
}

TrainedPredictor train(std::span<const GridDataset> datasets, Variant variant,
                       const GbtParams& params, const TrainOptions& options) {
  const EdgeTable table = build_edge_table(datasets, variant);
  if (table.features.rows() < 2) {
    throw Error(ErrorCode::EmptyDataset, "training set yields fewer than two edge samples");
  }
  FitOptions fit_options;
  fit_options.on_round = options.on_round;
  fit_options.threads = options.threads;
  EdgeTable valid;
  if (!options.validation.empty()) {
    valid = build_edge_table(options.validation, variant);
    if (valid.features.rows() > 0) {
      fit_options.valid_rows = &valid.features;
      fit_options.valid_targets = &valid.targets;
    }
  }
  return TrainedPredictor(variant, fit(table.features, table.targets, params, fit_options));
}

namespace {

struct InferenceContext {
  const RadialGrid& grid;
  const Orientation& orientation;
  const Scenario& scenario;
  Variant variant;
  const EdgeRegressor& regressor;
  Aggregates aggregates;
  VoltageState slack_ldf;  // only filled for LdfAnchor::Slack
  LdfAnchor anchor;

  void predict_bus(BusId child, VoltageState& state) const {
    const auto j = static_cast<std::size_t>(child);
    const auto i = static_cast<std::size_t>(orientation.parent[j]);
    const BusVoltage parent{state.vm[i], state.va_deg[i]};
    BusVoltage ldf;
    if (anchor == LdfAnchor::Slack) {
      ldf = {slack_ldf.vm[j], slack_ldf.va_deg[j]};
    } else {
      const Branch& br = grid.branches()[orientation.parent_branch[j]];
      ldf = lindistflow_step({parent.vm, parent.va_deg, br.r, br.x, aggregates.p_agg[j],
                              aggregates.q_agg[j], scenario.slack_vm});
    }
    const FeatureVector x =
        edge_features(grid, orientation, scenario, aggregates, child, parent, ldf);
    const BusVoltage v = reconstruct(variant, regressor.predict(x), parent, ldf);
    state.vm[j] = v.vm;
    state.va_deg[j] = v.va_deg;
  }
};

InferenceContext make_context(const RadialGrid& grid, const Orientation& orientation,
                              const Scenario& scenario, Variant variant,
                              const EdgeRegressor& regressor, const InferOptions& options) {
  InferenceContext ctx{grid,      orientation, scenario, variant, regressor,
                       aggregate_downstream(grid, orientation, scenario), {}, options.ldf_anchor};
  if (options.ldf_anchor == LdfAnchor::Slack) {
    ctx.slack_ldf = lindistflow_solve(grid, orientation, scenario);
  }
  return ctx;
}

}  // namespace

VoltageState infer(const RadialGrid& grid, const Orientation& orientation,
                   const Scenario& scenario, Variant variant, const EdgeRegressor& regressor,
                   const InferOptions& options) {
  const InferenceContext ctx = make_context(grid, orientation, scenario, variant, regressor, options);
  VoltageState state = VoltageState::flat(grid.size(), scenario.slack_vm, scenario.slack_va_deg);

  const unsigned threads = std::max(1u, options.threads);
  for (int d = 1; d <= orientation.max_depth(); ++d) {
    const std::span<const BusId> level = orientation.level(d);
    constexpr std::size_t kMinPerThread = 32;
    const auto workers = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(1, level.size() / kMinPerThread)));
    if (workers <= 1) {
      for (BusId b : level) ctx.predict_bus(b, state);
      continue;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < level.size(); k += workers) ctx.predict_bus(level[k], state);
      });
    }
  }
  return state;
}

VoltageState infer(const RadialGrid& grid, const Orientation& orientation,
                   const Scenario& scenario, const TrainedPredictor& predictor,
                   const InferOptions& options) {
  return infer(grid, orientation, scenario, predictor.variant(), predictor, options);
}

VoltageState infer_in_order(const RadialGrid& grid, const Orientation& orientation,
                            const Scenario& scenario, Variant variant,
                            const EdgeRegressor& regressor, std::span<const BusId> order,
                            const InferOptions& options) {
  const std::size_t n = grid.size();
  if (order.size() != n) throw Error(ErrorCode::BadConfig, "visiting order must list every bus once");
  std::vector<char> seen(n, 0);
  for (BusId b : order) {
    if (b < 0 || static_cast<std::size_t>(b) >= n || seen[static_cast<std::size_t>(b)]) {
      throw Error(ErrorCode::BadConfig, "visiting order must list every bus once");
    }
    const BusId p = orientation.parent[static_cast<std::size_t>(b)];
    if (p != kNoParent && !seen[static_cast<std::size_t>(p)]) {
      throw Error(ErrorCode::BadConfig,
                  "bus " + std::to_string(b) + " is visited before its parent " + std::to_string(p));
    }
    seen[static_cast<std::size_t>(b)] = 1;
  }

  const InferenceContext ctx = make_context(grid, orientation, scenario, variant, regressor, options);
  VoltageState state = VoltageState::flat(n, scenario.slack_vm, scenario.slack_va_deg);
  for (BusId b : order) {
    if (orientation.parent[static_cast<std::size_t>(b)] != kNoParent) ctx.predict_bus(b, state);
  }
  return state;
}

}  // namespace boostrpf
