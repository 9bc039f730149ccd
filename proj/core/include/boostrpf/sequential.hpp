#pragma once

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "boostrpf/gbt.hpp"
#include "boostrpf/grid.hpp"
#include "boostrpf/paths.hpp"
#include "boostrpf/variant.hpp"

namespace boostrpf {

/// Anything that maps an edge feature vector to a 2-output prediction
/// (magnitude, angle) in the units of the variant's target.
class EdgeRegressor {
 public:
  virtual ~EdgeRegressor() = default;
  virtual BusVoltage predict(const FeatureVector& features) const = 0;
};

/// A boosted model bound to the target variant it was trained for. Holds no
/// topology, so one predictor serves grids of any size.
class TrainedPredictor final : public EdgeRegressor {
 public:
  TrainedPredictor(Variant variant, GbtModel model);

  Variant variant() const noexcept { return variant_; }
  const GbtModel& model() const noexcept { return model_; }
  BusVoltage predict(const FeatureVector& features) const override;

 private:
  Variant variant_;
  GbtModel model_;
};

/// Predictor file: the model document plus "variant" and "feature_order".
nlohmann::json to_json(const TrainedPredictor& predictor);
/// Throws Error{SchemaError | VersionMismatch}.
TrainedPredictor predictor_from_json(const nlohmann::json& doc);

/// Pooled teacher-forced rows of every sample in `datasets`, in dataset,
/// sample, then BFS order.
struct EdgeTable {
  Matrix features;
  Matrix targets;
};

EdgeTable build_edge_table(std::span<const GridDataset> datasets, Variant variant);

struct TrainOptions {
  /// Optional held-out data; its per-round RMSE is reported through on_round.
  std::span<const GridDataset> validation;
  std::function<void(const RoundStats&)> on_round;
  unsigned threads = 1;
};

/// Throws Error{EmptyDataset} when there is nothing to learn from.
TrainedPredictor train(std::span<const GridDataset> datasets, Variant variant,
                       const GbtParams& params, const TrainOptions& options = {});

enum class LdfAnchor {
  /// V_LDF of a child is one LinDistFlow step from its *predicted* parent.
  PredictedParent,
  /// V_LDF comes from a plain LinDistFlow sweep anchored at the slack.
  Slack,
};

struct InferOptions {
  LdfAnchor ldf_anchor = LdfAnchor::PredictedParent;
  /// Buses at the same depth are predicted concurrently when > 1.
  unsigned threads = 1;
};

/// Autoregressive BFS inference: aggregates are accumulated leaf to root,
/// then every non-slack bus is predicted from its already-predicted parent.
/// Exactly N-1 regressor calls.
VoltageState infer(const RadialGrid& grid, const Orientation& orientation,
                   const Scenario& scenario, Variant variant, const EdgeRegressor& regressor,
                   const InferOptions& options = {});

VoltageState infer(const RadialGrid& grid, const Orientation& orientation,
                   const Scenario& scenario, const TrainedPredictor& predictor,
                   const InferOptions& options = {});

/// Same as infer() but visits buses in a caller-supplied order, which must
/// list every bus once with each parent before its children.
/// Throws Error{BadConfig} otherwise.
VoltageState infer_in_order(const RadialGrid& grid, const Orientation& orientation,
                            const Scenario& scenario, Variant variant,
                            const EdgeRegressor& regressor, std::span<const BusId> order,
                            const InferOptions& options = {});

}  // namespace boostrpf
