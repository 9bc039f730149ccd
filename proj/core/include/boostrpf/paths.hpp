#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "boostrpf/grid.hpp"
#include "boostrpf/variant.hpp"

namespace boostrpf {

inline constexpr BusId kNoParent = -1;

/// The grid rooted at the slack bus. `bfs_order` visits buses level by
/// level; within a level, in the order their parents were visited, and among
/// siblings by ascending id.
struct Orientation {
  std::vector<BusId> parent;              // kNoParent for the slack
  std::vector<std::size_t> parent_branch; // branch index joining bus to parent
  std::vector<int> depth;
  std::vector<BusId> bfs_order;
  std::vector<std::vector<BusId>> children;
  /// level_offsets[d]..level_offsets[d+1] delimits depth d inside bfs_order.
  std::vector<std::size_t> level_offsets;

  std::optional<BusId> parent_of(BusId bus) const {
    const BusId p = parent[static_cast<std::size_t>(bus)];
    return p == kNoParent ? std::nullopt : std::optional<BusId>(p);
  }
  int max_depth() const { return static_cast<int>(level_offsets.size()) - 2; }
  std::span<const BusId> level(int d) const {
    return std::span<const BusId>(bfs_order)
        .subspan(level_offsets[static_cast<std::size_t>(d)],
                 level_offsets[static_cast<std::size_t>(d) + 1] -
                     level_offsets[static_cast<std::size_t>(d)]);
  }
  bool is_leaf(BusId bus) const {
    return parent[static_cast<std::size_t>(bus)] != kNoParent &&
           children[static_cast<std::size_t>(bus)].empty();
  }
};

Orientation orient(const RadialGrid& grid);

/// Lossless downstream demand per bus: P_agg,j = -P_j + sum over children.
/// The slack row holds the total demand of the whole feeder (its own
/// injection is not part of it).
struct Aggregates {
  std::vector<double> p_agg;
  std::vector<double> q_agg;
};

Aggregates aggregate_downstream(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario);

/// One root-to-leaf bus sequence per leaf, sorted by leaf id.
std::vector<std::vector<BusId>> decompose_paths(const RadialGrid& grid,
                                                const Orientation& orientation);

inline constexpr std::size_t kFeatureDim = 10;
inline constexpr std::size_t kTargetDim = 2;

/// Column order of the per-edge feature vector.
inline constexpr std::array<std::string_view, kFeatureDim> kFeatureNames = {
    "v_parent_pu", "theta_parent_deg", "r_pu",     "x_pu",         "p_inj_pu",
    "q_inj_pu",    "p_agg_pu",         "q_agg_pu", "v_ldf_pu", "theta_ldf_deg"};

using FeatureVector = std::array<double, kFeatureDim>;
using TargetVector = std::array<double, kTargetDim>;

struct EdgeSample {
  BusId child = 0;
  BusId parent = 0;
  FeatureVector features{};
  TargetVector target{};
};

/// Builds the feature vector of `child` given its parent's state and the
/// child's LinDistFlow estimate (computed from that same parent state).
FeatureVector edge_features(const RadialGrid& grid, const Orientation& orientation,
                            const Scenario& scenario, const Aggregates& aggregates,
                            BusId child, BusVoltage parent_state, BusVoltage ldf);

/// One teacher-forced training row per non-slack bus, in BFS order. Parent
/// features come from `truth`; `ldf_baseline` must hold the LinDistFlow
/// step evaluated from the true parent states (see teacher_forced_ldf).
/// Throws Error{MissingTruth} when truth or baseline do not cover every bus.
std::vector<EdgeSample> extract_edge_samples(const RadialGrid& grid,
                                             const Orientation& orientation,
                                             const Scenario& scenario,
                                             const VoltageState& truth, Variant variant,
                                             const Aggregates& aggregates,
                                             const VoltageState& ldf_baseline);

}  // namespace boostrpf
