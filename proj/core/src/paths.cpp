#include "boostrpf/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boostrpf/error.hpp"

namespace boostrpf {

Orientation orient(const RadialGrid& grid) {
  const std::size_t n = grid.size();
  Orientation o;
  o.parent.assign(n, kNoParent);
  o.parent_branch.assign(n, 0);
  o.depth.assign(n, -1);
  o.children.assign(n, {});
  o.bfs_order.reserve(n);

  const BusId slack = grid.slack();
  o.depth[static_cast<std::size_t>(slack)] = 0;
  o.bfs_order.push_back(slack);
  o.level_offsets.push_back(0);
  for (std::size_t head = 0; head < o.bfs_order.size(); ++head) {
    const BusId bus = o.bfs_order[head];
    const int d = o.depth[static_cast<std::size_t>(bus)];
    if (static_cast<std::size_t>(d) == o.level_offsets.size()) o.level_offsets.push_back(head);
    for (const Neighbor& nb : grid.neighbors(bus)) {
      const auto c = static_cast<std::size_t>(nb.bus);
      if (o.depth[c] >= 0) continue;
      o.depth[c] = d + 1;
      o.parent[c] = bus;
      o.parent_branch[c] = nb.branch;
      o.children[static_cast<std::size_t>(bus)].push_back(nb.bus);
      o.bfs_order.push_back(nb.bus);
    }
  }
  o.level_offsets.push_back(o.bfs_order.size());
  return o;
}

Aggregates aggregate_downstream(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario) {
  check_scenario(grid, scenario);
  const std::size_t n = grid.size();
  Aggregates agg{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (auto it = orientation.bfs_order.rbegin(); it != orientation.bfs_order.rend(); ++it) {
    const auto j = static_cast<std::size_t>(*it);
    double p = 0.0;
    double q = 0.0;
    if (orientation.parent[j] != kNoParent) {
      p = -scenario.p_inj[j];
      q = -scenario.q_inj[j];
    }
    for (BusId c : orientation.children[j]) {
      p += agg.p_agg[static_cast<std::size_t>(c)];
      q += agg.q_agg[static_cast<std::size_t>(c)];
    }
    agg.p_agg[j] = p;
    agg.q_agg[j] = q;
  }
  return agg;
}

std::vector<std::vector<BusId>> decompose_paths(const RadialGrid& grid,
                                                const Orientation& orientation) {
  std::vector<std::vector<BusId>> paths;
  for (BusId leaf = 0; static_cast<std::size_t>(leaf) < grid.size(); ++leaf) {
    if (!orientation.is_leaf(leaf)) continue;
    std::vector<BusId> path;
    path.reserve(static_cast<std::size_t>(orientation.depth[static_cast<std::size_t>(leaf)]) + 1);
    for (BusId b = leaf; b != kNoParent; b = orientation.parent[static_cast<std::size_t>(b)]) {
      path.push_back(b);
    }
    std::reverse(path.begin(), path.end());
    paths.push_back(std::move(path));
  }
  return paths;
}

FeatureVector edge_features(const RadialGrid& grid, const Orientation& orientation,
                            const Scenario& scenario, const Aggregates& aggregates,
                            BusId child, BusVoltage parent_state, BusVoltage ldf) {
  const auto j = static_cast<std::size_t>(child);
  const Branch& br = grid.branches()[orientation.parent_branch[j]];
  return FeatureVector{parent_state.vm,       parent_state.va_deg, br.r,
                       br.x,                  scenario.p_inj[j],   scenario.q_inj[j],
                       aggregates.p_agg[j],   aggregates.q_agg[j], ldf.vm,
                       ldf.va_deg};
}

namespace {

bool covers(const VoltageState& s, std::size_t n) {
  if (s.vm.size() != n || s.va_deg.size() != n) return false;
  return std::all_of(s.vm.begin(), s.vm.end(), [](double v) { return std::isfinite(v); }) &&
         std::all_of(s.va_deg.begin(), s.va_deg.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

std::vector<EdgeSample> extract_edge_samples(const RadialGrid& grid,
                                             const Orientation& orientation,
                                             const Scenario& scenario,
                                             const VoltageState& truth, Variant variant,
                                             const Aggregates& aggregates,
                                             const VoltageState& ldf_baseline) {
  const std::size_t n = grid.size();
  check_scenario(grid, scenario);
  if (!covers(truth, n)) {
    throw Error(ErrorCode::MissingTruth, "ground truth does not cover all " +
                                             std::to_string(n) + " buses");
  }
  if (!covers(ldf_baseline, n)) {
    throw Error(ErrorCode::MissingTruth, "LinDistFlow baseline does not cover all buses");
  }

  std::vector<EdgeSample> samples;
  samples.reserve(n - 1);
  for (BusId child : orientation.bfs_order) {
    const auto j = static_cast<std::size_t>(child);
    const BusId parent = orientation.parent[j];
    if (parent == kNoParent) continue;
    const auto i = static_cast<std::size_t>(parent);
    const BusVoltage parent_state{truth.vm[i], truth.va_deg[i]};
    const BusVoltage ldf{ldf_baseline.vm[j], ldf_baseline.va_deg[j]};
    const BusVoltage t =
        make_target(variant, BusVoltage{truth.vm[j], truth.va_deg[j]}, parent_state, ldf);

    EdgeSample s;
    s.child = child;
    s.parent = parent;
    s.features = edge_features(grid, orientation, scenario, aggregates, child, parent_state, ldf);
    s.target = {t.vm, t.va_deg};
    samples.push_back(s);
  }
  return samples;
}

}  // namespace boostrpf
