#include "boostrpf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "boostrpf/error.hpp"

namespace boostrpf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::NoSlack: return "NoSlack";
    case ErrorCode::MultipleSlack: return "MultipleSlack";
    case ErrorCode::DanglingBranch: return "DanglingBranch";
    case ErrorCode::InvalidBranch: return "InvalidBranch";
    case ErrorCode::InvalidBusIds: return "InvalidBusIds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::span<const Neighbor> RadialGrid::neighbors(BusId bus) const {
  const auto b = static_cast<std::size_t>(bus);
  return std::span<const Neighbor>(adjacency_).subspan(
      adjacency_offsets_[b], adjacency_offsets_[b + 1] - adjacency_offsets_[b]);
}

VoltageState VoltageState::flat(std::size_t n, double vm, double va_deg) {
  return VoltageState{std::vector<double>(n, vm), std::vector<double>(n, va_deg)};
}

double PowerMismatch::max_abs_pq(const RadialGrid& grid) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (grid.buses()[i].kind == BusKind::Slack) continue;
    worst = std::max({worst, std::abs(dp[i]), std::abs(dq[i])});
  }
  return worst;
}

RadialGrid validate_grid(GridData data) {
  const std::size_t n = data.buses.size();
  if (n == 0) throw Error(ErrorCode::InvalidBusIds, "grid has no buses");

  std::sort(data.buses.begin(), data.buses.end(),
            [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < n; ++i) {
    if (data.buses[i].id != static_cast<BusId>(i)) {
      throw Error(ErrorCode::InvalidBusIds,
                  "bus ids must be unique and dense in [0, N); expected id " +
                      std::to_string(i) + ", found " + std::to_string(data.buses[i].id));
    }
  }

  const auto n_slack = std::count_if(data.buses.begin(), data.buses.end(),
                                     [](const Bus& b) { return b.kind == BusKind::Slack; });
  if (n_slack == 0) throw Error(ErrorCode::NoSlack, "grid has no slack bus");
  if (n_slack > 1) {
    throw Error(ErrorCode::MultipleSlack,
                "grid has " + std::to_string(n_slack) + " slack buses");
  }
  if (data.slack_id < 0 || static_cast<std::size_t>(data.slack_id) >= n ||
      data.buses[static_cast<std::size_t>(data.slack_id)].kind != BusKind::Slack) {
    throw Error(ErrorCode::NoSlack,
                "slack_id " + std::to_string(data.slack_id) + " is not the slack bus");
  }

  for (std::size_t k = 0; k < data.branches.size(); ++k) {
    const Branch& br = data.branches[k];
    const bool in_range = br.from >= 0 && br.to >= 0 && static_cast<std::size_t>(br.from) < n &&
                          static_cast<std::size_t>(br.to) < n;
    if (!in_range || br.from == br.to) {
      throw Error(ErrorCode::DanglingBranch,
                  "branch " + std::to_string(k) + " (" + std::to_string(br.from) + " -> " +
                      std::to_string(br.to) + ") does not join two distinct buses");
    }
    if (!std::isfinite(br.r) || !std::isfinite(br.x) || br.r < 0.0 || br.x < 0.0 ||
        (br.r == 0.0 && br.x == 0.0)) {
      throw Error(ErrorCode::InvalidBranch,
                  "branch " + std::to_string(k) + " needs r >= 0, x >= 0, not both zero");
    }
  }

  if (data.branches.size() + 1 != n) {
    throw Error(ErrorCode::NotATree, "a radial grid with " + std::to_string(n) +
                                         " buses needs " + std::to_string(n - 1) +
                                         " branches, found " +
                                         std::to_string(data.branches.size()));
  }
  DisjointSets sets(n);
  for (const Branch& br : data.branches) {
    if (!sets.unite(static_cast<std::size_t>(br.from), static_cast<std::size_t>(br.to))) {
      throw Error(ErrorCode::NotATree, "branch " + std::to_string(br.from) + " -> " +
                                           std::to_string(br.to) + " closes a cycle");
    }
  }

  RadialGrid grid;
  grid.adjacency_offsets_.assign(n + 1, 0);
  for (const Branch& br : data.branches) {
    ++grid.adjacency_offsets_[static_cast<std::size_t>(br.from) + 1];
    ++grid.adjacency_offsets_[static_cast<std::size_t>(br.to) + 1];
  }
  std::partial_sum(grid.adjacency_offsets_.begin(), grid.adjacency_offsets_.end(),
                   grid.adjacency_offsets_.begin());
  grid.adjacency_.resize(2 * data.branches.size());
  std::vector<std::size_t> cursor(grid.adjacency_offsets_.begin(),
                                  grid.adjacency_offsets_.end() - 1);
  for (std::size_t k = 0; k < data.branches.size(); ++k) {
    const Branch& br = data.branches[k];
    grid.adjacency_[cursor[static_cast<std::size_t>(br.from)]++] = Neighbor{br.to, k};
    grid.adjacency_[cursor[static_cast<std::size_t>(br.to)]++] = Neighbor{br.from, k};
  }
  for (std::size_t b = 0; b < n; ++b) {
    std::sort(grid.adjacency_.begin() + static_cast<std::ptrdiff_t>(grid.adjacency_offsets_[b]),
              grid.adjacency_.begin() + static_cast<std::ptrdiff_t>(grid.adjacency_offsets_[b + 1]),
              [](const Neighbor& a, const Neighbor& c) { return a.bus < c.bus; });
  }
  grid.data_ = std::move(data);
  return grid;
}

void check_scenario(const RadialGrid& grid, const Scenario& scenario) {
  const std::size_t n = grid.size();
  if (scenario.p_inj.size() != n || scenario.q_inj.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "scenario has " + std::to_string(scenario.p_inj.size()) + "/" +
                    std::to_string(scenario.q_inj.size()) + " injections for a " +
                    std::to_string(n) + "-bus grid");
  }
  if (!(scenario.slack_vm > 0.0)) {
    throw Error(ErrorCode::BadConfig, "slack voltage magnitude must be positive");
  }
}

PowerMismatch power_mismatch(const RadialGrid& grid, const Scenario& scenario,
                             const VoltageState& state) {
  check_scenario(grid, scenario);
  const std::size_t n = grid.size();
  if (state.vm.size() != n || state.va_deg.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "voltage state length does not match grid");
  }

  using cplx = std::complex<double>;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(state.vm[i], state.va_deg[i] * kDegToRad);

  // I = Y V, assembled branch by branch (no shunts).
  std::vector<cplx> current(n, cplx{0.0, 0.0});
  for (const Branch& br : grid.branches()) {
    const cplx y = 1.0 / cplx{br.r, br.x};
    const auto a = static_cast<std::size_t>(br.from);
    const auto b = static_cast<std::size_t>(br.to);
    const cplx flow = y * (v[a] - v[b]);
    current[a] += flow;
    current[b] -= flow;
  }

  PowerMismatch out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx s = v[i] * std::conj(current[i]);
    out.dp[i] = scenario.p_inj[i] - s.real();
    out.dq[i] = scenario.q_inj[i] - s.imag();
  }
  return out;
}

}  // namespace boostrpf
