#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boostrpf {

using BusId = int;

enum class BusKind { Slack, PQ };

struct Bus {
  BusId id = 0;
  BusKind kind = BusKind::PQ;
  std::optional<std::string> name;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Series branch z = r + jx in per-unit. No shunt, tap or transformer model.
struct Branch {
  BusId from = 0;
  BusId to = 0;
  double r = 0.0;
  double x = 0.0;

  friend bool operator==(const Branch&, const Branch&) = default;
};

/// Unvalidated network description, as read from a file or built by hand.
struct GridData {
  BusId slack_id = 0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;

  friend bool operator==(const GridData&, const GridData&) = default;
};

struct Neighbor {
  BusId bus;
  std::size_t branch;
};

/// A validated radial network. Only obtainable through validate_grid(), so
/// holding one guarantees: one slack bus, dense ids in [0, N), N-1 branches,
/// connected and acyclic.
class RadialGrid {
 public:
  std::size_t size() const noexcept { return data_.buses.size(); }
  BusId slack() const noexcept { return data_.slack_id; }
  const std::vector<Bus>& buses() const noexcept { return data_.buses; }
  const std::vector<Branch>& branches() const noexcept { return data_.branches; }
  const GridData& data() const noexcept { return data_; }

  /// Adjacent buses of `bus`, sorted by ascending bus id.
  std::span<const Neighbor> neighbors(BusId bus) const;

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.data_ == b.data_;
  }

 private:
  friend RadialGrid validate_grid(GridData data);
  RadialGrid() = default;

  GridData data_;
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<Neighbor> adjacency_;
};

/// Net injections in per-unit (generation positive, loads negative). The
/// slack entries are carried along but never used by a solver.
struct Scenario {
  std::vector<double> p_inj;
  std::vector<double> q_inj;
  double slack_vm = 1.0;
  double slack_va_deg = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Per-bus voltage magnitude (p.u.) and angle (degrees).
struct VoltageState {
  std::vector<double> vm;
  std::vector<double> va_deg;

  std::size_t size() const noexcept { return vm.size(); }
  static VoltageState flat(std::size_t n, double vm, double va_deg);

  friend bool operator==(const VoltageState&, const VoltageState&) = default;
};

/// One supervised record: injections plus the AC solution they produce.
struct LabeledSample {
  Scenario scenario;
  VoltageState truth;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct PowerMismatch {
  std::vector<double> dp;
  std::vector<double> dq;

  /// Largest |dP| or |dQ| over PQ buses only.
  double max_abs_pq(const RadialGrid& grid) const;
};

/// All labelled samples of one network.
struct GridDataset {
  RadialGrid grid;
  std::vector<LabeledSample> samples;
};

/// Throws Error{NotATree | NoSlack | MultipleSlack | DanglingBranch |
/// InvalidBranch | InvalidBusIds}.
RadialGrid validate_grid(GridData data);

/// Checks array lengths and the slack_vm > 0 invariant against `grid`.
void check_scenario(const RadialGrid& grid, const Scenario& scenario);

/// Per-bus AC injection residuals P_i - P_i(V), Q_i - Q_i(V) for the series
/// admittance matrix of `grid`. Slack rows are reported too; they carry
/// whatever power the slack must supply and are not expected to vanish.
PowerMismatch power_mismatch(const RadialGrid& grid, const Scenario& scenario,
                             const VoltageState& state);

}  // namespace boostrpf
