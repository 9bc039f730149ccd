#include "boostrpf/analytical.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace boostrpf {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::size_t idx(BusId b) { return static_cast<std::size_t>(b); }

}  // namespace

double branch_angle_shift_deg(double r, double x, double p, double q, double v_nom) {
  return (x * p - r * q) / (v_nom * v_nom) * kRadToDeg;
}

BusVoltage lindistflow_step(const LdfStepInput& in) {
  return BusVoltage{
      in.v_parent - (in.r * in.p_agg + in.x * in.q_agg) / in.v0,
      in.theta_parent_deg - branch_angle_shift_deg(in.r, in.x, in.p_agg, in.q_agg, in.v0)};
}

VoltageState lindistflow_solve(const RadialGrid& grid, const Orientation& orientation,
                               const Scenario& scenario) {
  const Aggregates agg = aggregate_downstream(grid, orientation, scenario);
  VoltageState out = VoltageState::flat(grid.size(), scenario.slack_vm, scenario.slack_va_deg);
  for (BusId j : orientation.bfs_order) {
    const BusId i = orientation.parent[idx(j)];
    if (i == kNoParent) continue;
    const Branch& br = grid.branches()[orientation.parent_branch[idx(j)]];
    const BusVoltage v = lindistflow_step({out.vm[idx(i)], out.va_deg[idx(i)], br.r, br.x,
                                           agg.p_agg[idx(j)], agg.q_agg[idx(j)],
                                           scenario.slack_vm});
    out.vm[idx(j)] = v.vm;
    out.va_deg[idx(j)] = v.va_deg;
  }
  return out;
}

VoltageState teacher_forced_ldf(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario, const Aggregates& aggregates,
                                const VoltageState& truth) {
  if (truth.vm.size() != grid.size() || truth.va_deg.size() != grid.size()) {
    throw Error(ErrorCode::MissingTruth, "ground truth does not cover the grid");
  }
  VoltageState out = truth;
  for (BusId j : orientation.bfs_order) {
    const BusId i = orientation.parent[idx(j)];
    if (i == kNoParent) continue;
    const Branch& br = grid.branches()[orientation.parent_branch[idx(j)]];
    const BusVoltage v = lindistflow_step({truth.vm[idx(i)], truth.va_deg[idx(i)], br.r, br.x,
                                           aggregates.p_agg[idx(j)], aggregates.q_agg[idx(j)],
                                           scenario.slack_vm});
    out.vm[idx(j)] = v.vm;
    out.va_deg[idx(j)] = v.va_deg;
  }
  return out;
}

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::BadConfig, "solver tolerance must be positive");
  if (max_iter < 1) throw Error(ErrorCode::BadConfig, "solver max_iter must be >= 1");
}

namespace {

// Active and reactive flow balance for the branch into `j`, given the current
// squared voltages.
void accumulate_flow(const RadialGrid& grid, const Orientation& o, const Scenario& s,
                     const std::vector<double>& v_sq, const std::vector<double>& p_flow,
                     const std::vector<double>& q_flow, BusId j, double& p_out,
                     double& q_out) {
  // Load convention: P^L = -net injection.
  double p = -s.p_inj[idx(j)];
  double q = -s.q_inj[idx(j)];
  for (BusId k : o.children[idx(j)]) {
    const Branch& br = grid.branches()[o.parent_branch[idx(k)]];
    const double pk = p_flow[idx(k)];
    const double qk = q_flow[idx(k)];
    const double s2 = (pk * pk + qk * qk) / v_sq[idx(j)];
    p += pk + br.r * s2;
    q += qk + br.x * s2;
  }
  p_out = p;
  q_out = q;
}

// Squared voltage drop along the branch into `j`.
double squared_drop(const Branch& br, double v_sq_parent, double p, double q) {
  return v_sq_parent - 2.0 * (br.r * p + br.x * q) +
         (br.r * br.r + br.x * br.x) * (p * p + q * q) / v_sq_parent;
}

VoltageState distflow_state(const Orientation& o, const Scenario& s, const std::vector<double>& v_sq,
                            const std::vector<double>& p_flow, const std::vector<double>& q_flow,
                            const RadialGrid& grid) {
  VoltageState st = VoltageState::flat(v_sq.size(), s.slack_vm, s.slack_va_deg);
  for (BusId j : o.bfs_order) {
    const BusId i = o.parent[idx(j)];
    if (i == kNoParent) continue;
    const Branch& br = grid.branches()[o.parent_branch[idx(j)]];
    st.vm[idx(j)] = std::sqrt(v_sq[idx(j)]);
    st.va_deg[idx(j)] = st.va_deg[idx(i)] - branch_angle_shift_deg(br.r, br.x, p_flow[idx(j)],
                                                                   q_flow[idx(j)], s.slack_vm);
  }
  return st;
}

}  // namespace

DistFlowSolution distflow_solve(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario, const SolverOptions& opts) {
  opts.validate();
  check_scenario(grid, scenario);
  const std::size_t n = grid.size();
  const double v0_sq = scenario.slack_vm * scenario.slack_vm;

  DistFlowSolution sol;
  sol.v_sq.assign(n, v0_sq);
  sol.p_flow.assign(n, 0.0);
  sol.q_flow.assign(n, 0.0);

  double delta = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (auto r = orientation.bfs_order.rbegin(); r != orientation.bfs_order.rend(); ++r) {
      if (orientation.parent[idx(*r)] == kNoParent) continue;
      double p = 0.0;
      double q = 0.0;
      accumulate_flow(grid, orientation, scenario, sol.v_sq, sol.p_flow, sol.q_flow, *r, p, q);
      sol.p_flow[idx(*r)] = p;
      sol.q_flow[idx(*r)] = q;
    }

    delta = 0.0;
    bool finite = true;
    for (BusId j : orientation.bfs_order) {
      const BusId i = orientation.parent[idx(j)];
      if (i == kNoParent) continue;
      const Branch& br = grid.branches()[orientation.parent_branch[idx(j)]];
      const double next =
          squared_drop(br, sol.v_sq[idx(i)], sol.p_flow[idx(j)], sol.q_flow[idx(j)]);
      if (!(next > 0.0) || !std::isfinite(next)) {
        finite = false;
        break;
      }
      delta = std::max(delta, std::abs(std::sqrt(next) - std::sqrt(sol.v_sq[idx(j)])));
      sol.v_sq[idx(j)] = next;
    }
    sol.iterations = it;
    if (!finite) break;
    if (delta < opts.tol) {
      sol.state = distflow_state(orientation, scenario, sol.v_sq, sol.p_flow, sol.q_flow, grid);
      return sol;
    }
  }
  throw NonConvergenceError(
      "DistFlow did not converge in " + std::to_string(sol.iterations) +
          " iterations (last max |dV| = " + std::to_string(delta) + ")",
      distflow_state(orientation, scenario, sol.v_sq, sol.p_flow, sol.q_flow, grid), delta,
      sol.iterations);
}

double distflow_residual(const RadialGrid& grid, const Orientation& orientation,
                         const Scenario& scenario, const DistFlowSolution& solution) {
  double worst = 0.0;
  for (BusId j : orientation.bfs_order) {
    const BusId i = orientation.parent[idx(j)];
    if (i == kNoParent) continue;
    const Branch& br = grid.branches()[orientation.parent_branch[idx(j)]];
    double p = 0.0;
    double q = 0.0;
    accumulate_flow(grid, orientation, scenario, solution.v_sq, solution.p_flow,
                    solution.q_flow, j, p, q);
    const double v_sq = squared_drop(br, solution.v_sq[idx(i)], solution.p_flow[idx(j)],
                                     solution.q_flow[idx(j)]);
    worst = std::max({worst, std::abs(p - solution.p_flow[idx(j)]),
                      std::abs(q - solution.q_flow[idx(j)]),
                      std::abs(v_sq - solution.v_sq[idx(j)])});
  }
  return worst;
}

VoltageState ac_oracle_solve(const RadialGrid& grid, const Orientation& orientation,
                             const Scenario& scenario, const SolverOptions& opts) {
  opts.validate();
  check_scenario(grid, scenario);
  using cplx = std::complex<double>;
  const std::size_t n = grid.size();

  // Solve in a frame where the slack angle is zero; rotate back at the end.
  std::vector<cplx> v(n, cplx{scenario.slack_vm, 0.0});
  std::vector<cplx> current(n, cplx{0.0, 0.0});

  const auto to_state = [&] {
    VoltageState st = VoltageState::flat(n, scenario.slack_vm, scenario.slack_va_deg);
    for (std::size_t j = 0; j < n; ++j) {
      if (orientation.parent[j] == kNoParent) continue;
      st.vm[j] = std::abs(v[j]);
      st.va_deg[j] = scenario.slack_va_deg + std::arg(v[j]) * kRadToDeg;
    }
    return st;
  };

  double delta = 0.0;
  int it = 1;
  for (; it <= opts.max_iter; ++it) {
    // Backward: branch current into j = load current at j + downstream currents.
    for (auto r = orientation.bfs_order.rbegin(); r != orientation.bfs_order.rend(); ++r) {
      const std::size_t j = idx(*r);
      if (orientation.parent[j] == kNoParent) continue;
      const cplx s_inj{scenario.p_inj[j], scenario.q_inj[j]};
      cplx i_branch = -std::conj(s_inj / v[j]);
      for (BusId k : orientation.children[j]) i_branch += current[idx(k)];
      current[j] = i_branch;
    }
    // Forward: V_child = V_parent - z I.
    delta = 0.0;
    bool finite = true;
    for (BusId jb : orientation.bfs_order) {
      const std::size_t j = idx(jb);
      const BusId i = orientation.parent[j];
      if (i == kNoParent) continue;
      const Branch& br = grid.branches()[orientation.parent_branch[j]];
      const cplx next = v[idx(i)] - cplx{br.r, br.x} * current[j];
      if (!std::isfinite(next.real()) || !std::isfinite(next.imag()) || std::abs(next) < 1e-6) {
        finite = false;
        break;
      }
      delta = std::max(delta, std::abs(next - v[j]));
      v[j] = next;
    }
    if (!finite) break;
    if (delta < opts.tol) return to_state();
  }
  throw NonConvergenceError("AC sweep did not converge in " +
                                std::to_string(std::min(it, opts.max_iter)) +
                                " iterations (last max |dV| = " + std::to_string(delta) + ")",
                            to_state(), delta, std::min(it, opts.max_iter));
}

}  // namespace boostrpf
