#pragma once

#include <vector>

#include "boostrpf/error.hpp"
#include "boostrpf/grid.hpp"
#include "boostrpf/paths.hpp"
#include "boostrpf/variant.hpp"

namespace boostrpf {

struct LdfStepInput {
  double v_parent = 1.0;          // p.u.
  double theta_parent_deg = 0.0;  // degrees
  double r = 0.0;                 // p.u.
  double x = 0.0;                 // p.u.
  double p_agg = 0.0;             // p.u., downstream demand
  double q_agg = 0.0;             // p.u., downstream demand
  double v0 = 1.0;                // nominal voltage, p.u.
};

/// One LinDistFlow edge update (linearised magnitude drop and angle shift).
BusVoltage lindistflow_step(const LdfStepInput& in);

/// Angle shift across a branch carrying (p, q), in degrees. Shared by the
/// LinDistFlow step and the DistFlow angle recovery.
double branch_angle_shift_deg(double r, double x, double p, double q, double v_nom);

/// LinDistFlow profile, anchored at the slack and swept once in BFS order
/// with v0 = slack magnitude.
VoltageState lindistflow_solve(const RadialGrid& grid, const Orientation& orientation,
                               const Scenario& scenario);

/// LinDistFlow estimate for every bus taken one step from its *true* parent
/// state. Slack entries copy the truth. Used to build teacher-forced features.
VoltageState teacher_forced_ldf(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario, const Aggregates& aggregates,
                                const VoltageState& truth);

struct SolverOptions {
  double tol = 1e-10;  // max voltage change between sweeps, p.u.
  int max_iter = 100;

  void validate() const;
};

/// Raised when an iterative solver exhausts its budget. Keeps the last
/// iterate so callers can inspect how far it got.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, VoltageState last, double residual,
                      int iterations)
      : Error(ErrorCode::NonConvergence, message),
        last_(std::move(last)),
        residual_(residual),
        iterations_(iterations) {}

  const VoltageState& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  VoltageState last_;
  double residual_;
  int iterations_;
};

/// Converged nonlinear DistFlow state. Branch quantities are indexed by the
/// receiving (child) bus; slack entries are zero.
struct DistFlowSolution {
  VoltageState state;
  std::vector<double> v_sq;    // squared magnitudes
  std::vector<double> p_flow;  // P_ij into child j
  std::vector<double> q_flow;  // Q_ij into child j
  int iterations = 0;
};

DistFlowSolution distflow_solve(const RadialGrid& grid, const Orientation& orientation,
                                const Scenario& scenario, const SolverOptions& opts = {});

/// Largest absolute residual of the three DistFlow relations (squared
/// voltage drop, active and reactive flow balance) at a candidate solution.
double distflow_residual(const RadialGrid& grid, const Orientation& orientation,
                         const Scenario& scenario, const DistFlowSolution& solution);

/// Exact AC forward-backward sweep over complex voltages and branch
/// currents. This is the ground-truth labeller.
VoltageState ac_oracle_solve(const RadialGrid& grid, const Orientation& orientation,
                             const Scenario& scenario, const SolverOptions& opts = {});

}  // namespace boostrpf
