#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <boostrpf/analytical.hpp>
#include <boostrpf/error.hpp>

#include "fixtures.hpp"

using namespace boostrpf;
using Catch::Matchers::WithinAbs;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool is_flat(const VoltageState& v, double vm, double va) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v.vm[i] != vm || v.va_deg[i] != va) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("LinDistFlow step", "[analytical]") {
  const BusVoltage same = lindistflow_step({1.02, -0.7, 0.03, 0.01, 0.0, 0.0, 1.0});
  CHECK(same.vm == 1.02);
  CHECK(same.va_deg == -0.7);

  const BusVoltage v = lindistflow_step({1.0, 0.0, 0.01, 0.01, 0.1, 0.05, 1.0});
  CHECK_THAT(v.vm, WithinAbs(0.9985, 1e-12));
  CHECK_THAT(v.va_deg, WithinAbs(-0.0005 * 180.0 / std::numbers::pi, 1e-12));
  CHECK_THAT(v.va_deg, WithinAbs(-0.02865, 1e-5));
}

TEST_CASE("LinDistFlow sweep", "[analytical]") {
  const RadialGrid z = fixtures::random_grid(30, 1);
  Scenario zs = fixtures::zero_scenario(z);
  zs.slack_vm = 1.03;
  zs.slack_va_deg = 0.5;
  CHECK(is_flat(lindistflow_solve(z, orient(z), zs), 1.03, 0.5));

  const RadialGrid two = fixtures::two_bus();
  Scenario s = fixtures::zero_scenario(two);
  s.p_inj[1] = -0.1;
  s.q_inj[1] = -0.05;
  const VoltageState v = lindistflow_solve(two, orient(two), s);
  const BusVoltage step = lindistflow_step({1.0, 0.0, 0.01, 0.01, 0.1, 0.05, 1.0});
  CHECK(v.vm[1] == step.vm);
  CHECK(v.va_deg[1] == step.va_deg);
}

TEST_CASE("LinDistFlow on a uniform chain matches a cumulative hand recurrence", "[analytical]") {
  const int n = 10;
  const double r = 0.02, x = 0.01, p = 0.003, q = 0.001, v0 = 1.01;
  const RadialGrid g = fixtures::chain(n, r, x);
  Scenario s = fixtures::uniform_load(g, p, q);
  s.slack_vm = v0;
  const VoltageState v = lindistflow_solve(g, orient(g), s);

  // Bus k carries the demand of buses k..n-1.
  double vm = v0, va = 0.0;
  for (int k = 1; k < n; ++k) {
    const double carried = n - k;
    vm -= (r * p * carried + x * q * carried) / v0;
    va -= (x * p * carried - r * q * carried) / (v0 * v0) * 180.0 / std::numbers::pi;
    CHECK_THAT(v.vm[static_cast<std::size_t>(k)], WithinAbs(vm, 1e-13));
    CHECK_THAT(v.va_deg[static_cast<std::size_t>(k)], WithinAbs(va, 1e-12));
  }
}

TEST_CASE("DistFlow: flat fixed point and light-load agreement", "[analytical]") {
  const RadialGrid g = fixtures::random_grid(40, 2);
  const Orientation o = orient(g);
  const DistFlowSolution z = distflow_solve(g, o, fixtures::zero_scenario(g));
  CHECK(z.iterations == 1);
  CHECK(is_flat(z.state, 1.0, 0.0));

  const RadialGrid two = fixtures::two_bus();
  Scenario s = fixtures::zero_scenario(two);
  s.p_inj[1] = -8e-5;
  s.q_inj[1] = -6e-5;  // |S| = 1e-4
  const auto d = distflow_solve(two, orient(two), s);
  const auto l = lindistflow_solve(two, orient(two), s);
  CHECK(std::abs(d.state.vm[1] - l.vm[1]) < 1e-7);
}

TEST_CASE("DistFlow re-satisfies its own equations", "[analytical]") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RadialGrid g = fixtures::random_grid(20 + 10 * static_cast<int>(seed), seed);
    const Orientation o = orient(g);
    const Scenario s = fixtures::random_scenario(g, seed);
    SolverOptions opts;
    const auto sol = distflow_solve(g, o, s, opts);
    CHECK(sol.iterations <= opts.max_iter);
    CHECK(distflow_residual(g, o, s, sol) < opts.tol);
  }
}

TEST_CASE("DistFlow reports non-convergence with its last iterate", "[analytical]") {
  const RadialGrid g = fixtures::chain(30, 0.03, 0.01);
  const Scenario s = fixtures::uniform_load(g, 0.01, 0.004);
  SolverOptions opts;
  opts.max_iter = 1;
  try {
    (void)distflow_solve(g, orient(g), s, opts);
    FAIL("converged in one sweep");
  } catch (const NonConvergenceError& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
    CHECK(e.iterations() == 1);
    CHECK(e.last_iterate().size() == g.size());
    CHECK(e.residual() > 0.0);
  }

  // Demand far beyond the feeder's transfer limit has no solution.
  const Scenario heavy = fixtures::uniform_load(g, 2.0, 1.0);
  CHECK_THROWS_AS(distflow_solve(g, orient(g), heavy), NonConvergenceError);
  CHECK_THROWS_AS(ac_oracle_solve(g, orient(g), heavy), NonConvergenceError);

  SolverOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(distflow_solve(g, orient(g), s, bad), Error);
}

TEST_CASE("AC oracle: flat start and two-bus mismatch", "[analytical]") {
  const RadialGrid g = fixtures::random_grid(25, 5);
  CHECK(is_flat(ac_oracle_solve(g, orient(g), fixtures::zero_scenario(g)), 1.0, 0.0));

  const RadialGrid two = fixtures::two_bus(0.01, 0.01);
  Scenario s = fixtures::zero_scenario(two);
  s.p_inj[1] = -0.1;
  s.q_inj[1] = -0.05;
  const VoltageState v = ac_oracle_solve(two, orient(two), s);
  const auto m = power_mismatch(two, s, v);
  CHECK(std::abs(m.dp[1]) < 1e-10);
  CHECK(std::abs(m.dq[1]) < 1e-10);
  CHECK(v.vm[0] == 1.0);
  CHECK(v.va_deg[0] == 0.0);
}

TEST_CASE("AC oracle keeps the slack values and solves on rotated references", "[analytical]") {
  const RadialGrid g = fixtures::random_grid(30, 6);
  const Orientation o = orient(g);
  Scenario s = fixtures::random_scenario(g, 6);
  const VoltageState base = ac_oracle_solve(g, o, s);
  s.slack_va_deg = 12.5;
  const VoltageState rotated = ac_oracle_solve(g, o, s);
  CHECK(rotated.va_deg[0] == 12.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK_THAT(rotated.vm[i], WithinAbs(base.vm[i], 1e-12));
    CHECK_THAT(rotated.va_deg[i], WithinAbs(base.va_deg[i] + 12.5, 1e-9));
  }
  CHECK(power_mismatch(g, s, rotated).max_abs_pq(g) < 1e-8);
}

TEST_CASE("AC oracle is self-consistent on random grids", "[analytical]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const int n = 10 + static_cast<int>(rng.below(121));
    const RadialGrid g = fixtures::random_grid(n, seed);
    const Scenario s = fixtures::random_scenario(g, seed + 7);
    const VoltageState v = ac_oracle_solve(g, orient(g), s);
    CHECK(power_mismatch(g, s, v).max_abs_pq(g) < 1e-8);
  }
}

TEST_CASE("DistFlow tracks the AC oracle on a moderately loaded 50-bus tree", "[analytical]") {
  const RadialGrid g = fixtures::random_grid(50, 31);
  const Orientation o = orient(g);
  const Scenario s = fixtures::random_scenario(g, 32);
  const VoltageState ac = ac_oracle_solve(g, o, s);
  const auto df = distflow_solve(g, o, s);
  CHECK(max_abs_diff(ac.vm, df.state.vm) < 1e-3);
}

TEST_CASE("LinDistFlow error is second order in the loading", "[analytical]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RadialGrid g = fixtures::random_grid(40 + static_cast<int>(seed), seed + 50);
    const Orientation o = orient(g);
    const Scenario s = fixtures::random_scenario(g, seed, 0.01);
    Scenario half = s;
    for (auto& v : half.p_inj) v *= 0.5;
    for (auto& v : half.q_inj) v *= 0.5;
    const double full_err = max_abs_diff(ac_oracle_solve(g, o, s).vm, lindistflow_solve(g, o, s).vm);
    const double half_err = max_abs_diff(ac_oracle_solve(g, o, half).vm, lindistflow_solve(g, o, half).vm);
    CHECK(full_err > 2.0 * half_err);
  }
}

TEST_CASE("Voltage falls monotonically along a loaded chain", "[analytical]") {
  const RadialGrid g = fixtures::chain(25, 0.02, 0.008);
  const Orientation o = orient(g);
  const Scenario s = fixtures::uniform_load(g, 0.002, 0.0008);
  const VoltageState solutions[] = {lindistflow_solve(g, o, s), distflow_solve(g, o, s).state,
                                    ac_oracle_solve(g, o, s)};
  for (const VoltageState& v : solutions) {
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(v.vm[k] <= v.vm[k - 1]);
  }
}
