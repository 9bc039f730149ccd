#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

#include <boostrpf/analytical.hpp>
#include <boostrpf/error.hpp>

#include "fixtures.hpp"

using namespace boostrpf;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(const GridData& g) {
  try {
    (void)validate_grid(g);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("grid was accepted");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("validate_grid accepts the minimal tree", "[grid]") {
  const RadialGrid g = fixtures::two_bus();
  CHECK(g.size() == 2);
  CHECK(g.branches().size() == 1);
  CHECK(g.slack() == 0);
}

TEST_CASE("validate_grid rejects non-trees", "[grid]") {
  GridData triangle = fixtures::bare(3);
  triangle.branches = {{0, 1, 0.01, 0.01}, {1, 2, 0.01, 0.01}, {2, 0, 0.01, 0.01}};
  CHECK(code_of(triangle) == ErrorCode::NotATree);

  GridData split = fixtures::bare(4);
  split.branches = {{0, 1, 0.01, 0.01}, {2, 3, 0.01, 0.01}};
  CHECK(code_of(split) == ErrorCode::NotATree);

  // Right branch count, but one cycle and one isolated bus.
  GridData loop = fixtures::bare(4);
  loop.branches = {{0, 1, 0.01, 0.01}, {1, 2, 0.01, 0.01}, {2, 0, 0.01, 0.01}};
  CHECK(code_of(loop) == ErrorCode::NotATree);
}

TEST_CASE("validate_grid checks slack count and branch endpoints", "[grid]") {
  GridData none = fixtures::bare(2);
  none.buses[0].kind = BusKind::PQ;
  none.branches = {{0, 1, 0.01, 0.01}};
  CHECK(code_of(none) == ErrorCode::NoSlack);

  GridData two = fixtures::bare(2);
  two.buses[1].kind = BusKind::Slack;
  two.branches = {{0, 1, 0.01, 0.01}};
  CHECK(code_of(two) == ErrorCode::MultipleSlack);

  GridData dangling = fixtures::bare(2);
  dangling.branches = {{0, 7, 0.01, 0.01}};
  CHECK(code_of(dangling) == ErrorCode::DanglingBranch);

  GridData self = fixtures::bare(2);
  self.branches = {{1, 1, 0.01, 0.01}};
  CHECK(code_of(self) == ErrorCode::DanglingBranch);

  GridData zero = fixtures::bare(2);
  zero.branches = {{0, 1, 0.0, 0.0}};
  CHECK(code_of(zero) == ErrorCode::InvalidBranch);

  GridData negative = fixtures::bare(2);
  negative.branches = {{0, 1, -0.01, 0.01}};
  CHECK(code_of(negative) == ErrorCode::InvalidBranch);

  GridData gap = fixtures::bare(2);
  gap.buses[1].id = 5;
  gap.branches = {{0, 5, 0.01, 0.01}};
  CHECK(code_of(gap) == ErrorCode::InvalidBusIds);
}

TEST_CASE("validate_grid sorts buses and neighbours", "[grid]") {
  GridData g = fixtures::bare(4);
  std::swap(g.buses[1], g.buses[3]);
  g.branches = {{0, 3, 0.01, 0.01}, {0, 1, 0.01, 0.01}, {2, 0, 0.01, 0.01}};
  const RadialGrid grid = validate_grid(g);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid.buses()[i].id == static_cast<BusId>(i));
  const auto nb = grid.neighbors(0);
  REQUIRE(nb.size() == 3);
  CHECK(nb[0].bus == 1);
  CHECK(nb[1].bus == 2);
  CHECK(nb[2].bus == 3);
  CHECK(grid.branches()[nb[0].branch].to == 1);
}

TEST_CASE("random grids keep the tree property", "[grid]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RadialGrid g = fixtures::random_grid(10 + static_cast<int>(seed) * 6, seed);
    CHECK(g.branches().size() + 1 == g.size());
  }
}

TEST_CASE("power mismatch vanishes at the flat zero-injection state", "[grid]") {
  const RadialGrid g = fixtures::random_grid(40, 3);
  const auto m = power_mismatch(g, fixtures::zero_scenario(g), VoltageState::flat(g.size(), 1.0, 0.0));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(m.dp[i]) < 1e-12);
    CHECK(std::abs(m.dq[i]) < 1e-12);
  }
}

TEST_CASE("power mismatch matches a hand-built two-bus admittance evaluation", "[grid]") {
  const double r = 0.01, x = 0.01;
  const RadialGrid g = fixtures::two_bus(r, x);
  Scenario s = fixtures::zero_scenario(g);
  s.p_inj = {0.07, -0.1};
  s.q_inj = {0.02, -0.05};
  VoltageState v{{1.01, 0.985}, {0.3, -0.4}};

  // Y = [[y, -y], [-y, y]], y = 1 / (r + jx) = (r - jx) / (r^2 + x^2).
  const double den = r * r + x * x;
  const double gs = r / den, bs = -x / den;
  const double G[2][2] = {{gs, -gs}, {-gs, gs}};
  const double B[2][2] = {{bs, -bs}, {-bs, bs}};
  const double rad = std::numbers::pi / 180.0;
  for (int i = 0; i < 2; ++i) {
    double p = 0.0, q = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double th = (v.va_deg[i] - v.va_deg[j]) * rad;
      p += v.vm[j] * (G[i][j] * std::cos(th) + B[i][j] * std::sin(th));
      q += v.vm[j] * (G[i][j] * std::sin(th) - B[i][j] * std::cos(th));
    }
    p *= v.vm[i];
    q *= v.vm[i];
    const auto m = power_mismatch(g, s, v);
    CHECK_THAT(m.dp[i], WithinAbs(s.p_inj[i] - p, 1e-9));
    CHECK_THAT(m.dq[i], WithinAbs(s.q_inj[i] - q, 1e-9));
  }
}

TEST_CASE("power mismatch is invariant under consistent relabelling", "[grid]") {
  const RadialGrid g = fixtures::random_grid(25, 11);
  const Scenario s = fixtures::random_scenario(g, 5);
  const Orientation o = orient(g);
  const VoltageState v = ac_oracle_solve(g, o, s);
  const auto base = power_mismatch(g, s, v);

  const std::size_t n = g.size();
  std::vector<BusId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(99);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

  GridData d;
  d.slack_id = perm[static_cast<std::size_t>(g.slack())];
  for (const Bus& b : g.buses()) d.buses.push_back({perm[static_cast<std::size_t>(b.id)], b.kind, {}});
  for (const Branch& br : g.branches()) {
    d.branches.push_back({perm[static_cast<std::size_t>(br.to)], perm[static_cast<std::size_t>(br.from)], br.r, br.x});
  }
  const RadialGrid h = validate_grid(d);
  Scenario s2 = s;
  VoltageState v2 = v;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(perm[i]);
    s2.p_inj[k] = s.p_inj[i];
    s2.q_inj[k] = s.q_inj[i];
    v2.vm[k] = v.vm[i];
    v2.va_deg[k] = v.va_deg[i];
  }
  const auto moved = power_mismatch(h, s2, v2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(perm[i]);
    CHECK_THAT(moved.dp[k], WithinAbs(base.dp[i], 1e-12));
    CHECK_THAT(moved.dq[k], WithinAbs(base.dq[i], 1e-12));
  }
}

TEST_CASE("power mismatch rejects misaligned inputs", "[grid]") {
  const RadialGrid g = fixtures::chain(4);
  const Scenario s = fixtures::zero_scenario(g);
  CHECK_THROWS_AS(power_mismatch(g, s, VoltageState::flat(3, 1.0, 0.0)), Error);
  Scenario short_s = s;
  short_s.p_inj.pop_back();
  try {
    (void)power_mismatch(g, short_s, VoltageState::flat(4, 1.0, 0.0));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
