#pragma once

#include <vector>

#include <boostrpf/datagen.hpp>
#include <boostrpf/grid.hpp>
#include <boostrpf/paths.hpp>
#include <boostrpf/rng.hpp>

namespace fixtures {

using namespace boostrpf;

inline GridData bare(int n) {
  GridData g;
  g.slack_id = 0;
  for (int i = 0; i < n; ++i) g.buses.push_back({i, i == 0 ? BusKind::Slack : BusKind::PQ, {}});
  return g;
}

inline RadialGrid two_bus(double r = 0.01, double x = 0.01) {
  GridData g = bare(2);
  g.branches.push_back({0, 1, r, x});
  return validate_grid(g);
}

/// slack - 1 - 2 - ... - (n-1)
inline RadialGrid chain(int n, double r = 0.01, double x = 0.005) {
  GridData g = bare(n);
  for (int i = 1; i < n; ++i) g.branches.push_back({i - 1, i, r, x});
  return validate_grid(g);
}

/// Slack in the centre, every other bus attached directly.
inline RadialGrid star(int n, double r = 0.01, double x = 0.005) {
  GridData g = bare(n);
  for (int i = 1; i < n; ++i) g.branches.push_back({0, i, r, x});
  return validate_grid(g);
}

inline RadialGrid random_grid(int n, std::uint64_t seed) {
  GridGenConfig c;
  c.n_buses = n;
  c.seed = seed;
  return gen_grid(c);
}

inline Scenario zero_scenario(const RadialGrid& g) {
  Scenario s;
  s.p_inj.assign(g.size(), 0.0);
  s.q_inj.assign(g.size(), 0.0);
  return s;
}

inline Scenario uniform_load(const RadialGrid& g, double p, double q) {
  Scenario s = zero_scenario(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (static_cast<BusId>(i) == g.slack()) continue;
    s.p_inj[i] = -p;
    s.q_inj[i] = -q;
  }
  return s;
}

/// Random loads and some generation, roughly `scale` p.u. per bus.
inline Scenario random_scenario(const RadialGrid& g, std::uint64_t seed, double scale = 0.005) {
  Rng rng(seed);
  Scenario s = zero_scenario(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (static_cast<BusId>(i) == g.slack()) continue;
    s.p_inj[i] = scale * rng.uniform(-1.0, 0.4);
    s.q_inj[i] = scale * rng.uniform(-0.5, 0.1);
  }
  return s;
}

}  // namespace fixtures
