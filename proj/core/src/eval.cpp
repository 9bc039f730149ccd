#include "boostrpf/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "boostrpf/error.hpp"
#include "boostrpf/rng.hpp"

namespace boostrpf {

namespace {

void check_aligned(const RadialGrid& grid, std::span<const VoltageState> predictions,
                   std::span<const VoltageState> truths) {
  if (predictions.empty()) throw Error(ErrorCode::EmptyInput, "no samples to score");
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and truth lists differ in length");
  }
  const std::size_t n = grid.size();
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const auto& p = predictions[s];
    const auto& t = truths[s];
    if (p.vm.size() != n || p.va_deg.size() != n || t.vm.size() != n || t.va_deg.size() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "sample " + std::to_string(s) + " does not match the grid size");
    }
  }
}

struct SquaredSums {
  double vm = 0.0;
  double va = 0.0;
  std::size_t count = 0;
};

}  // namespace

RmsePair rmse(const RadialGrid& grid, std::span<const VoltageState> predictions,
              std::span<const VoltageState> truths, const RmseOptions& options) {
  check_aligned(grid, predictions, truths);
  SquaredSums acc;
  const auto slack = static_cast<std::size_t>(grid.slack());
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      if (b == slack && !options.include_slack) continue;
      const double dv = predictions[s].vm[b] - truths[s].vm[b];
      const double da = predictions[s].va_deg[b] - truths[s].va_deg[b];
      acc.vm += dv * dv;
      acc.va += da * da;
      ++acc.count;
    }
  }
  if (acc.count == 0) throw Error(ErrorCode::EmptyInput, "no buses left to score");
  const double n = static_cast<double>(acc.count);
  return {std::sqrt(acc.vm / n), std::sqrt(acc.va / n)};
}

std::vector<HopError> per_hop_profile(const RadialGrid& grid, const Orientation& orientation,
                                      std::span<const VoltageState> predictions,
                                      std::span<const VoltageState> truths,
                                      const RmseOptions& options) {
  check_aligned(grid, predictions, truths);
  const int first = options.include_slack ? 0 : 1;
  const int last = orientation.max_depth();
  std::vector<SquaredSums> buckets(static_cast<std::size_t>(std::max(0, last - first + 1)));
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    for (std::size_t b = 0; b < grid.size(); ++b) {
      const int d = orientation.depth[b];
      if (d < first) continue;
      auto& bucket = buckets[static_cast<std::size_t>(d - first)];
      const double dv = predictions[s].vm[b] - truths[s].vm[b];
      const double da = predictions[s].va_deg[b] - truths[s].va_deg[b];
      bucket.vm += dv * dv;
      bucket.va += da * da;
      ++bucket.count;
    }
  }
  std::vector<HopError> out;
  out.reserve(buckets.size());
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    const auto& b = buckets[k];
    const double n = static_cast<double>(std::max<std::size_t>(b.count, 1));
    out.push_back({first + static_cast<int>(k), std::sqrt(b.vm / n), std::sqrt(b.va / n), b.count});
  }
  return out;
}

RmsePair pooled_from_hops(std::span<const HopError> hops) {
  double vm = 0.0, va = 0.0;
  std::size_t count = 0;
  for (const HopError& h : hops) {
    const double c = static_cast<double>(h.count);
    vm += c * h.rmse_vm * h.rmse_vm;
    va += c * h.rmse_va * h.rmse_va;
    count += h.count;
  }
  if (count == 0) throw Error(ErrorCode::EmptyInput, "per-hop table is empty");
  return {std::sqrt(vm / static_cast<double>(count)), std::sqrt(va / static_cast<double>(count))};
}

EvalReport evaluate(const RadialGrid& grid, const Orientation& orientation,
                    std::span<const VoltageState> predictions,
                    std::span<const VoltageState> truths, const RmseOptions& options) {
  const RmsePair pooled = rmse(grid, predictions, truths, options);
  EvalReport report;
  report.rmse_vm = pooled.vm;
  report.rmse_va = pooled.va;
  report.per_hop = per_hop_profile(grid, orientation, predictions, truths, options);
  report.n_samples = predictions.size();
  report.n_buses = grid.size();
  return report;
}

EvalReport merge_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no reports to merge");
  std::vector<SquaredSums> by_depth;
  int first = reports.front().per_hop.empty() ? 1 : reports.front().per_hop.front().depth;
  EvalReport out;
  out.method = reports.front().method;
  for (const EvalReport& r : reports) {
    for (const HopError& h : r.per_hop) {
      first = std::min(first, h.depth);
      const auto k = static_cast<std::size_t>(h.depth);
      if (by_depth.size() <= k) by_depth.resize(k + 1);
      const double c = static_cast<double>(h.count);
      by_depth[k].vm += c * h.rmse_vm * h.rmse_vm;
      by_depth[k].va += c * h.rmse_va * h.rmse_va;
      by_depth[k].count += h.count;
    }
    out.n_samples += r.n_samples;
    out.n_buses += r.n_buses;
  }
  for (std::size_t k = static_cast<std::size_t>(std::max(first, 0)); k < by_depth.size(); ++k) {
    const auto& b = by_depth[k];
    const double n = static_cast<double>(std::max<std::size_t>(b.count, 1));
    out.per_hop.push_back({static_cast<int>(k), std::sqrt(b.vm / n), std::sqrt(b.va / n), b.count});
  }
  const RmsePair pooled = pooled_from_hops(out.per_hop);
  out.rmse_vm = pooled.vm;
  out.rmse_va = pooled.va;
  return out;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json hops = nlohmann::json::array();
  for (const HopError& h : report.per_hop) {
    hops.push_back({{"depth", h.depth}, {"rmse_vm", h.rmse_vm}, {"rmse_va", h.rmse_va},
                    {"count", h.count}});
  }
  nlohmann::json doc{{"rmse_vm", report.rmse_vm},
                     {"rmse_va", report.rmse_va},
                     {"per_hop", std::move(hops)},
                     {"n_samples", report.n_samples},
                     {"n_buses", report.n_buses}};
  if (!report.method.empty()) doc["method"] = report.method;
  return doc;
}

std::string per_hop_csv(std::span<const HopError> hops) {
  std::ostringstream os;
  os.precision(17);
  os << "depth,rmse_vm,rmse_va,count\n";
  for (const HopError& h : hops) {
    os << h.depth << ',' << h.rmse_vm << ',' << h.rmse_va << ',' << h.count << '\n';
  }
  return os.str();
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "fit_line: x and y differ");
  if (x.size() < 2) throw Error(ErrorCode::EmptyInput, "fit_line needs two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::BadConfig, "fit_line: all x values coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A perfectly flat response is fitted exactly.
  fit.r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

void ScalingOptions::validate() const {
  if (grid_sizes.size() < 3) throw Error(ErrorCode::BadConfig, "scaling study needs >= 3 grid sizes");
  std::set<int> distinct(grid_sizes.begin(), grid_sizes.end());
  if (distinct.size() != grid_sizes.size()) {
    throw Error(ErrorCode::BadConfig, "scaling study grid sizes must be distinct");
  }
  if (*distinct.begin() < 2) throw Error(ErrorCode::BadConfig, "grid sizes must be >= 2");
  if (scenarios_per_size < 1 || repetitions < 1 || warmups < 0) {
    throw Error(ErrorCode::BadConfig, "scenarios_per_size and repetitions must be >= 1");
  }
}

ScalingReport scaling_study(const InferenceFn& infer, const ScalingOptions& options) {
  options.validate();
  using clock = std::chrono::steady_clock;
  ScalingReport report;
  std::vector<double> xs, ys;
  for (int n : options.grid_sizes) {
    GridGenConfig gc = options.grid_config;
    gc.n_buses = n;
    gc.seed = Rng::mix(options.seed ^ static_cast<std::uint64_t>(n));
    const RadialGrid grid = gen_grid(gc);
    ScenarioGenConfig sc = options.scenario_config;
    sc.seed = Rng::mix(gc.seed + 1);
    const ScenarioGenerator gen(grid, sc);

    std::vector<double> medians;
    for (int s = 0; s < options.scenarios_per_size; ++s) {
      const Scenario scenario = gen.draw(static_cast<std::uint64_t>(s));
      for (int w = 0; w < options.warmups; ++w) (void)infer(grid, scenario);
      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(options.repetitions));
      for (int r = 0; r < options.repetitions; ++r) {
        if (options.on_measure_begin) options.on_measure_begin();
        const auto t0 = clock::now();
        const VoltageState out = infer(grid, scenario);
        const auto t1 = clock::now();
        if (options.on_measure_end) options.on_measure_end();
        if (out.size() != grid.size()) {
          throw Error(ErrorCode::DimensionMismatch, "timed inference returned the wrong size");
        }
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      const auto mid = times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2);
      std::nth_element(times.begin(), mid, times.end());
      double median = *mid;
      if (times.size() % 2 == 0) median = 0.5 * (median + *std::max_element(times.begin(), mid));
      medians.push_back(median);
    }
    const double k = static_cast<double>(medians.size());
    const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) / k;
    double var = 0.0;
    for (double m : medians) var += (m - mean) * (m - mean);
    const double sd = medians.size() > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
    report.points.push_back({n, mean, sd});
    xs.push_back(static_cast<double>(n));
    ys.push_back(mean);
  }
  report.linear_fit = fit_line(xs, ys);
  return report;
}

bool slope_negligible(const ScalingReport& report, double fraction) {
  if (report.points.empty()) return false;
  auto [lo, hi] = std::minmax_element(report.points.begin(), report.points.end(),
                                      [](const auto& a, const auto& b) { return a.n_buses < b.n_buses; });
  double mean = 0.0;
  for (const auto& p : report.points) mean += p.mean_ms;
  mean /= static_cast<double>(report.points.size());
  return std::abs(report.linear_fit.slope) * (hi->n_buses - lo->n_buses) <= fraction * mean;
}

nlohmann::json to_json(const ScalingReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) {
    points.push_back({{"n_buses", p.n_buses}, {"mean_ms", p.mean_ms}, {"std_ms", p.std_ms}});
  }
  return {{"points", std::move(points)},
          {"linear_fit",
           {{"slope", report.linear_fit.slope},
            {"intercept", report.linear_fit.intercept},
            {"r2", report.linear_fit.r2}}}};
}

std::string scaling_csv(const ScalingReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "n_buses,mean_ms,std_ms\n";
  for (const auto& p : report.points) os << p.n_buses << ',' << p.mean_ms << ',' << p.std_ms << '\n';
  return os.str();
}

}  // namespace boostrpf
