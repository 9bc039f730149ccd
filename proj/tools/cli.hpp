#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace boostrpf::cli {

/// Runs one command line (program name excluded). Results are written under
/// --out; `out` receives a one-line JSON summary and `err` a JSON error
/// record. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

enum class SplitMode { Scenarios, Grids };

std::string_view to_string(SplitMode mode);

struct GridSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Partitions the scenario indices of every grid. `ratios` are train, val
/// and test weights, normalised to sum to 1. In Grids mode grid `test_grid`
/// goes entirely to test and the others are split train/val in proportion.
/// Each partition is sorted. Throws Error{BadConfig}.
std::vector<GridSplit> make_split(const std::vector<std::size_t>& sample_counts, SplitMode mode,
                                  const std::array<double, 3>& ratios, std::size_t test_grid,
                                  std::uint64_t seed);

}  // namespace boostrpf::cli
