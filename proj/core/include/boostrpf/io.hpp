#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "boostrpf/grid.hpp"
#include "boostrpf/sequential.hpp"
#include "boostrpf/variant.hpp"

namespace boostrpf {

// Document conversions. Readers throw Error{SchemaError}; grid readers also
// raise the validate_grid() codes.
nlohmann::json to_json(const GridData& grid);
nlohmann::json to_json(const RadialGrid& grid);
GridData grid_data_from_json(const nlohmann::json& doc);
RadialGrid grid_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const VoltageState& state);
VoltageState state_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const LabeledSample& sample);
LabeledSample sample_from_json(const nlohmann::json& doc);

/// One compact JSON record per line.
void write_dataset(std::ostream& os, std::span<const LabeledSample> samples);
/// Reads records until EOF; blank lines are skipped. With `grid`, every
/// record is also checked against its size.
std::vector<LabeledSample> read_dataset(std::istream& is, const RadialGrid* grid = nullptr);

/// Columnar edge-sample batch with the grid hash and variant name.
nlohmann::json edge_batch_to_json(const EdgeTable& table, std::string_view grid_hash,
                                  Variant variant);

std::string sha256_hex(std::string_view bytes);
/// Hash of the canonical (compact, key-sorted) grid document.
std::string grid_hash(const RadialGrid& grid);

// File helpers; failures raise Error{IoError}.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
RadialGrid load_grid(const std::filesystem::path& path);
std::vector<LabeledSample> load_dataset(const std::filesystem::path& path,
                                        const RadialGrid* grid = nullptr);
void save_dataset(const std::filesystem::path& path, std::span<const LabeledSample> samples);

}  // namespace boostrpf
