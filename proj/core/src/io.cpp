#include "boostrpf/io.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "boostrpf/error.hpp"

namespace boostrpf {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaError, what);
}

const json& field(const json& doc, const char* key, const char* where) {
  if (!doc.is_object()) schema_error(std::string(where) + " must be a JSON object");
  const auto it = doc.find(key);
  if (it == doc.end()) schema_error(std::string(where) + ": missing '" + key + "'");
  return *it;
}

double number(const json& doc, const char* key, const char* where) {
  const json& v = field(doc, key, where);
  if (!v.is_number()) schema_error(std::string(where) + ": '" + key + "' must be a number");
  return v.get<double>();
}

int integer(const json& doc, const char* key, const char* where) {
  const json& v = field(doc, key, where);
  if (!v.is_number_integer()) schema_error(std::string(where) + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& doc, const char* key, const char* where) {
  const json& v = field(doc, key, where);
  if (!v.is_array()) schema_error(std::string(where) + ": '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) schema_error(std::string(where) + ": '" + key + "' holds a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

json to_json(const GridData& grid) {
  json buses = json::array();
  for (const Bus& b : grid.buses) {
    json rec{{"id", b.id}, {"kind", b.kind == BusKind::Slack ? "slack" : "pq"}};
    if (b.name) rec["name"] = *b.name;
    buses.push_back(std::move(rec));
  }
  json branches = json::array();
  for (const Branch& br : grid.branches) {
    branches.push_back({{"from", br.from}, {"to", br.to}, {"r_pu", br.r}, {"x_pu", br.x}});
  }
  return {{"slack_id", grid.slack_id}, {"buses", std::move(buses)}, {"branches", std::move(branches)}};
}

json to_json(const RadialGrid& grid) { return to_json(grid.data()); }

GridData grid_data_from_json(const json& doc) {
  constexpr const char* where = "grid";
  GridData g;
  g.slack_id = integer(doc, "slack_id", where);
  const json& buses = field(doc, "buses", where);
  const json& branches = field(doc, "branches", where);
  if (!buses.is_array() || !branches.is_array()) schema_error("grid: buses and branches must be arrays");
  for (const json& b : buses) {
    Bus bus;
    bus.id = integer(b, "id", "bus");
    const json& kind = field(b, "kind", "bus");
    if (kind == "slack") {
      bus.kind = BusKind::Slack;
    } else if (kind == "pq") {
      bus.kind = BusKind::PQ;
    } else {
      schema_error("bus: kind must be \"slack\" or \"pq\"");
    }
    if (b.contains("name")) {
      if (!b.at("name").is_string()) schema_error("bus: name must be a string");
      bus.name = b.at("name").get<std::string>();
    }
    g.buses.push_back(std::move(bus));
  }
  for (const json& br : branches) {
    g.branches.push_back(Branch{integer(br, "from", "branch"), integer(br, "to", "branch"),
                                number(br, "r_pu", "branch"), number(br, "x_pu", "branch")});
  }
  return g;
}

RadialGrid grid_from_json(const json& doc) { return validate_grid(grid_data_from_json(doc)); }

json to_json(const Scenario& s) {
  return {{"p_inj_pu", s.p_inj},
          {"q_inj_pu", s.q_inj},
          {"slack_vm_pu", s.slack_vm},
          {"slack_va_deg", s.slack_va_deg}};
}

Scenario scenario_from_json(const json& doc) {
  constexpr const char* where = "scenario";
  Scenario s;
  s.p_inj = numbers(doc, "p_inj_pu", where);
  s.q_inj = numbers(doc, "q_inj_pu", where);
  s.slack_vm = number(doc, "slack_vm_pu", where);
  s.slack_va_deg = number(doc, "slack_va_deg", where);
  if (s.p_inj.size() != s.q_inj.size()) schema_error("scenario: injection arrays differ in length");
  return s;
}

json to_json(const VoltageState& state) { return {{"vm_pu", state.vm}, {"va_deg", state.va_deg}}; }

VoltageState state_from_json(const json& doc) {
  VoltageState s;
  s.vm = numbers(doc, "vm_pu", "state");
  s.va_deg = numbers(doc, "va_deg", "state");
  if (s.vm.size() != s.va_deg.size()) schema_error("state: vm_pu and va_deg differ in length");
  return s;
}

json to_json(const LabeledSample& sample) {
  return {{"scenario", to_json(sample.scenario)}, {"truth", to_json(sample.truth)}};
}

LabeledSample sample_from_json(const json& doc) {
  return {scenario_from_json(field(doc, "scenario", "sample")),
          state_from_json(field(doc, "truth", "sample"))};
}

void write_dataset(std::ostream& os, std::span<const LabeledSample> samples) {
  for (const LabeledSample& s : samples) os << to_json(s).dump() << '\n';
}

std::vector<LabeledSample> read_dataset(std::istream& is, const RadialGrid* grid) {
  std::vector<LabeledSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
    LabeledSample s = sample_from_json(doc);
    if (grid) {
      check_scenario(*grid, s.scenario);
      if (s.truth.size() != grid->size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dataset line " + std::to_string(lineno) + ": truth does not match the grid");
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

json edge_batch_to_json(const EdgeTable& table, std::string_view grid_hash, Variant variant) {
  json features = json::array();
  json targets = json::array();
  for (std::size_t r = 0; r < table.features.rows(); ++r) {
    const auto f = table.features.row(r);
    const auto t = table.targets.row(r);
    features.push_back(std::vector<double>(f.begin(), f.end()));
    targets.push_back(std::vector<double>(t.begin(), t.end()));
  }
  return {{"features", std::move(features)},
          {"targets", std::move(targets)},
          {"meta", {{"grid_hash", std::string(grid_hash)}, {"variant", std::string(to_string(variant))}}}};
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string grid_hash(const RadialGrid& grid) { return sha256_hex(to_json(grid).dump()); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

RadialGrid load_grid(const std::filesystem::path& path) { return grid_from_json(read_json_file(path)); }

std::vector<LabeledSample> load_dataset(const std::filesystem::path& path, const RadialGrid* grid) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_dataset(in, grid);
}

void save_dataset(const std::filesystem::path& path, std::span<const LabeledSample> samples) {
  std::ostringstream os;
  write_dataset(os, samples);
  write_text_file(path, os.str());
}

}  // namespace boostrpf
