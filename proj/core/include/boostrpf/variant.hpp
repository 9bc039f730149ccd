#pragma once

#include <optional>
#include <string_view>

namespace boostrpf {

/// What the regressor is trained to output for a child bus.
enum class Variant {
  Absolute,         ///< the child state itself
  ParentResidual,   ///< drop from the parent state: parent - child
  PhysicsResidual,  ///< deviation from the LinDistFlow estimate: ldf - child
};

/// File/CLI names: "absolute", "parent", "ldf".
std::string_view to_string(Variant variant);
std::optional<Variant> parse_variant(std::string_view name);

/// Magnitude (p.u.) and angle (degrees) of one bus.
struct BusVoltage {
  double vm = 0.0;
  double va_deg = 0.0;

  friend bool operator==(const BusVoltage&, const BusVoltage&) = default;
};

BusVoltage make_target(Variant variant, BusVoltage truth_child, BusVoltage parent,
                       BusVoltage ldf);

/// Inverse of make_target: turns a model output back into a child state.
BusVoltage reconstruct(Variant variant, BusVoltage prediction, BusVoltage parent,
                       BusVoltage ldf);

}  // namespace boostrpf
