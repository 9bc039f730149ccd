#include "boostrpf/variant.hpp"

namespace boostrpf {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Absolute: return "absolute";
    case Variant::ParentResidual: return "parent";
    case Variant::PhysicsResidual: return "ldf";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "absolute") return Variant::Absolute;
  if (name == "parent") return Variant::ParentResidual;
  if (name == "ldf") return Variant::PhysicsResidual;
  return std::nullopt;
}

BusVoltage make_target(Variant variant, BusVoltage truth_child, BusVoltage parent,
                       BusVoltage ldf) {
  switch (variant) {
    case Variant::Absolute: return truth_child;
    case Variant::ParentResidual:
      return {parent.vm - truth_child.vm, parent.va_deg - truth_child.va_deg};
    case Variant::PhysicsResidual:
      return {ldf.vm - truth_child.vm, ldf.va_deg - truth_child.va_deg};
  }
  return truth_child;
}

BusVoltage reconstruct(Variant variant, BusVoltage prediction, BusVoltage parent,
                       BusVoltage ldf) {
  switch (variant) {
    case Variant::Absolute: return prediction;
    case Variant::ParentResidual:
      return {parent.vm - prediction.vm, parent.va_deg - prediction.va_deg};
    case Variant::PhysicsResidual:
      return {ldf.vm - prediction.vm, ldf.va_deg - prediction.va_deg};
  }
  return prediction;
}

}  // namespace boostrpf
