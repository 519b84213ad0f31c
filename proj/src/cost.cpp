#include "layercast/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace layercast {

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::utilization:
      return "utilization";
  }
  return "unknown";
}

CostKind cost_kind_from_string(std::string_view name) {
  if (name == "utilization") return CostKind::utilization;
  throw std::invalid_argument("unknown cost family '" + std::string(name) + "'");
}

namespace {

void check_domain(const CostCurve& curve, double b) {
  if (!(curve.capacity > 0.0)) {
    throw std::domain_error("cost curve capacity must be positive");
  }
  if (b < 0.0 || b >= curve.capacity) {
    throw std::domain_error("bandwidth " + std::to_string(b) + " outside [0, " +
                            std::to_string(curve.capacity) + ")");
  }
}

}  // namespace

double streaming_cost(const CostCurve& curve, double b) {
  check_domain(curve, b);
  switch (curve.kind) {
    case CostKind::utilization:
      return b / (curve.capacity - b);
  }
  throw std::logic_error("unhandled cost family");
}

double marginal_streaming_cost(const CostCurve& curve, double b) {
  check_domain(curve, b);
  switch (curve.kind) {
    case CostKind::utilization: {
      const double gap = curve.capacity - b;
      return curve.capacity / (gap * gap);
    }
  }
  throw std::logic_error("unhandled cost family");
}

double inverse_marginal(const CostCurve& curve, double price, double level) {
  const double x = curve.capacity;
  if (!(x > 0.0)) return 0.0;
  switch (curve.kind) {
    case CostKind::utilization: {
      const double excess = level - price;
      if (excess <= 1.0 / x) return 0.0;
      const double b = x - std::sqrt(x / excess);
      return std::clamp(b, 0.0, curve.usable());
    }
  }
  throw std::logic_error("unhandled cost family");
}

}  // namespace layercast
