#pragma once

#include <string_view>

namespace layercast {

/// Cost families usable behind the streaming-cost operations. Every family
/// must be non-decreasing, strictly convex and twice differentiable on
/// [0, capacity).
enum class CostKind {
  /// E(b) = b / (x - b), the link utilization ratio.
  utilization,
};

std::string_view to_string(CostKind kind);
CostKind cost_kind_from_string(std::string_view name);

/// Streaming cost of one link. `capacity` is the headroom the link still has
/// at the current layer, in kbps.
struct CostCurve {
  double capacity = 0.0;
  CostKind kind = CostKind::utilization;

  /// Largest usable bandwidth, kept strictly below the pole at `capacity`.
  double usable() const { return capacity - kPoleMargin * capacity; }

  static constexpr double kPoleMargin = 1e-6;
};

/// E(b). Throws std::domain_error when b is outside [0, capacity).
double streaming_cost(const CostCurve& curve, double b);

/// E'(b). Throws std::domain_error when b is outside [0, capacity).
double marginal_streaming_cost(const CostCurve& curve, double b);

/// The b >= 0 solving price + E'(b) = level, clamped to [0, usable()].
/// Returns 0 when level <= price + E'(0).
double inverse_marginal(const CostCurve& curve, double price, double level);

}  // namespace layercast
