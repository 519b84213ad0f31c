#pragma once

#include <optional>
#include <vector>

#include "layercast/simulation.hpp"

namespace layercast {

/// Mean over subscribers of layer k of min(1, granted / B_k); nullopt when
/// nobody subscribes to k.
std::optional<double> delivery_ratio(const ScenarioResult& result, int layer);

/// Share of all granted bandwidth that went to layers k >= 1 of peers whose
/// some lower layer k' < k was not delivered at full rate.
double useless_chunk_ratio(const ScenarioResult& result);

/// Per-peer streaming cost: sum over its links of E evaluated on the link's
/// aggregate grant against the link's original capacity.
double peer_streaming_cost(const ScenarioResult& result, int downstream);

/// Mean peer cost over class `class_id` (nullopt: all peers). Empty
/// selection gives nullopt.
std::optional<double> avg_streaming_cost(const ScenarioResult& result,
                                         std::optional<int> class_id = std::nullopt);

struct MetricsReport {
  Mode mode = Mode::proposed;
  std::vector<std::optional<double>> delivery;
  double useless_ratio = 0.0;
  std::optional<double> cost_all;
  std::vector<std::optional<double>> cost_by_class;  // index 0 = class 1
  std::vector<int> class_counts;
  ConvergenceStats convergence;
  bool operator==(const MetricsReport&) const = default;
};

MetricsReport build_report(const ScenarioResult& result);

}  // namespace layercast
