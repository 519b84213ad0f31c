#pragma once

#include <string>
#include <vector>

#include "layercast/config.hpp"
#include "layercast/metrics.hpp"
#include "layercast/overlay.hpp"
#include "layercast/simulation.hpp"

namespace layercast {

/// Overlay <-> JSON: {"seed", "layer_spec": {"rates_kbps"}, "classes",
/// "upstreams", "downstreams", "links"}. Bandwidth travels as integer tenths
/// of a kbps so a replay is bit-exact.
std::string overlay_to_json(const Overlay& overlay);
Overlay overlay_from_json(const std::string& text);

std::string result_to_json(const ScenarioResult& result);
ScenarioResult result_from_json(const std::string& text);

std::string report_to_json(const MetricsReport& report);

/// Fixed CSV schema, one row per run. The sweep columns stay empty when no
/// sweep is configured.
std::string csv_header();

struct RunLabel {
  std::uint64_t seed = 0;
  Mode mode = Mode::proposed;
  std::string sweep_key;
  double sweep_value = 0.0;
};

std::string csv_row(const RunLabel& label, const ScenarioConfig& config, const MetricsReport& report);

}  // namespace layercast
