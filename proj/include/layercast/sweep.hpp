#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "layercast/config.hpp"
#include "layercast/engine.hpp"
#include "layercast/metrics.hpp"
#include "layercast/simulation.hpp"

namespace layercast {

struct RunSpec {
  std::uint64_t seed = 0;
  Mode mode = Mode::proposed;
  std::size_t sweep_index = 0;
  std::optional<double> sweep_value;
  ScenarioConfig config;  // sweep already applied
};

/// All (seed x sweep value x mode) runs, in that nesting order.
std::vector<RunSpec> expand_runs(const ScenarioConfig& config);

struct RunOutput {
  RunSpec spec;
  ScenarioResult result;
  MetricsReport report;
  std::string trace;  // JSON lines, filled when tracing
  std::string error;  // non-empty when the run failed (e.g. no fixed point)
};

/// Runs one spec; exceptions become RunOutput::error.
RunOutput execute_run(const RunSpec& spec, bool trace = false);

/// Serial executes runs in order; parallel distributes whole runs over
/// OpenMP threads. Output order and content are identical either way.
std::vector<RunOutput> run_sweep(const std::vector<RunSpec>& specs, Execution execution,
                                 bool trace = false);

}  // namespace layercast
