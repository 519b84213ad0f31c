#include "layercast/sweep.hpp"

#include <sstream>

#include "layercast/overlay.hpp"

namespace layercast {

std::vector<RunSpec> expand_runs(const ScenarioConfig& config) {
  std::vector<RunSpec> runs;
  const std::size_t points = config.sweep ? config.sweep->values.size() : 1;
  for (std::uint64_t seed = config.seeds.first;; ++seed) {
    for (std::size_t s = 0; s < points; ++s) {
      ScenarioConfig applied = config;
      std::optional<double> value;
      if (config.sweep) {
        value = config.sweep->values[s];
        applied = apply_sweep(config, config.sweep->key, *value);
      }
      for (Mode mode : config.modes) runs.push_back({seed, mode, s, value, applied});
    }
    if (seed == config.seeds.last) break;
  }
  return runs;
}

RunOutput execute_run(const RunSpec& spec, bool trace) {
  RunOutput out;
  out.spec = spec;
  try {
    const Overlay overlay = generate_overlay(spec.config, spec.seed);
    std::ostringstream trace_buf;
    SimParams params;
    params.max_rounds = spec.config.max_rounds;
    params.grant_rule = spec.config.grant_rule;
    params.trace = trace ? &trace_buf : nullptr;
    out.result = run_mode(spec.mode, overlay, params);
    out.report = build_report(out.result);
    out.trace = trace_buf.str();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<RunOutput> run_sweep(const std::vector<RunSpec>& specs, Execution execution, bool trace) {
  std::vector<RunOutput> out(specs.size());
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < specs.size(); ++i) out[i] = execute_run(specs[i], trace);
    return out;
  }
  const auto n = static_cast<long>(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = execute_run(specs[static_cast<std::size_t>(i)], trace);
  }
  return out;
}

}  // namespace layercast
