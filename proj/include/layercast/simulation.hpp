#pragma once

#include <ostream>
#include <vector>

#include "layercast/config.hpp"
#include "layercast/engine.hpp"
#include "layercast/overlay.hpp"

namespace layercast {

struct SimParams {
  int max_rounds = 0;  // 0: max reference price + 2
  Execution execution = Execution::serial;
  GrantRule grant_rule = GrantRule::cumulative;
  std::ostream* trace = nullptr;
};

/// Final outcome of one (link, layer) negotiation.
struct LinkLayerOutcome {
  Bandwidth granted;
  Payment paid = 0;
  Price final_price = 0;  // 0 when the downstream never bid on this link
  bool operator==(const LinkLayerOutcome&) const = default;
};

struct ScenarioResult {
  Mode mode = Mode::proposed;
  Overlay overlay;
  int max_rounds = 0;
  /// outcomes[link * layer_count + k]
  std::vector<LinkLayerOutcome> outcomes;
  /// Rounds until the fixed point, per layer. The baseline negotiates all
  /// layers at once; there a layer's count is the round in which its last
  /// bidder finished.
  std::vector<int> layer_rounds;
  /// residual[downstream * layer_count + k]; 0 for unsubscribed layers.
  std::vector<Bandwidth> residual;

  int layer_count() const { return overlay.layers.count(); }
  const LinkLayerOutcome& outcome(int link, int k) const {
    return outcomes.at(static_cast<std::size_t>(link * layer_count() + k));
  }
  Bandwidth residual_of(int downstream, int k) const {
    return residual.at(static_cast<std::size_t>(downstream * layer_count() + k));
  }
  /// Sum over the downstream's links of layer-k grants.
  Bandwidth layer_granted(int downstream, int k) const;
  /// Sum over layers of grants on one link.
  Bandwidth link_granted(int link) const;

  bool operator==(const ScenarioResult&) const = default;
};

ScenarioResult run_scenario(const Overlay& overlay, const SimParams& params = {});
ScenarioResult run_baseline(const Overlay& overlay, const SimParams& params = {});
ScenarioResult run_mode(Mode mode, const Overlay& overlay, const SimParams& params = {});

struct ConvergenceStats {
  std::vector<int> layer_rounds;
  int max_rounds = 0;
  int total_rounds = 0;
  int limit = 0;
  std::vector<int> layers_at_limit;
  bool operator==(const ConvergenceStats&) const = default;
};

ConvergenceStats convergence_stats(const ScenarioResult& result);

struct ConservationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Upload conservation per upstream, strict link headroom, payment within
/// the per-layer budget. Exact (fixed point).
ConservationReport check_conservation(const ScenarioResult& result);

}  // namespace layercast
