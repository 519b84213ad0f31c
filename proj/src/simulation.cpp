#include "layercast/simulation.hpp"

#include <algorithm>
#include <string>

namespace layercast {

Bandwidth ScenarioResult::layer_granted(int downstream, int k) const {
  // Links are stored grouped by downstream, but do not rely on it.
  Bandwidth s;
  for (std::size_t l = 0; l < overlay.links.size(); ++l) {
    if (overlay.links[l].downstream_id == downstream) s += outcome(static_cast<int>(l), k).granted;
  }
  return s;
}

Bandwidth ScenarioResult::link_granted(int link) const {
  Bandwidth s;
  for (int k = 0; k < layer_count(); ++k) s += outcome(link, k).granted;
  return s;
}

namespace {

int rounds_limit(const Overlay& overlay, const SimParams& params) {
  return params.max_rounds > 0 ? params.max_rounds : static_cast<int>(overlay.max_reference_price()) + 2;
}

ScenarioResult empty_result(Mode mode, const Overlay& overlay, const SimParams& params) {
  ScenarioResult r;
  r.mode = mode;
  r.overlay = overlay;
  r.max_rounds = rounds_limit(overlay, params);
  const auto layers = static_cast<std::size_t>(overlay.layers.count());
  r.outcomes.assign(overlay.links.size() * layers, {});
  r.layer_rounds.assign(layers, 0);
  r.residual.assign(overlay.downstreams.size() * layers, Bandwidth{});
  return r;
}

std::vector<BidderState::LinkInput> link_inputs(const Overlay& overlay, const Adjacency& adj, int downstream,
                                                std::span<const Bandwidth> link_allocated) {
  std::vector<BidderState::LinkInput> in;
  for (int l : adj.by_downstream[static_cast<std::size_t>(downstream)]) {
    const auto& link = overlay.links[static_cast<std::size_t>(l)];
    in.push_back({l, link.upstream_id,
                  max(Bandwidth{}, link.available - link_allocated[static_cast<std::size_t>(l)])});
  }
  return in;
}

void record(ScenarioResult& r, const BidderState& bidder) {
  const int k = bidder.layer();
  for (const auto& e : bidder.links()) {
    auto& o = r.outcomes[static_cast<std::size_t>(e.link * r.layer_count() + k)];
    o.granted = e.granted;
    o.paid = e.paid;
    o.final_price = e.price;
  }
  r.residual[static_cast<std::size_t>(bidder.peer_id() * r.layer_count() + k)] = bidder.residual();
}

std::vector<AuctionLedger> make_ledgers(const Overlay& overlay, int phases) {
  std::vector<AuctionLedger> ledgers;
  ledgers.reserve(overlay.upstreams.size());
  for (const auto& u : overlay.upstreams) ledgers.emplace_back(u.id, u.upload, phases);
  return ledgers;
}

}  // namespace

ScenarioResult run_scenario(const Overlay& overlay, const SimParams& params) {
  ScenarioResult r = empty_result(Mode::proposed, overlay, params);
  const Adjacency adj(overlay);
  auto ledgers = make_ledgers(overlay, overlay.layers.count());
  std::vector<Bandwidth> link_allocated(overlay.links.size());
  for (std::size_t l = 0; l < overlay.links.size(); ++l) link_allocated[l] = overlay.links[l].allocated;

  PhaseOptions opts;
  opts.max_rounds = r.max_rounds;
  opts.execution = params.execution;
  opts.trace = params.trace;

  for (int k = 0; k < overlay.layers.count(); ++k) {
    std::vector<BidderState> bidders;
    for (const auto& peer : overlay.downstreams) {
      if (peer.subscribed_level < k) continue;
      const auto in = link_inputs(overlay, adj, peer.id, link_allocated);
      bidders.emplace_back(peer.id, k, overlay.layers.rate(k), overlay.class_of(peer).reference_price, in,
                           params.grant_rule);
    }
    const auto outcome = run_layer_auction(overlay, ledgers, k, bidders, link_allocated, opts);
    r.layer_rounds[static_cast<std::size_t>(k)] = outcome.rounds;
    for (const auto& b : bidders) {
      record(r, b);
      for (const auto& e : b.links()) link_allocated[static_cast<std::size_t>(e.link)] += e.granted;
    }
    for (auto& ledger : ledgers) ledger.advance_layer();
  }
  return r;
}

ScenarioResult run_baseline(const Overlay& overlay, const SimParams& params) {
  ScenarioResult r = empty_result(Mode::baseline, overlay, params);
  const Adjacency adj(overlay);
  auto ledgers = make_ledgers(overlay, 1);
  std::vector<Bandwidth> link_allocated(overlay.links.size());
  for (std::size_t l = 0; l < overlay.links.size(); ++l) link_allocated[l] = overlay.links[l].allocated;

  // Budget sum_k T_k split across layers in proportion to B_k gives every
  // layer exactly p~ * B_k, so each layer bidder keeps its own cap.
  std::vector<BidderState> bidders;
  for (const auto& peer : overlay.downstreams) {
    const auto in = link_inputs(overlay, adj, peer.id, link_allocated);
    for (int k = 0; k <= peer.subscribed_level; ++k) {
      bidders.emplace_back(peer.id, k, overlay.layers.rate(k), overlay.class_of(peer).reference_price, in,
                           params.grant_rule);
    }
  }

  PhaseOptions opts;
  opts.max_rounds = r.max_rounds;
  opts.execution = params.execution;
  opts.trace = params.trace;
  opts.phase = 0;
  const auto outcome = run_auction_phase(overlay, ledgers, bidders, link_allocated, opts);
  for (auto& ledger : ledgers) {
    if (ledger.open_layer()) ledger.close_layer();
  }
  for (const auto& b : bidders) record(r, b);
  for (std::size_t k = 0; k < outcome.layer_rounds.size() && k < r.layer_rounds.size(); ++k) {
    r.layer_rounds[k] = outcome.layer_rounds[k];
  }
  return r;
}

ScenarioResult run_mode(Mode mode, const Overlay& overlay, const SimParams& params) {
  return mode == Mode::proposed ? run_scenario(overlay, params) : run_baseline(overlay, params);
}

ConvergenceStats convergence_stats(const ScenarioResult& result) {
  ConvergenceStats s;
  s.layer_rounds = result.layer_rounds;
  s.limit = result.max_rounds;
  for (std::size_t k = 0; k < result.layer_rounds.size(); ++k) {
    const int rounds = result.layer_rounds[k];
    s.max_rounds = std::max(s.max_rounds, rounds);
    s.total_rounds += rounds;
    if (rounds >= result.max_rounds) s.layers_at_limit.push_back(static_cast<int>(k));
  }
  return s;
}

ConservationReport check_conservation(const ScenarioResult& r) {
  ConservationReport rep;
  const auto& ov = r.overlay;
  std::vector<Bandwidth> per_up(ov.upstreams.size());
  for (std::size_t l = 0; l < ov.links.size(); ++l) {
    const auto& link = ov.links[l];
    const Bandwidth total = r.link_granted(static_cast<int>(l)) + link.allocated;
    per_up[static_cast<std::size_t>(link.upstream_id)] += r.link_granted(static_cast<int>(l));
    if (total >= link.available) {
      rep.violations.push_back("link " + std::to_string(l) + ": grants " + std::to_string(total.kbps()) +
                               " kbps not below " + std::to_string(link.available.kbps()) + " kbps");
    }
  }
  for (std::size_t j = 0; j < ov.upstreams.size(); ++j) {
    if (per_up[j] > ov.upstreams[j].upload) {
      rep.violations.push_back("upstream " + std::to_string(j) + ": grants exceed upload");
    }
  }
  const int layers = r.layer_count();
  std::vector<Payment> paid(ov.downstreams.size() * static_cast<std::size_t>(layers), 0);
  std::vector<Bandwidth> got(paid.size());
  for (std::size_t l = 0; l < ov.links.size(); ++l) {
    for (int k = 0; k < layers; ++k) {
      const auto idx = static_cast<std::size_t>(ov.links[l].downstream_id * layers + k);
      paid[idx] += r.outcome(static_cast<int>(l), k).paid;
      got[idx] += r.outcome(static_cast<int>(l), k).granted;
    }
  }
  for (const auto& peer : ov.downstreams) {
    const Price ref = ov.class_of(peer).reference_price;
    for (int k = 0; k < layers; ++k) {
      const auto idx = static_cast<std::size_t>(peer.id * layers + k);
      const Payment budget = payment_for(ov.layers.rate(k), ref);
      if (paid[idx] > budget) {
        rep.violations.push_back("downstream " + std::to_string(peer.id) + " layer " + std::to_string(k) +
                                 ": payments exceed budget");
      }
      if (got[idx] > ov.layers.rate(k)) {
        rep.violations.push_back("downstream " + std::to_string(peer.id) + " layer " + std::to_string(k) +
                                 ": grants exceed the layer rate");
      }
      if (k > peer.subscribed_level && got[idx] > Bandwidth{}) {
        rep.violations.push_back("downstream " + std::to_string(peer.id) + " layer " + std::to_string(k) +
                                 ": grant above the subscribed level");
      }
    }
  }
  return rep;
}

}  // namespace layercast
