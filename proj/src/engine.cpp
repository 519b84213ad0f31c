#include "layercast/engine.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "json.hpp"

namespace layercast {

namespace {

/// Bidder indices grouped by downstream peer, only for peers holding more
/// than one bidder.
std::vector<std::vector<std::size_t>> sibling_groups(std::span<BidderState> bidders) {
  std::map<int, std::vector<std::size_t>> by_peer;
  for (std::size_t b = 0; b < bidders.size(); ++b) by_peer[bidders[b].peer_id()].push_back(b);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [_, members] : by_peer) {
    if (members.size() > 1) groups.push_back(std::move(members));
  }
  return groups;
}

Bandwidth link_limit(const Link& link) {
  const CostCurve curve{link.available.kbps()};
  return min(Bandwidth::floor_kbps(curve.usable()), link.available - Bandwidth::from_tenths(1));
}

// Siblings' kept grants plus requests must stay below the link capacity;
// oversized requests are scaled down proportionally.
void fit_sibling_requests(const Overlay& overlay, std::span<BidderState> bidders,
                          std::span<const Bandwidth> link_allocated,
                          const std::vector<std::vector<std::size_t>>& groups) {
  for (const auto& group : groups) {
    std::map<int, std::pair<Bandwidth, Bandwidth>> per_link;  // kept, requested
    for (std::size_t b : group) {
      const bool kept = bidders[b].rule() == GrantRule::cumulative;
      for (const auto& e : bidders[b].links()) {
        auto& [committed, requested] = per_link[e.link];
        if (kept) committed += e.granted;
        requested += e.requested;
      }
    }
    for (const auto& [l, totals] : per_link) {
      const auto& [committed, requested] = totals;
      const auto& link = overlay.links[static_cast<std::size_t>(l)];
      const Bandwidth room =
          max(Bandwidth{}, link_limit(link) - link_allocated[static_cast<std::size_t>(l)] - committed);
      if (requested <= room) continue;
      for (std::size_t b : group) {
        const auto* e = bidders[b].find(l);
        if (!e || e->requested <= Bandwidth{}) continue;
        const auto scaled = static_cast<std::int64_t>(static_cast<__int128>(e->requested.tenths()) *
                                                      room.tenths() / requested.tenths());
        bidders[b].clip_request(l, Bandwidth::from_tenths(scaled));
      }
    }
  }
}

void write_trace(std::ostream& os, int phase, int round, const AuctionLedger& ledger,
                 Bandwidth remaining, std::span<const Bid> bids, std::span<const Allocation> grants) {
  nlohmann::ordered_json line;
  line["phase"] = phase;
  line["round"] = round;
  line["upstream"] = ledger.upstream_id();
  line["remaining_kbps"] = remaining.kbps();
  line["bids"] = nlohmann::ordered_json::array();
  for (const auto& b : bids) {
    line["bids"].push_back({{"downstream", b.downstream_id},
                            {"link", b.link},
                            {"layer", b.layer},
                            {"quantity_kbps", b.quantity.kbps()},
                            {"price", b.unit_price}});
  }
  line["grants"] = nlohmann::ordered_json::array();
  for (const auto& a : grants) {
    line["grants"].push_back({{"downstream", a.downstream_id},
                              {"link", a.link},
                              {"layer", a.layer},
                              {"granted_kbps", a.granted.kbps()},
                              {"price", a.unit_price}});
  }
  os << line.dump() << '\n';
}

}  // namespace

PhaseOutcome run_auction_phase(const Overlay& overlay, std::span<AuctionLedger> ledgers,
                               std::span<BidderState> bidders,
                               std::span<const Bandwidth> link_allocated,
                               const PhaseOptions& options) {
  const auto groups = sibling_groups(bidders);
  const bool parallel = options.execution == Execution::parallel;
  const auto n_bidders = static_cast<long>(bidders.size());
  const auto n_up = static_cast<long>(ledgers.size());

  std::map<std::pair<int, int>, std::size_t> owner;  // (peer, layer) -> bidder
  for (std::size_t b = 0; b < bidders.size(); ++b) {
    if (!owner.emplace(std::pair{bidders[b].peer_id(), bidders[b].layer()}, b).second) {
      throw StateError("two bidders for peer " + std::to_string(bidders[b].peer_id()) + " layer " +
                       std::to_string(bidders[b].layer()));
    }
  }

#pragma omp parallel for schedule(static) if (parallel)
  for (long b = 0; b < n_bidders; ++b) bidders[static_cast<std::size_t>(b)].initial_bids();
  fit_sibling_requests(overlay, bidders, link_allocated, groups);

  PhaseOutcome outcome;
  std::vector<std::vector<Bid>> bids(ledgers.size());
  std::vector<std::vector<Allocation>> grants(ledgers.size());
  std::vector<std::vector<Allocation>> inbox(bidders.size());
  std::vector<std::vector<Bid>> before(bidders.size());
  std::vector<Bandwidth> remaining_before(ledgers.size());

  for (;;) {
    for (auto& v : bids) v.clear();
    bool any = false;
    for (std::size_t b = 0; b < bidders.size(); ++b) {
      auto& bidder = bidders[b];
      if (bidder.rule() == GrantRule::cumulative && bidder.done()) continue;
      const auto layer = static_cast<std::size_t>(bidder.layer());
      if (outcome.layer_rounds.size() <= layer) outcome.layer_rounds.resize(layer + 1, 0);
      before[b] = bidder.bids();
      for (const auto& bid : before[b]) {
        bids.at(static_cast<std::size_t>(bid.upstream_id)).push_back(bid);
        outcome.layer_rounds[layer] = outcome.rounds + 1;
        any = true;
      }
    }
    if (!any) break;
    ++outcome.rounds;
    if (options.max_rounds > 0 && outcome.rounds > options.max_rounds) {
      throw NonConvergence("phase " + std::to_string(options.phase) +
                           " did not reach a fixed point within " +
                           std::to_string(options.max_rounds) + " rounds");
    }

    const bool commit_each = bidders.front().rule() == GrantRule::cumulative;
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (long j = 0; j < n_up; ++j) {
      const auto u = static_cast<std::size_t>(j);
      auto& ledger = ledgers[u];
      remaining_before[u] = ledger.remaining();
      grants[u] = allocate_round(remaining_before[u], bids[u]);
      if (ledger.open_layer() && !bids[u].empty()) ledger.record_round(grants[u], commit_each);
    }

    if (options.trace) {
      for (std::size_t u = 0; u < ledgers.size(); ++u) {
        if (bids[u].empty()) continue;
        write_trace(*options.trace, options.phase, outcome.rounds, ledgers[u], remaining_before[u],
                    bids[u], grants[u]);
      }
    }

    for (auto& v : inbox) v.clear();
    for (const auto& per_up : grants) {
      for (const auto& a : per_up) inbox[owner.at({a.downstream_id, a.layer})].push_back(a);
    }

#pragma omp parallel for schedule(static) if (parallel)
    for (long b = 0; b < n_bidders; ++b) {
      auto& bidder = bidders[static_cast<std::size_t>(b)];
      if (bidder.rule() == GrantRule::cumulative && bidder.done()) continue;
      bidder.accept(inbox[static_cast<std::size_t>(b)]);
      bidder.next_bids();
    }
    fit_sibling_requests(overlay, bidders, link_allocated, groups);

    if (commit_each) continue;
    bool changed = false;
    for (std::size_t b = 0; b < bidders.size() && !changed; ++b) changed = bidders[b].bids() != before[b];
    if (!changed) {
      // Fixed point: this round's allocation is final.
      for (std::size_t u = 0; u < ledgers.size(); ++u) {
        if (ledgers[u].open_layer() && !grants[u].empty()) ledgers[u].commit(grants[u]);
      }
      for (auto& bidder : bidders) bidder.settle();
      break;
    }
  }
  return outcome;
}

PhaseOutcome run_layer_auction(const Overlay& overlay, std::span<AuctionLedger> ledgers, int layer,
                               std::span<BidderState> bidders,
                               std::span<const Bandwidth> link_allocated,
                               const PhaseOptions& options) {
  for (const auto& ledger : ledgers) {
    if (ledger.finished()) continue;
    if (ledger.open_layer() != layer) {
      throw StateError("upstream " + std::to_string(ledger.upstream_id()) + ": layer " +
                       std::to_string(layer) + " is not open");
    }
  }
  for (const auto& b : bidders) {
    if (b.layer() != layer) {
      throw StateError("bidder for layer " + std::to_string(b.layer()) + " in the layer " +
                       std::to_string(layer) + " auction");
    }
  }
  PhaseOptions opts = options;
  opts.phase = layer;
  const auto outcome = run_auction_phase(overlay, ledgers, bidders, link_allocated, opts);
  for (auto& ledger : ledgers) {
    if (ledger.open_layer()) ledger.close_layer();
  }
  return outcome;
}

}  // namespace layercast
