#pragma once

#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "layercast/auction.hpp"
#include "layercast/bidder.hpp"
#include "layercast/overlay.hpp"

namespace layercast {

/// Serial is the reference path; parallel runs the per-upstream allocation
/// and per-bidder revision kernels under OpenMP and must agree with it
/// exactly.
enum class Execution { serial, parallel };

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhaseOptions {
  int phase = 0;        // ledger layer the grants are booked against
  int max_rounds = 0;   // 0: no limit
  Execution execution = Execution::serial;
  std::ostream* trace = nullptr;  // JSON lines, one per (round, upstream)
};

struct PhaseOutcome {
  int rounds = 0;
  /// Last round in which any bidder of layer k still had bids out.
  std::vector<int> layer_rounds;
};

/// Runs bid/grant rounds until no bidder revises its bids. Under the
/// cumulative rule grants are booked every round; under reallocate each round
/// re-allocates the standing bids and only the fixed-point round is booked.
/// Bidders of the same downstream (baseline mode bids several layers at once)
/// share their links, so sibling requests are scaled down to fit the link.
/// `link_allocated` holds grants made in earlier phases.
PhaseOutcome run_auction_phase(const Overlay& overlay, std::span<AuctionLedger> ledgers,
                               std::span<BidderState> bidders,
                               std::span<const Bandwidth> link_allocated,
                               const PhaseOptions& options);

/// Layer-k auction across all upstreams (one bidder per subscribed
/// downstream). Every ledger must have layer k open or be finished; the
/// layer is closed in every open ledger afterwards.
PhaseOutcome run_layer_auction(const Overlay& overlay, std::span<AuctionLedger> ledgers, int layer,
                               std::span<BidderState> bidders,
                               std::span<const Bandwidth> link_allocated,
                               const PhaseOptions& options);

}  // namespace layercast
