#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "layercast/units.hpp"

namespace layercast {

/// How grants evolve across the rounds of one auction.
enum class GrantRule {
  /// Every round re-runs the allocation over all standing bids; only the
  /// allocation at the fixed point is final and paid for.
  reallocate,
  /// Grants are final as soon as they are made; later rounds only sell what
  /// is left and bidders bid for their residual demand.
  cumulative,
};

std::string to_string(GrantRule rule);

/// A downstream's offer for bandwidth of one layer on one link.
struct Bid {
  int downstream_id = 0;
  int upstream_id = 0;
  int link = 0;
  int layer = 0;
  Bandwidth quantity;
  Price unit_price = 1;
  bool operator==(const Bid&) const = default;
};

/// What an upstream grants against one Bid in one round.
struct Allocation {
  int downstream_id = 0;
  int upstream_id = 0;
  int link = 0;
  int layer = 0;
  Bandwidth requested;
  Bandwidth granted;
  Price unit_price = 1;

  Payment payment() const { return payment_for(granted, unit_price); }
  bool operator==(const Allocation&) const = default;
};

/// One best-offer round: bids are served in descending price order; a price
/// tier whose demand exceeds what is left shares the residue in proportion
/// to requested quantity (largest remainder, exact to 0.1 kbps). The result
/// is index-aligned with `bids` and does not depend on their order.
std::vector<Allocation> allocate_round(Bandwidth remaining, std::span<const Bid> bids);

class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class LayerStatus { pending, open, closed };

struct LayerRecord {
  LayerStatus status = LayerStatus::pending;
  Bandwidth remaining_before;
  Bandwidth granted;
  std::vector<std::vector<Allocation>> rounds;
};

/// Per-upstream record of its layer auctions. Layer k+1 opens only after
/// layer k has closed; the sum of all grants never exceeds the upload.
class AuctionLedger {
 public:
  AuctionLedger(int upstream_id, Bandwidth upload, int layer_count);

  int upstream_id() const { return upstream_id_; }
  Bandwidth upload() const { return upload_; }
  Bandwidth total_granted() const { return total_granted_; }
  Bandwidth remaining() const;

  /// Layer currently open, or nullopt when between layers or finished.
  std::optional<int> open_layer() const;
  int current_layer() const { return current_; }
  bool finished() const { return finished_; }

  const LayerRecord& layer(int k) const { return layers_.at(static_cast<std::size_t>(k)); }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  /// Grants of one round against the open layer. Committed grants are final
  /// and consume upload; provisional ones are only kept in the round log.
  /// Throws StateError when no layer is open or committed grants would
  /// overdraw the upload.
  void record_round(std::vector<Allocation> grants, bool commit = true);

  /// Commits a set of grants without logging a new round (the fixed point
  /// of a reallocating auction).
  void commit(std::span<const Allocation> grants);

  void close_layer();

  /// Opens the next layer with whatever upload is left. Returns nullopt
  /// (finished) after the top layer or once the upload is used up. Throws
  /// StateError while the current layer is still open.
  std::optional<int> advance_layer();

 private:
  int upstream_id_;
  Bandwidth upload_;
  Bandwidth total_granted_;
  std::vector<LayerRecord> layers_;
  int current_ = 0;
  bool finished_ = false;
};

}  // namespace layercast
