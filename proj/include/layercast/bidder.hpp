#pragma once

#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "layercast/auction.hpp"
#include "layercast/cost.hpp"
#include "layercast/units.hpp"

namespace layercast {

/// T = reference_price * B_k, in the same tenths scale as Payment.
Payment layer_budget(Price reference_price, Bandwidth layer_rate);

struct Offer {
  double unit_price = 1.0;
  CostCurve curve;
  /// Upper bound on the quantity placed on this link (kbps).
  double limit = std::numeric_limits<double>::infinity();
  /// Bandwidth already held on the link; the new quantity sits on top of it,
  /// so marginal costs are taken at base + b.
  double base = 0.0;
};

struct WaterFillResult {
  std::vector<double> quantities;  // kbps, aligned with the offers
  double level = 0.0;              // common marginal cost of unconstrained active links
  bool shortfall = false;          // demand exceeded the usable capacity
};

/// Splits `demand` kbps over the offers so that sum(p*b + E(base + b)) is
/// minimal: every link strictly inside its bounds sits at the same marginal
/// cost p + E'(base + b) = level, every idle link has p + E'(base) >= level.
/// Offers with capacity <= 0 get 0.
WaterFillResult water_fill(double demand, std::span<const Offer> offers);

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// One downstream's negotiation state for one layer.
class BidderState {
 public:
  struct LinkEntry {
    int link = 0;
    int upstream_id = 0;
    Bandwidth capacity;  // headroom for this layer on this link
    Price price = 1;
    Bandwidth requested;
    Bandwidth granted;
    Payment paid = 0;
    /// Most this link delivered while the price sat at the reference price
    /// (reallocate rule only).
    std::optional<Bandwidth> ceiling;
    bool under_granted = false;
  };

  struct LinkInput {
    int link = 0;
    int upstream_id = 0;
    Bandwidth capacity;
  };

  BidderState(int peer_id, int layer, Bandwidth layer_rate, Price reference_price,
              std::span<const LinkInput> links, GrantRule rule = GrantRule::cumulative,
              CostKind cost = CostKind::utilization);

  int peer_id() const { return peer_id_; }
  int layer() const { return layer_; }
  GrantRule rule() const { return rule_; }
  Bandwidth layer_rate() const { return rate_; }
  Price reference_price() const { return reference_price_; }
  Payment budget() const { return budget_; }
  Payment payments() const { return payments_; }
  /// Cumulative rule: negotiation finished. Reallocate rule: the last
  /// revision left the bids unchanged (a later round may still revive it).
  bool done() const { return done_; }
  bool shortfall() const { return shortfall_; }
  std::span<const LinkEntry> links() const { return links_; }
  const LinkEntry* find(int link) const;

  Bandwidth granted_total() const;
  /// max(0, B_k - granted).
  Bandwidth residual() const;

  /// Price 1 everywhere, demand B_k water-filled over all links.
  std::vector<Bid> initial_bids();

  /// Applies one round of grants, escalates prices on under-granted links
  /// and re-water-fills. Returns the new bids, or nullopt when they did not
  /// change (the bidder's side of the fixed point).
  std::optional<std::vector<Bid>> revise_bids(std::span<const Allocation> grants);

  /// The two halves of revise_bids, for engines that adjust link capacity in
  /// between.
  void accept(std::span<const Allocation> grants);
  std::optional<std::vector<Bid>> next_bids();

  /// Reallocate rule: books the fixed-point grants at their final prices.
  void settle();

  void set_capacity(int link, Bandwidth capacity);
  /// Lowers the outstanding request on `link` (never raises it).
  void clip_request(int link, Bandwidth quantity);

  /// Outstanding bids (requested > 0), in link order.
  std::vector<Bid> bids() const;

 private:
  LinkEntry* entry(int link);
  void request(Bandwidth demand);
  void finish();
  std::optional<std::vector<Bid>> next_cumulative();
  std::optional<std::vector<Bid>> next_reallocate();

  int peer_id_;
  int layer_;
  Bandwidth rate_;
  Price reference_price_;
  Payment budget_;
  Payment payments_ = 0;
  GrantRule rule_;
  CostKind cost_;
  std::vector<LinkEntry> links_;
  bool done_ = false;
  bool shortfall_ = false;
  bool accepted_ = false;
};

/// Rounds kbps quantities to tenths so that they sum to exactly `target`,
/// never exceeding `caps` (largest remainder).
std::vector<Bandwidth> quantize(std::span<const double> quantities, std::span<const Bandwidth> caps,
                                Bandwidth target);

}  // namespace layercast
