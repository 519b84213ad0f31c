#include "layercast/auction.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace layercast {

std::string to_string(GrantRule rule) {
  return rule == GrantRule::cumulative ? "cumulative" : "reallocate";
}

std::vector<Allocation> allocate_round(Bandwidth remaining, std::span<const Bid> bids) {
  std::vector<Allocation> out(bids.size());
  for (std::size_t b = 0; b < bids.size(); ++b) {
    const Bid& bid = bids[b];
    out[b] = {bid.downstream_id, bid.upstream_id, bid.link, bid.layer, bid.quantity, Bandwidth{},
              bid.unit_price};
  }

  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bids[a].unit_price > bids[b].unit_price;
  });

  std::int64_t left = std::max<std::int64_t>(remaining.tenths(), 0);
  for (std::size_t start = 0; start < order.size() && left > 0;) {
    std::size_t end = start;
    std::int64_t demand = 0;
    while (end < order.size() && bids[order[end]].unit_price == bids[order[start]].unit_price) {
      demand += std::max<std::int64_t>(bids[order[end]].quantity.tenths(), 0);
      ++end;
    }
    if (demand <= left) {
      for (std::size_t t = start; t < end; ++t) {
        out[order[t]].granted = max(bids[order[t]].quantity, Bandwidth{});
      }
      left -= demand;
    } else {
      // Proportional split of `left` over the tier.
      struct Share {
        std::size_t index;
        std::int64_t base;
        std::int64_t remainder;
      };
      std::vector<Share> shares;
      std::int64_t handed = 0;
      for (std::size_t t = start; t < end; ++t) {
        const std::int64_t q = std::max<std::int64_t>(bids[order[t]].quantity.tenths(), 0);
        const __int128 scaled = static_cast<__int128>(left) * q;
        const auto base = static_cast<std::int64_t>(scaled / demand);
        shares.push_back({order[t], base, static_cast<std::int64_t>(scaled % demand)});
        handed += base;
      }
      std::sort(shares.begin(), shares.end(), [&](const Share& a, const Share& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        const Bid& ba = bids[a.index];
        const Bid& bb = bids[b.index];
        if (ba.downstream_id != bb.downstream_id) return ba.downstream_id < bb.downstream_id;
        if (ba.layer != bb.layer) return ba.layer < bb.layer;
        return ba.link < bb.link;
      });
      std::int64_t extra = left - handed;
      for (auto& s : shares) {
        const std::int64_t bump = extra > 0 && s.remainder > 0 ? 1 : 0;
        extra -= bump;
        out[s.index].granted = Bandwidth::from_tenths(s.base + bump);
      }
      left = 0;
    }
    start = end;
  }
  return out;
}

AuctionLedger::AuctionLedger(int upstream_id, Bandwidth upload, int layer_count)
    : upstream_id_(upstream_id), upload_(upload), layers_(static_cast<std::size_t>(layer_count)) {
  if (layer_count < 1) throw StateError("ledger needs at least one layer");
  layers_[0].status = LayerStatus::open;
  layers_[0].remaining_before = upload;
}

Bandwidth AuctionLedger::remaining() const {
  if (!open_layer()) return Bandwidth{};
  return upload_ - total_granted_;
}

std::optional<int> AuctionLedger::open_layer() const {
  if (finished_) return std::nullopt;
  if (layers_[static_cast<std::size_t>(current_)].status != LayerStatus::open) return std::nullopt;
  return current_;
}

void AuctionLedger::record_round(std::vector<Allocation> grants, bool commit_now) {
  if (!open_layer()) {
    throw StateError("upstream " + std::to_string(upstream_id_) + ": no open layer");
  }
  for (const auto& a : grants) {
    if (a.granted < Bandwidth{} || a.granted > a.requested) {
      throw StateError("upstream " + std::to_string(upstream_id_) + ": grant outside [0, request]");
    }
  }
  if (commit_now) commit(grants);
  layers_[static_cast<std::size_t>(current_)].rounds.push_back(std::move(grants));
}

void AuctionLedger::commit(std::span<const Allocation> grants) {
  if (!open_layer()) {
    throw StateError("upstream " + std::to_string(upstream_id_) + ": no open layer");
  }
  Bandwidth sum;
  for (const auto& a : grants) sum += a.granted;
  if (total_granted_ + sum > upload_) {
    throw StateError("upstream " + std::to_string(upstream_id_) + ": grants exceed upload");
  }
  total_granted_ += sum;
  layers_[static_cast<std::size_t>(current_)].granted += sum;
}

void AuctionLedger::close_layer() {
  if (!open_layer()) {
    throw StateError("upstream " + std::to_string(upstream_id_) + ": no open layer to close");
  }
  layers_[static_cast<std::size_t>(current_)].status = LayerStatus::closed;
}

std::optional<int> AuctionLedger::advance_layer() {
  if (finished_) return std::nullopt;
  if (layers_[static_cast<std::size_t>(current_)].status == LayerStatus::open) {
    throw StateError("upstream " + std::to_string(upstream_id_) + ": layer " +
                     std::to_string(current_) + " is still open");
  }
  if (current_ + 1 >= layer_count() || total_granted_ >= upload_) {
    finished_ = true;
    return std::nullopt;
  }
  ++current_;
  auto& rec = layers_[static_cast<std::size_t>(current_)];
  rec.status = LayerStatus::open;
  rec.remaining_before = upload_ - total_granted_;
  return current_;
}

}  // namespace layercast
