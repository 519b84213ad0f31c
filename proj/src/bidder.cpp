#include "layercast/bidder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace layercast {

Payment layer_budget(Price reference_price, Bandwidth layer_rate) {
  return payment_for(layer_rate, reference_price);
}

namespace {

double bound_of(const Offer& o) {
  if (o.curve.capacity <= 0.0) return 0.0;
  return std::clamp(o.limit, 0.0, std::max(0.0, o.curve.usable() - o.base));
}

double filled(std::span<const Offer> offers, double level, std::vector<double>* out) {
  double sum = 0.0;
  for (std::size_t j = 0; j < offers.size(); ++j) {
    const auto& o = offers[j];
    const double b =
        o.curve.capacity > 0.0
            ? std::clamp(inverse_marginal(o.curve, o.unit_price, level) - o.base, 0.0, bound_of(o))
            : 0.0;
    if (out) (*out)[j] = b;
    sum += b;
  }
  return sum;
}

}  // namespace

WaterFillResult water_fill(double demand, std::span<const Offer> offers) {
  WaterFillResult r;
  r.quantities.assign(offers.size(), 0.0);

  double usable = 0.0;
  double entry = std::numeric_limits<double>::infinity();
  for (const auto& o : offers) {
    if (bound_of(o) <= 0.0) continue;
    usable += bound_of(o);
    entry = std::min(entry, o.unit_price + marginal_streaming_cost(o.curve, o.base));
  }
  if (!(demand > 0.0) || usable <= 0.0) {
    r.shortfall = demand > 0.0;
    r.level = std::isfinite(entry) ? entry : 0.0;
    return r;
  }
  if (demand >= usable) {
    double level = 0.0;
    for (std::size_t j = 0; j < offers.size(); ++j) {
      const auto& o = offers[j];
      const double b = bound_of(o);
      if (b <= 0.0) continue;
      r.quantities[j] = b;
      level = std::max(level, o.unit_price + marginal_streaming_cost(o.curve, o.base + b));
    }
    r.level = level;
    r.shortfall = demand > usable * (1.0 + 1e-12);
    return r;
  }

  double lo = entry;
  double gap = 1.0;
  double hi = entry + gap;
  while (filled(offers, hi, nullptr) < demand) {
    gap *= 2.0;
    hi = entry + gap;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = filled(offers, mid, nullptr);
    if (std::abs(s - demand) <= 1e-4) {
      lo = hi = mid;
      break;
    }
    (s < demand ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  r.level = 0.5 * (lo + hi);
  filled(offers, r.level, &r.quantities);
  return r;
}

std::vector<Bandwidth> quantize(std::span<const double> quantities, std::span<const Bandwidth> caps,
                                Bandwidth target) {
  const std::size_t n = quantities.size();
  std::vector<Bandwidth> out(n);
  std::vector<double> frac(n, 0.0);
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double scaled = std::max(0.0, quantities[j]) * Bandwidth::kScale;
    auto base = static_cast<std::int64_t>(std::floor(scaled));
    base = std::clamp<std::int64_t>(base, 0, std::max<std::int64_t>(caps[j].tenths(), 0));
    out[j] = Bandwidth::from_tenths(base);
    frac[j] = scaled - static_cast<double>(base);
    sum += base;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  std::int64_t extra = target.tenths() - sum;
  // Hand out (or take back) single tenths until the sum matches.
  while (extra != 0) {
    bool moved = false;
    for (std::size_t j : order) {
      if (extra > 0 && out[j] < caps[j]) {
        out[j] += Bandwidth::from_tenths(1);
        --extra;
        moved = true;
      } else if (extra < 0 && out[j] > Bandwidth{}) {
        out[j] -= Bandwidth::from_tenths(1);
        ++extra;
        moved = true;
      }
      if (extra == 0) break;
    }
    if (!moved) break;
  }
  return out;
}

BidderState::BidderState(int peer_id, int layer, Bandwidth layer_rate, Price reference_price,
                         std::span<const LinkInput> links, GrantRule rule, CostKind cost)
    : peer_id_(peer_id),
      layer_(layer),
      rate_(layer_rate),
      reference_price_(reference_price),
      budget_(layer_budget(reference_price, layer_rate)),
      rule_(rule),
      cost_(cost) {
  if (reference_price < 1) throw ProtocolError("reference price must be >= 1");
  links_.reserve(links.size());
  for (const auto& l : links) {
    LinkEntry e;
    e.link = l.link;
    e.upstream_id = l.upstream_id;
    e.capacity = l.capacity;
    links_.push_back(e);
  }
}

BidderState::LinkEntry* BidderState::entry(int link) {
  for (auto& e : links_) {
    if (e.link == link) return &e;
  }
  return nullptr;
}

const BidderState::LinkEntry* BidderState::find(int link) const {
  for (const auto& e : links_) {
    if (e.link == link) return &e;
  }
  return nullptr;
}

Bandwidth BidderState::granted_total() const {
  Bandwidth s;
  for (const auto& e : links_) s += e.granted;
  return s;
}

Bandwidth BidderState::residual() const { return max(Bandwidth{}, rate_ - granted_total()); }

void BidderState::request(Bandwidth demand) {
  const bool kept = rule_ == GrantRule::cumulative;
  std::vector<Offer> offers;
  std::vector<Bandwidth> caps;
  offers.reserve(links_.size());
  for (const auto& e : links_) {
    // Under the cumulative rule the request sits on top of the grants already
    // kept on this link.
    const Bandwidth base = kept ? e.granted : Bandwidth{};
    CostCurve curve{e.capacity > Bandwidth{} ? e.capacity.kbps() : 0.0, cost_};
    Bandwidth cap;
    if (e.capacity > Bandwidth{}) {
      // Strictly below the pole, and at least one tenth below the capacity.
      cap = min(Bandwidth::floor_kbps(curve.usable()), e.capacity - Bandwidth::from_tenths(1)) - base;
      cap = max(cap, Bandwidth{});
    }
    if (e.ceiling) cap = min(cap, *e.ceiling);
    if (cap <= Bandwidth{}) curve.capacity = 0.0;
    offers.push_back({static_cast<double>(e.price), curve, cap.kbps(), base.kbps()});
    caps.push_back(cap);
  }
  const auto wf = water_fill(demand.kbps(), offers);
  const Bandwidth total_cap = std::accumulate(caps.begin(), caps.end(), Bandwidth{});
  const auto q = quantize(wf.quantities, caps, min(demand, total_cap));
  shortfall_ = demand > total_cap;
  for (std::size_t j = 0; j < links_.size(); ++j) {
    links_[j].requested = q[j];
    links_[j].under_granted = false;
  }
}

void BidderState::finish() {
  done_ = true;
  if (rule_ == GrantRule::cumulative) {
    for (auto& e : links_) e.requested = Bandwidth{};
  }
}

std::vector<Bid> BidderState::bids() const {
  std::vector<Bid> out;
  for (const auto& e : links_) {
    if (e.requested > Bandwidth{}) {
      out.push_back({peer_id_, e.upstream_id, e.link, layer_, e.requested, e.price});
    }
  }
  return out;
}

std::vector<Bid> BidderState::initial_bids() {
  for (auto& e : links_) {
    e.price = 1;
    e.granted = Bandwidth{};
    e.paid = 0;
    e.ceiling.reset();
  }
  payments_ = 0;
  done_ = false;
  request(rate_);
  auto out = bids();
  if (out.empty()) finish();
  return out;
}

void BidderState::accept(std::span<const Allocation> grants) {
  if (rule_ == GrantRule::cumulative && done_) {
    throw ProtocolError("peer " + std::to_string(peer_id_) + ": negotiation already done");
  }
  std::vector<Bandwidth> got(links_.size());
  for (const auto& a : grants) {
    if (a.downstream_id != peer_id_ || a.layer != layer_) {
      throw ProtocolError("peer " + std::to_string(peer_id_) + ": grant for another bidder");
    }
    auto it = std::find_if(links_.begin(), links_.end(),
                           [&](const LinkEntry& e) { return e.link == a.link; });
    if (it == links_.end()) throw ProtocolError("grant on unknown link " + std::to_string(a.link));
    got[static_cast<std::size_t>(it - links_.begin())] += a.granted;
  }
  for (std::size_t j = 0; j < links_.size(); ++j) {
    auto& e = links_[j];
    if (got[j] < Bandwidth{} || got[j] > e.requested) {
      throw ProtocolError("peer " + std::to_string(peer_id_) + ": grant " +
                          std::to_string(got[j].kbps()) + " exceeds request " +
                          std::to_string(e.requested.kbps()) + " on link " + std::to_string(e.link));
    }
    e.under_granted = got[j] < e.requested;
    if (rule_ == GrantRule::cumulative) {
      e.granted += got[j];
      e.paid += payment_for(got[j], e.price);
      payments_ += payment_for(got[j], e.price);
    } else {
      e.granted = got[j];
    }
  }
  if (payments_ > budget_) {
    throw ProtocolError("peer " + std::to_string(peer_id_) + ": payments exceed layer budget");
  }
  accepted_ = true;
}

std::optional<std::vector<Bid>> BidderState::next_bids() {
  if (!accepted_) throw ProtocolError("next_bids called before accept");
  accepted_ = false;
  return rule_ == GrantRule::cumulative ? next_cumulative() : next_reallocate();
}

std::optional<std::vector<Bid>> BidderState::next_cumulative() {
  if (done_) return std::nullopt;
  // One escalation step per round for the whole bidder: every link that came
  // up short this round is bid at the new level. An under-granted upstream is
  // sold out for the rest of the layer, so the level only decides how long
  // the bidder keeps re-routing.
  Price level = 1;
  bool any_under = false;
  for (const auto& e : links_) {
    level = std::max(level, e.price);
    any_under = any_under || e.under_granted;
  }
  if (!any_under || level >= reference_price_) {
    finish();
    return std::nullopt;
  }
  ++level;
  for (auto& e : links_) {
    if (e.under_granted) e.price = level;
  }
  const Bandwidth demand = residual();
  if (demand <= Bandwidth{}) {
    finish();
    return std::nullopt;
  }
  request(demand);
  auto out = bids();
  if (out.empty()) {
    finish();
    return std::nullopt;
  }
  return out;
}

std::optional<std::vector<Bid>> BidderState::next_reallocate() {
  const auto before = bids();
  for (auto& e : links_) {
    if (!e.under_granted) continue;
    if (e.price < reference_price_) {
      ++e.price;
    } else {
      // Outbid at the highest price this peer may pay: the link will not
      // deliver more than it just did.
      e.ceiling = e.ceiling ? min(*e.ceiling, e.granted) : e.granted;
    }
  }
  request(rate_);
  auto out = bids();
  done_ = out == before;
  if (done_) return std::nullopt;
  return out;
}

void BidderState::settle() {
  if (rule_ != GrantRule::reallocate) return;
  payments_ = 0;
  for (auto& e : links_) {
    e.paid = payment_for(e.granted, e.price);
    payments_ += e.paid;
  }
  if (payments_ > budget_) {
    throw ProtocolError("peer " + std::to_string(peer_id_) + ": payments exceed layer budget");
  }
  done_ = true;
}

std::optional<std::vector<Bid>> BidderState::revise_bids(std::span<const Allocation> grants) {
  accept(grants);
  return next_bids();
}

void BidderState::set_capacity(int link, Bandwidth capacity) {
  if (auto* e = entry(link)) e->capacity = capacity;
}

void BidderState::clip_request(int link, Bandwidth quantity) {
  if (auto* e = entry(link)) e->requested = min(e->requested, max(quantity, Bandwidth{}));
}

}  // namespace layercast
