#pragma once

// Hand-built overlays for the small scenarios the tests walk through.

#include <vector>

#include "layercast/overlay.hpp"

namespace fixture {

using layercast::Bandwidth;

inline Bandwidth kbps(double v) { return Bandwidth::from_kbps(v); }

struct LinkDef {
  int downstream;
  int upstream;
  double x;
};

/// One class per entry of `prices` (ids 1..n); downstream i takes class
/// `classes[i]` (default 1). Downloads are large enough for every layer.
inline layercast::Overlay make(const std::vector<double>& uploads, int downstreams,
                               const std::vector<LinkDef>& links, const std::vector<double>& rates,
                               const std::vector<layercast::Price>& prices = {1},
                               const std::vector<int>& classes = {}) {
  using namespace layercast;
  Overlay ov;
  ov.layers = LayerSpec::from_kbps(rates);
  for (std::size_t c = 0; c < prices.size(); ++c) {
    ov.classes.push_back({static_cast<int>(c) + 1, prices[c], 1.0 / static_cast<double>(prices.size())});
  }
  for (std::size_t j = 0; j < uploads.size(); ++j) {
    Peer p;
    p.id = static_cast<int>(j);
    p.kind = PeerKind::upstream;
    p.upload = kbps(uploads[j]);
    ov.upstreams.push_back(p);
  }
  double total_rate = 0.0;
  for (double r : rates) total_rate += r;
  for (int i = 0; i < downstreams; ++i) {
    Peer p;
    p.id = i;
    p.kind = PeerKind::downstream;
    p.download = kbps(total_rate);
    p.class_id = classes.empty() ? 1 : classes[static_cast<std::size_t>(i)];
    p.subscribed_level = ov.layers.top();
    ov.downstreams.push_back(p);
  }
  for (const auto& l : links) ov.links.push_back({l.downstream, l.upstream, kbps(l.x), Bandwidth{}});
  return ov;
}

}  // namespace fixture
