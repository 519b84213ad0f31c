#include "layercast/metrics.hpp"

#include <algorithm>

#include "layercast/cost.hpp"

namespace layercast {

namespace {

// grants[downstream * L + k]
std::vector<Bandwidth> per_peer_layer(const ScenarioResult& r) {
  const int layers = r.layer_count();
  std::vector<Bandwidth> g(r.overlay.downstreams.size() * static_cast<std::size_t>(layers));
  for (std::size_t l = 0; l < r.overlay.links.size(); ++l) {
    const int d = r.overlay.links[l].downstream_id;
    for (int k = 0; k < layers; ++k) {
      g[static_cast<std::size_t>(d * layers + k)] += r.outcome(static_cast<int>(l), k).granted;
    }
  }
  return g;
}

}  // namespace

std::optional<double> delivery_ratio(const ScenarioResult& r, int layer) {
  const auto g = per_peer_layer(r);
  const int layers = r.layer_count();
  const double rate = r.overlay.layers.rate(layer).kbps();
  double sum = 0.0;
  int n = 0;
  for (const auto& peer : r.overlay.downstreams) {
    if (peer.subscribed_level < layer) continue;
    const double got = g[static_cast<std::size_t>(peer.id * layers + layer)].kbps();
    sum += std::min(1.0, got / rate);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double useless_chunk_ratio(const ScenarioResult& r) {
  const auto g = per_peer_layer(r);
  const int layers = r.layer_count();
  std::int64_t useless = 0;
  std::int64_t total = 0;
  for (const auto& peer : r.overlay.downstreams) {
    bool broken = false;
    for (int k = 0; k < layers; ++k) {
      const Bandwidth got = g[static_cast<std::size_t>(peer.id * layers + k)];
      total += got.tenths();
      if (broken) useless += got.tenths();
      if (got < r.overlay.layers.rate(k)) broken = true;
    }
  }
  return total > 0 ? static_cast<double>(useless) / static_cast<double>(total) : 0.0;
}

double peer_streaming_cost(const ScenarioResult& r, int downstream) {
  double cost = 0.0;
  for (std::size_t l = 0; l < r.overlay.links.size(); ++l) {
    const auto& link = r.overlay.links[l];
    if (link.downstream_id != downstream) continue;
    const CostCurve curve{link.available.kbps()};
    cost += streaming_cost(curve, (link.allocated + r.link_granted(static_cast<int>(l))).kbps());
  }
  return cost;
}

std::optional<double> avg_streaming_cost(const ScenarioResult& r, std::optional<int> class_id) {
  std::vector<double> per_peer(r.overlay.downstreams.size(), 0.0);
  for (std::size_t l = 0; l < r.overlay.links.size(); ++l) {
    const auto& link = r.overlay.links[l];
    const CostCurve curve{link.available.kbps()};
    per_peer[static_cast<std::size_t>(link.downstream_id)] +=
        streaming_cost(curve, (link.allocated + r.link_granted(static_cast<int>(l))).kbps());
  }
  double sum = 0.0;
  int n = 0;
  for (const auto& peer : r.overlay.downstreams) {
    if (class_id && peer.class_id != *class_id) continue;
    sum += per_peer[static_cast<std::size_t>(peer.id)];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

MetricsReport build_report(const ScenarioResult& r) {
  MetricsReport m;
  m.mode = r.mode;
  for (int k = 0; k < r.layer_count(); ++k) m.delivery.push_back(delivery_ratio(r, k));
  m.useless_ratio = useless_chunk_ratio(r);
  m.cost_all = avg_streaming_cost(r);
  for (const auto& cls : r.overlay.classes) {
    m.cost_by_class.push_back(avg_streaming_cost(r, cls.id));
    m.class_counts.push_back(static_cast<int>(std::count_if(
        r.overlay.downstreams.begin(), r.overlay.downstreams.end(),
        [&](const Peer& p) { return p.class_id == cls.id; })));
  }
  m.convergence = convergence_stats(r);
  return m;
}

}  // namespace layercast
