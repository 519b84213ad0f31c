#include "layercast/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

#include "layercast/rng.hpp"

namespace layercast {

LayerSpec LayerSpec::from_kbps(const std::vector<double>& kbps) {
  LayerSpec spec;
  spec.rates.reserve(kbps.size());
  for (double r : kbps) spec.rates.push_back(Bandwidth::from_kbps(r));
  return spec;
}

const PriorityClass& Overlay::class_of(const Peer& downstream) const {
  for (const auto& c : classes) {
    if (c.id == downstream.class_id) return c;
  }
  throw std::out_of_range("downstream " + std::to_string(downstream.id) + " has unknown class " +
                          std::to_string(downstream.class_id));
}

Price Overlay::max_reference_price() const {
  Price p = 1;
  for (const auto& c : classes) p = std::max(p, c.reference_price);
  return p;
}

Adjacency::Adjacency(const Overlay& overlay)
    : by_downstream(overlay.downstreams.size()), by_upstream(overlay.upstreams.size()) {
  for (std::size_t l = 0; l < overlay.links.size(); ++l) {
    const auto& link = overlay.links[l];
    by_downstream.at(static_cast<std::size_t>(link.downstream_id)).push_back(static_cast<int>(l));
    by_upstream.at(static_cast<std::size_t>(link.upstream_id)).push_back(static_cast<int>(l));
  }
}

int subscribe_quality(Bandwidth download, const LayerSpec& layers) {
  int level = 0;
  Bandwidth cumulative;
  for (int k = 0; k < layers.count(); ++k) {
    cumulative += layers.rate(k);
    if (cumulative > download) break;
    level = k;
  }
  return level;
}

std::vector<int> class_populations(int total, const std::vector<double>& shares) {
  std::vector<int> counts(shares.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t c = 0; c < shares.size(); ++c) {
    const double exact = shares[c] * total;
    counts[c] = static_cast<int>(std::floor(exact + 1e-9));
    assigned += counts[c];
    remainders.emplace_back(exact - counts[c], c);
  }
  // Largest remainder first; ties go to the higher-priority class.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
    ++counts[remainders[r].second];
  }
  return counts;
}

namespace {

Bandwidth draw_in(Rng& rng, const Range& range) {
  const auto lo = Bandwidth::from_tenths(
      static_cast<std::int64_t>(std::ceil(range.lo * Bandwidth::kScale - 1e-9)));
  const auto hi = Bandwidth::floor_kbps(range.hi);
  return std::clamp(Bandwidth::from_kbps(rng.uniform(range.lo, range.hi)), lo, max(lo, hi));
}

// Floyd's algorithm: `count` distinct values from [0, n), returned sorted.
std::vector<int> sample_without_replacement(Rng& rng, int n, int count) {
  std::set<int> chosen;
  for (int j = n - count; j < n; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

Overlay generate_overlay(const ScenarioConfig& config, std::uint64_t seed) {
  validate_config(config);
  if (config.n_downstream > 0 && config.degree > config.n_upstream) {
    throw ConfigError("degree: connectivity degree " + std::to_string(config.degree) +
                      " exceeds the number of upstream peers (" +
                      std::to_string(config.n_upstream) + ")");
  }

  Overlay overlay;
  overlay.seed = seed;
  overlay.layers = LayerSpec::from_kbps(config.layer_rates);
  for (std::size_t c = 0; c < config.classes.size(); ++c) {
    overlay.classes.push_back({static_cast<int>(c) + 1, config.classes[c].reference_price,
                               config.classes[c].share});
  }

  Rng capacity = Rng::stream(seed, "capacity");
  Rng topology = Rng::stream(seed, "topology");
  Rng link_rng = Rng::stream(seed, "link");
  Rng class_rng = Rng::stream(seed, "class");

  overlay.upstreams.reserve(static_cast<std::size_t>(config.n_upstream));
  for (int j = 0; j < config.n_upstream; ++j) {
    Peer p;
    p.id = j;
    p.kind = PeerKind::upstream;
    p.upload = draw_in(capacity, config.upload);
    overlay.upstreams.push_back(p);
  }

  overlay.downstreams.reserve(static_cast<std::size_t>(config.n_downstream));
  for (int i = 0; i < config.n_downstream; ++i) {
    Peer p;
    p.id = i;
    p.kind = PeerKind::downstream;
    p.download = draw_in(capacity, config.download);
    p.subscribed_level = subscribe_quality(p.download, overlay.layers);
    overlay.downstreams.push_back(p);
  }

  // Class labels: exact populations, then a seeded shuffle.
  std::vector<double> shares;
  for (const auto& c : config.classes) shares.push_back(c.share);
  const auto populations = class_populations(config.n_downstream, shares);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(config.n_downstream));
  for (std::size_t c = 0; c < populations.size(); ++c) {
    labels.insert(labels.end(), static_cast<std::size_t>(populations[c]), static_cast<int>(c) + 1);
  }
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[class_rng.below(i)]);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) overlay.downstreams[i].class_id = labels[i];

  for (int i = 0; i < config.n_downstream; ++i) {
    for (int j : sample_without_replacement(topology, config.n_upstream, config.degree)) {
      Link link;
      link.downstream_id = i;
      link.upstream_id = j;
      const auto drawn = draw_in(link_rng, config.link);
      const auto cap = min(overlay.upstreams[static_cast<std::size_t>(j)].upload,
                           overlay.downstreams[static_cast<std::size_t>(i)].download);
      link.available = min(drawn, cap);
      overlay.links.push_back(link);
    }
  }
  return overlay;
}

std::vector<Violation> validate_overlay(const Overlay& overlay) {
  std::vector<Violation> out;
  auto add = [&out](std::string subject, std::string message) {
    out.push_back({std::move(subject), std::move(message)});
  };

  if (overlay.layers.count() < 1) add("layer_spec", "at least one layer is required");
  for (int k = 0; k < overlay.layers.count(); ++k) {
    if (overlay.layers.rate(k) <= Bandwidth{}) {
      add("layer " + std::to_string(k), "rate must be positive");
    }
  }

  double share_sum = 0.0;
  for (std::size_t c = 0; c < overlay.classes.size(); ++c) {
    const auto& cls = overlay.classes[c];
    share_sum += cls.population_share;
    const std::string subject = "class " + std::to_string(cls.id);
    if (cls.id != static_cast<int>(c) + 1) add(subject, "class ids must be 1..q in order");
    if (cls.reference_price < 1) add(subject, "reference price must be a positive integer");
    if (c > 0 && cls.reference_price >= overlay.classes[c - 1].reference_price) {
      add(subject, "reference price must decrease with priority");
    }
    if (cls.population_share < 0.0 || cls.population_share > 1.0) {
      add(subject, "population share outside [0, 1]");
    }
  }
  if (!overlay.classes.empty() && std::abs(share_sum - 1.0) > 1e-9) {
    add("classes", "population shares sum to " + std::to_string(share_sum));
  }

  for (const auto& p : overlay.upstreams) {
    if (p.kind != PeerKind::upstream) add("upstream " + std::to_string(p.id), "wrong peer kind");
    if (p.upload <= Bandwidth{}) add("upstream " + std::to_string(p.id), "upload must be positive");
  }
  const int top = overlay.layers.top();
  for (const auto& p : overlay.downstreams) {
    const std::string subject = "downstream " + std::to_string(p.id);
    if (p.kind != PeerKind::downstream) add(subject, "wrong peer kind");
    if (p.download <= Bandwidth{}) add(subject, "download must be positive");
    if (p.subscribed_level < 0 || p.subscribed_level > top) {
      add(subject, "subscribed level " + std::to_string(p.subscribed_level) + " outside [0, " +
                       std::to_string(top) + "]");
    }
    if (p.class_id < 1 || p.class_id > static_cast<int>(overlay.classes.size())) {
      add(subject, "unknown class " + std::to_string(p.class_id));
    }
  }

  std::vector<int> degree(overlay.downstreams.size(), 0);
  std::set<std::pair<int, int>> seen;
  const auto n_down = static_cast<int>(overlay.downstreams.size());
  const auto n_up = static_cast<int>(overlay.upstreams.size());
  for (std::size_t l = 0; l < overlay.links.size(); ++l) {
    const auto& link = overlay.links[l];
    const std::string subject = "link " + std::to_string(l) + " (d" +
                                std::to_string(link.downstream_id) + "-u" +
                                std::to_string(link.upstream_id) + ")";
    if (link.downstream_id < 0 || link.downstream_id >= n_down || link.upstream_id < 0 ||
        link.upstream_id >= n_up) {
      add(subject, "endpoint does not name a downstream and an upstream peer");
      continue;
    }
    ++degree[static_cast<std::size_t>(link.downstream_id)];
    if (!seen.insert({link.downstream_id, link.upstream_id}).second) add(subject, "duplicate link");
    if (link.available <= Bandwidth{}) add(subject, "available bandwidth must be positive");
    if (link.allocated < Bandwidth{} || link.allocated >= link.available) {
      add(subject, "allocated " + std::to_string(link.allocated.kbps()) +
                       " kbps not strictly below available " +
                       std::to_string(link.available.kbps()) + " kbps");
    }
  }
  for (std::size_t i = 0; i < degree.size(); ++i) {
    if (degree[i] == 0) add("downstream " + std::to_string(i), "no upstream link");
  }
  return out;
}

}  // namespace layercast
