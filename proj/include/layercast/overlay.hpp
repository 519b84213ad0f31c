#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "layercast/config.hpp"
#include "layercast/units.hpp"

namespace layercast {

/// Layers 0..M with their transmission rates; rates[0] is the base layer.
struct LayerSpec {
  std::vector<Bandwidth> rates;

  int count() const { return static_cast<int>(rates.size()); }
  int top() const { return count() - 1; }
  Bandwidth rate(int k) const { return rates.at(static_cast<std::size_t>(k)); }

  static LayerSpec from_kbps(const std::vector<double>& kbps);
  bool operator==(const LayerSpec&) const = default;
};

/// Class 1 is the highest priority and carries the largest reference price.
struct PriorityClass {
  int id = 1;
  Price reference_price = 1;
  double population_share = 0.0;
  bool operator==(const PriorityClass&) const = default;
};

enum class PeerKind { upstream, downstream };

/// `id` indexes the peer within its kind (upstreams and downstreams are
/// numbered separately).
struct Peer {
  int id = 0;
  PeerKind kind = PeerKind::downstream;
  Bandwidth upload;    // upstream only
  Bandwidth download;  // downstream only
  int class_id = 0;    // downstream only
  int subscribed_level = 0;
  bool operator==(const Peer&) const = default;
};

struct Link {
  int downstream_id = 0;
  int upstream_id = 0;
  Bandwidth available;
  Bandwidth allocated;
  bool operator==(const Link&) const = default;
};

/// Bipartite overlay: every link joins one downstream to one upstream.
struct Overlay {
  std::vector<Peer> upstreams;
  std::vector<Peer> downstreams;
  std::vector<Link> links;
  LayerSpec layers;
  std::vector<PriorityClass> classes;
  std::uint64_t seed = 0;

  const PriorityClass& class_of(const Peer& downstream) const;
  Price max_reference_price() const;

  bool operator==(const Overlay&) const = default;
};

/// Link indices grouped by endpoint, in ascending link order.
struct Adjacency {
  std::vector<std::vector<int>> by_downstream;
  std::vector<std::vector<int>> by_upstream;

  explicit Adjacency(const Overlay& overlay);
};

/// Largest k with B_0 + ... + B_k <= download; 0 when even B_0 does not fit.
int subscribe_quality(Bandwidth download, const LayerSpec& layers);

Overlay generate_overlay(const ScenarioConfig& config, std::uint64_t seed);

struct Violation {
  std::string subject;  // e.g. "link 3 (d7-u2)" or "downstream 5"
  std::string message;
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_overlay(const Overlay& overlay);

/// Largest-remainder split of `total` peers by `shares`.
std::vector<int> class_populations(int total, const std::vector<double>& shares);

}  // namespace layercast
