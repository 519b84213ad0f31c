#include "layercast/io.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace layercast {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json overlay_doc(const Overlay& ov) {
  ordered_json doc;
  doc["seed"] = ov.seed;
  ordered_json rates = ordered_json::array();
  for (auto r : ov.layers.rates) rates.push_back(r.tenths());
  doc["layer_spec"] = {{"count", ov.layers.count()}, {"rates_tenths_kbps", rates}};
  doc["classes"] = ordered_json::array();
  for (const auto& c : ov.classes) {
    doc["classes"].push_back(
        {{"id", c.id}, {"reference_price", c.reference_price}, {"population_share", c.population_share}});
  }
  doc["upstreams"] = ordered_json::array();
  for (const auto& p : ov.upstreams) {
    doc["upstreams"].push_back({{"id", p.id}, {"upload_tenths_kbps", p.upload.tenths()}});
  }
  doc["downstreams"] = ordered_json::array();
  for (const auto& p : ov.downstreams) {
    doc["downstreams"].push_back({{"id", p.id},
                                  {"download_tenths_kbps", p.download.tenths()},
                                  {"class_id", p.class_id},
                                  {"subscribed_level", p.subscribed_level}});
  }
  doc["links"] = ordered_json::array();
  for (const auto& l : ov.links) {
    doc["links"].push_back({{"downstream", l.downstream_id},
                            {"upstream", l.upstream_id},
                            {"available_tenths_kbps", l.available.tenths()},
                            {"allocated_tenths_kbps", l.allocated.tenths()}});
  }
  return doc;
}

Overlay overlay_from_doc(const json& doc) {
  Overlay ov;
  ov.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& r : doc.at("layer_spec").at("rates_tenths_kbps")) {
    ov.layers.rates.push_back(Bandwidth::from_tenths(r.get<std::int64_t>()));
  }
  for (const auto& c : doc.at("classes")) {
    ov.classes.push_back({c.at("id").get<int>(), c.at("reference_price").get<Price>(),
                          c.at("population_share").get<double>()});
  }
  for (const auto& p : doc.at("upstreams")) {
    Peer peer;
    peer.id = p.at("id").get<int>();
    peer.kind = PeerKind::upstream;
    peer.upload = Bandwidth::from_tenths(p.at("upload_tenths_kbps").get<std::int64_t>());
    ov.upstreams.push_back(peer);
  }
  for (const auto& p : doc.at("downstreams")) {
    Peer peer;
    peer.id = p.at("id").get<int>();
    peer.kind = PeerKind::downstream;
    peer.download = Bandwidth::from_tenths(p.at("download_tenths_kbps").get<std::int64_t>());
    peer.class_id = p.at("class_id").get<int>();
    peer.subscribed_level = p.at("subscribed_level").get<int>();
    ov.downstreams.push_back(peer);
  }
  for (const auto& l : doc.at("links")) {
    Link link;
    link.downstream_id = l.at("downstream").get<int>();
    link.upstream_id = l.at("upstream").get<int>();
    link.available = Bandwidth::from_tenths(l.at("available_tenths_kbps").get<std::int64_t>());
    link.allocated = Bandwidth::from_tenths(l.value("allocated_tenths_kbps", std::int64_t{0}));
    ov.links.push_back(link);
  }
  return ov;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace

std::string overlay_to_json(const Overlay& overlay) { return overlay_doc(overlay).dump(1); }

Overlay overlay_from_json(const std::string& text) { return overlay_from_doc(json::parse(text)); }

std::string result_to_json(const ScenarioResult& r) {
  ordered_json doc;
  doc["mode"] = to_string(r.mode);
  doc["max_rounds"] = r.max_rounds;
  doc["layer_rounds"] = r.layer_rounds;
  doc["overlay"] = overlay_doc(r.overlay);
  ordered_json grants = ordered_json::array();
  const int layers = r.layer_count();
  for (std::size_t l = 0; l < r.overlay.links.size(); ++l) {
    for (int k = 0; k < layers; ++k) {
      const auto& o = r.outcome(static_cast<int>(l), k);
      if (o.final_price == 0 && o.granted == Bandwidth{} && o.paid == 0) continue;
      grants.push_back({{"link", l},
                        {"downstream", r.overlay.links[l].downstream_id},
                        {"upstream", r.overlay.links[l].upstream_id},
                        {"layer", k},
                        {"granted_tenths_kbps", o.granted.tenths()},
                        {"paid_tenths", o.paid},
                        {"final_price", o.final_price}});
    }
  }
  doc["grants"] = grants;
  ordered_json residual = ordered_json::array();
  for (const auto& peer : r.overlay.downstreams) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < layers; ++k) row.push_back(r.residual_of(peer.id, k).tenths());
    residual.push_back(row);
  }
  doc["residual_tenths_kbps"] = residual;
  return doc.dump(1);
}

ScenarioResult result_from_json(const std::string& text) {
  const json doc = json::parse(text);
  ScenarioResult r;
  r.mode = mode_from_string(doc.at("mode").get<std::string>());
  r.max_rounds = doc.at("max_rounds").get<int>();
  r.layer_rounds = doc.at("layer_rounds").get<std::vector<int>>();
  r.overlay = overlay_from_doc(doc.at("overlay"));
  const int layers = r.layer_count();
  r.outcomes.assign(r.overlay.links.size() * static_cast<std::size_t>(layers), {});
  for (const auto& g : doc.at("grants")) {
    auto& o = r.outcomes.at(g.at("link").get<std::size_t>() * static_cast<std::size_t>(layers) +
                            g.at("layer").get<std::size_t>());
    o.granted = Bandwidth::from_tenths(g.at("granted_tenths_kbps").get<std::int64_t>());
    o.paid = g.at("paid_tenths").get<Payment>();
    o.final_price = g.at("final_price").get<Price>();
  }
  for (const auto& row : doc.at("residual_tenths_kbps")) {
    for (const auto& v : row) r.residual.push_back(Bandwidth::from_tenths(v.get<std::int64_t>()));
  }
  return r;
}

std::string report_to_json(const MetricsReport& m) {
  ordered_json doc;
  doc["mode"] = to_string(m.mode);
  doc["delivery_ratio"] = ordered_json::array();
  for (const auto& d : m.delivery) doc["delivery_ratio"].push_back(optional_number(d));
  doc["useless_ratio"] = m.useless_ratio;
  doc["cost_all"] = optional_number(m.cost_all);
  doc["cost_by_class"] = ordered_json::array();
  for (const auto& c : m.cost_by_class) doc["cost_by_class"].push_back(optional_number(c));
  doc["class_counts"] = m.class_counts;
  doc["convergence"] = {{"layer_rounds", m.convergence.layer_rounds},
                        {"max_rounds", m.convergence.max_rounds},
                        {"total_rounds", m.convergence.total_rounds},
                        {"limit", m.convergence.limit},
                        {"layers_at_limit", m.convergence.layers_at_limit}};
  return doc.dump(1);
}

namespace {

constexpr int kCsvLayers = 6;
constexpr int kCsvClasses = 3;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

}  // namespace

std::string csv_header() {
  std::ostringstream os;
  os << "seed,mode,n_upstream,n_downstream,degree,upload_lo,upload_hi";
  for (int k = 0; k < kCsvLayers; ++k) os << ",delivery_ratio_" << k;
  os << ",useless_ratio,cost_all,cost_q1,cost_q2,cost_q3,max_rounds,total_rounds,sweep_key,sweep_value";
  return os.str();
}

std::string csv_row(const RunLabel& label, const ScenarioConfig& c, const MetricsReport& m) {
  std::ostringstream os;
  os << label.seed << ',' << to_string(label.mode) << ',' << c.n_upstream << ',' << c.n_downstream << ','
     << c.degree << ',' << fmt_num(c.upload.lo) << ',' << fmt_num(c.upload.hi);
  for (int k = 0; k < kCsvLayers; ++k) {
    os << ',' << (k < static_cast<int>(m.delivery.size()) ? fmt_opt(m.delivery[static_cast<std::size_t>(k)]) : "");
  }
  os << ',' << fmt_num(m.useless_ratio) << ',' << fmt_opt(m.cost_all);
  for (int c_id = 0; c_id < kCsvClasses; ++c_id) {
    os << ','
       << (c_id < static_cast<int>(m.cost_by_class.size()) ? fmt_opt(m.cost_by_class[static_cast<std::size_t>(c_id)])
                                                           : "");
  }
  os << ',' << m.convergence.max_rounds << ',' << m.convergence.total_rounds << ',' << label.sweep_key << ','
     << (label.sweep_key.empty() ? "" : fmt_num(label.sweep_value));
  return os.str();
}

}  // namespace layercast
