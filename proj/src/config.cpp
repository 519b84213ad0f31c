#include "layercast/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace layercast {

using nlohmann::json;

std::string to_string(Mode mode) { return mode == Mode::proposed ? "proposed" : "baseline"; }

Mode mode_from_string(const std::string& name) {
  if (name == "proposed") return Mode::proposed;
  if (name == "baseline") return Mode::baseline;
  throw ConfigError("modes: unknown mode '" + name + "' (expected proposed or baseline)");
}

GrantRule grant_rule_from_string(const std::string& name) {
  if (name == "reallocate") return GrantRule::reallocate;
  if (name == "cumulative") return GrantRule::cumulative;
  throw ConfigError("grant_rule: unknown rule '" + name + "' (expected reallocate or cumulative)");
}

Price ScenarioConfig::max_reference_price() const {
  Price p = 1;
  for (const auto& c : classes) p = std::max(p, c.reference_price);
  return p;
}

int ScenarioConfig::effective_max_rounds() const {
  return max_rounds > 0 ? max_rounds : static_cast<int>(max_reference_price()) + 2;
}

namespace {

void check_range(const Range& r, const char* key) {
  if (!(r.lo > 0.0) || !(r.lo <= r.hi) || !std::isfinite(r.hi)) {
    throw ConfigError(std::string(key) + ": range must satisfy 0 < min <= max");
  }
}

}  // namespace

void validate_config(const ScenarioConfig& c) {
  if (c.n_upstream < 0) throw ConfigError("n_upstream: must be >= 0");
  if (c.n_downstream < 0) throw ConfigError("n_downstream: must be >= 0");
  if (c.degree < 1) throw ConfigError("degree: must be >= 1");
  if (c.n_downstream > 0 && c.degree > c.n_upstream) {
    throw ConfigError("degree: connectivity degree exceeds the number of upstream peers");
  }
  check_range(c.upload, "upload_kbps");
  check_range(c.download, "download_kbps");
  check_range(c.link, "link_kbps");
  if (c.layer_rates.empty()) throw ConfigError("layer_rates_kbps: at least one layer required");
  for (double r : c.layer_rates) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigError("layer_rates_kbps: every rate must be positive");
    }
  }
  if (c.classes.empty()) throw ConfigError("classes: at least one class required");
  double sum = 0.0;
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    const auto& cls = c.classes[i];
    if (cls.share < 0.0 || cls.share > 1.0) throw ConfigError("classes.share: must lie in [0, 1]");
    if (cls.reference_price < 1) {
      throw ConfigError("classes.reference_price: must be a positive integer");
    }
    if (i > 0 && cls.reference_price >= c.classes[i - 1].reference_price) {
      throw ConfigError("classes.reference_price: must strictly decrease from class 1 downward");
    }
    sum += cls.share;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "classes.share: shares must sum to 1 (got " << sum << ")";
    throw ConfigError(os.str());
  }
  if (c.modes.empty()) throw ConfigError("modes: at least one mode required");
  if (c.seeds.last < c.seeds.first) throw ConfigError("seeds: range end precedes start");
  if (c.max_rounds < 0) throw ConfigError("max_rounds: must be >= 0");
  if (c.sweep) {
    if (c.sweep->values.empty()) throw ConfigError("sweep: no values");
    for (double v : c.sweep->values) (void)apply_sweep(c, c.sweep->key, v);
  }
}

SeedRange parse_seeds(const std::string& spec) {
  auto to_u64 = [&spec](const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) {
      throw ConfigError("seeds: expected 'A..B' or an integer, got '" + spec + "'");
    }
    return static_cast<std::uint64_t>(std::stoull(s));
  };
  const auto dots = spec.find("..");
  SeedRange r;
  if (dots == std::string::npos) {
    r.first = r.last = to_u64(spec);
  } else {
    r.first = to_u64(spec.substr(0, dots));
    r.last = to_u64(spec.substr(dots + 2));
  }
  if (r.last < r.first) throw ConfigError("seeds: range end precedes start in '" + spec + "'");
  return r;
}

SweepAxis parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("sweep: expected KEY=a..b:step or KEY=v1,v2,..., got '" + spec + "'");
  }
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  const std::string body = spec.substr(eq + 1);
  auto num = [&spec](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad number '" + s + "' in '" + spec + "'");
    }
  };
  const auto dots = body.find("..");
  if (dots != std::string::npos) {
    const auto colon = body.find(':', dots);
    if (colon == std::string::npos) throw ConfigError("sweep: range needs ':step' in '" + spec + "'");
    const double a = num(body.substr(0, dots));
    const double b = num(body.substr(dots + 2, colon - dots - 2));
    const double step = num(body.substr(colon + 1));
    if (!(step > 0.0) || b < a) throw ConfigError("sweep: need a <= b and step > 0 in '" + spec + "'");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) axis.values.push_back(a + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(num(item));
  }
  if (axis.values.empty()) throw ConfigError("sweep: no values in '" + spec + "'");
  return axis;
}

ScenarioConfig apply_sweep(const ScenarioConfig& config, const std::string& key, double value) {
  ScenarioConfig c = config;
  auto rescale = [&](Range& r) {
    if (!(value > 0.0)) throw ConfigError("sweep: " + key + " must be positive");
    const double f = value / r.mid();
    r.lo *= f;
    r.hi *= f;
  };
  auto as_count = [&](double v) {
    if (v < 0.0 || v != std::floor(v)) throw ConfigError("sweep: " + key + " must be a whole number");
    return static_cast<int>(v);
  };
  if (key == "upload_mid") {
    rescale(c.upload);
  } else if (key == "download_mid") {
    rescale(c.download);
  } else if (key == "link_mid") {
    rescale(c.link);
  } else if (key == "n_upstream") {
    c.n_upstream = as_count(value);
  } else if (key == "n_downstream") {
    c.n_downstream = as_count(value);
  } else if (key == "size") {
    const double ratio = config.n_downstream > 0
                             ? static_cast<double>(config.n_upstream) / config.n_downstream
                             : 1.0;
    c.n_downstream = as_count(value);
    c.n_upstream = std::max(c.degree, static_cast<int>(std::lround(ratio * c.n_downstream)));
  } else if (key == "degree") {
    c.degree = as_count(value);
  } else if (key == "q1_share") {
    if (value < 0.0 || value > 1.0) throw ConfigError("sweep: q1_share must lie in [0, 1]");
    double rest = 0.0;
    for (std::size_t i = 1; i < c.classes.size(); ++i) rest += config.classes[i].share;
    c.classes[0].share = value;
    for (std::size_t i = 1; i < c.classes.size(); ++i) {
      c.classes[i].share = rest > 0.0 ? config.classes[i].share / rest * (1.0 - value)
                                      : (1.0 - value) / static_cast<double>(c.classes.size() - 1);
    }
  } else {
    throw ConfigError("sweep: unknown key '" + key + "'");
  }
  return c;
}

std::vector<Mode> parse_modes(const std::string& list) {
  std::vector<Mode> modes;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) modes.push_back(mode_from_string(item));
  }
  if (modes.empty()) throw ConfigError("modes: empty list");
  return modes;
}

namespace {

Range range_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(key) + ": expected [min, max]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

int int_from(const json& j, const char* key) {
  if (!j.is_number_integer()) throw ConfigError(std::string(key) + ": expected an integer");
  return j.get<int>();
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  static const std::set<std::string> known{
      "n_upstream", "n_downstream", "degree",  "upload_kbps", "download_kbps", "link_kbps",
      "layer_rates_kbps", "classes", "modes",  "seeds",       "sweep",         "out_dir",
      "trace",      "max_rounds",       "grant_rule"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw ConfigError(key + ": unknown key");
  }

  ScenarioConfig c;
  if (doc.contains("n_upstream")) c.n_upstream = int_from(doc["n_upstream"], "n_upstream");
  if (doc.contains("n_downstream")) c.n_downstream = int_from(doc["n_downstream"], "n_downstream");
  if (doc.contains("degree")) c.degree = int_from(doc["degree"], "degree");
  if (doc.contains("upload_kbps")) c.upload = range_from(doc["upload_kbps"], "upload_kbps");
  if (doc.contains("download_kbps")) c.download = range_from(doc["download_kbps"], "download_kbps");
  if (doc.contains("link_kbps")) c.link = range_from(doc["link_kbps"], "link_kbps");
  if (doc.contains("layer_rates_kbps")) {
    const auto& rates = doc["layer_rates_kbps"];
    if (!rates.is_array()) throw ConfigError("layer_rates_kbps: expected an array of numbers");
    c.layer_rates.clear();
    for (const auto& r : rates) {
      if (!r.is_number()) throw ConfigError("layer_rates_kbps: expected an array of numbers");
      c.layer_rates.push_back(r.get<double>());
    }
  }
  if (doc.contains("classes")) {
    const auto& classes = doc["classes"];
    if (!classes.is_array()) throw ConfigError("classes: expected an array of objects");
    c.classes.clear();
    for (const auto& cls : classes) {
      if (!cls.is_object()) throw ConfigError("classes: expected an array of objects");
      for (const auto& [key, _] : cls.items()) {
        if (key != "share" && key != "reference_price") {
          throw ConfigError("classes." + key + ": unknown key");
        }
      }
      if (!cls.contains("share") || !cls["share"].is_number()) {
        throw ConfigError("classes.share: required number");
      }
      if (!cls.contains("reference_price") || !cls["reference_price"].is_number_integer()) {
        throw ConfigError("classes.reference_price: required integer");
      }
      c.classes.push_back({cls["share"].get<double>(), cls["reference_price"].get<Price>()});
    }
  }
  if (doc.contains("modes")) {
    const auto& modes = doc["modes"];
    if (!modes.is_array()) throw ConfigError("modes: expected an array of strings");
    c.modes.clear();
    for (const auto& m : modes) {
      if (!m.is_string()) throw ConfigError("modes: expected an array of strings");
      c.modes.push_back(mode_from_string(m.get<std::string>()));
    }
  }
  if (doc.contains("seeds")) {
    const auto& s = doc["seeds"];
    if (s.is_number_unsigned()) {
      c.seeds.first = c.seeds.last = s.get<std::uint64_t>();
    } else if (s.is_string()) {
      c.seeds = parse_seeds(s.get<std::string>());
    } else {
      throw ConfigError("seeds: expected a non-negative integer or 'A..B'");
    }
  }
  if (doc.contains("sweep")) {
    if (!doc["sweep"].is_string()) throw ConfigError("sweep: expected 'KEY=SPEC'");
    c.sweep = parse_sweep(doc["sweep"].get<std::string>());
  }
  if (doc.contains("out_dir")) {
    if (!doc["out_dir"].is_string()) throw ConfigError("out_dir: expected a string");
    c.out_dir = doc["out_dir"].get<std::string>();
  }
  if (doc.contains("trace")) {
    if (!doc["trace"].is_boolean()) throw ConfigError("trace: expected a boolean");
    c.trace = doc["trace"].get<bool>();
  }
  if (doc.contains("max_rounds")) c.max_rounds = int_from(doc["max_rounds"], "max_rounds");
  if (doc.contains("grant_rule")) {
    if (!doc["grant_rule"].is_string()) throw ConfigError("grant_rule: expected a string");
    c.grant_rule = grant_rule_from_string(doc["grant_rule"].get<std::string>());
  }

  validate_config(c);
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json doc;
  doc["n_upstream"] = c.n_upstream;
  doc["n_downstream"] = c.n_downstream;
  doc["degree"] = c.degree;
  doc["upload_kbps"] = {c.upload.lo, c.upload.hi};
  doc["download_kbps"] = {c.download.lo, c.download.hi};
  doc["link_kbps"] = {c.link.lo, c.link.hi};
  doc["layer_rates_kbps"] = c.layer_rates;
  doc["classes"] = json::array();
  for (const auto& cls : c.classes) {
    doc["classes"].push_back({{"share", cls.share}, {"reference_price", cls.reference_price}});
  }
  doc["modes"] = json::array();
  for (Mode m : c.modes) doc["modes"].push_back(to_string(m));
  doc["seeds"] = std::to_string(c.seeds.first) + ".." + std::to_string(c.seeds.last);
  if (c.sweep) {
    std::ostringstream os;
    os << c.sweep->key << '=';
    for (std::size_t i = 0; i < c.sweep->values.size(); ++i) {
      os << (i ? "," : "") << c.sweep->values[i];
    }
    doc["sweep"] = os.str();
  }
  doc["out_dir"] = c.out_dir;
  doc["trace"] = c.trace;
  doc["max_rounds"] = c.max_rounds;
  doc["grant_rule"] = to_string(c.grant_rule);
  return doc.dump(2);
}

}  // namespace layercast
