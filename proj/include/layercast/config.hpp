#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "layercast/auction.hpp"
#include "layercast/units.hpp"

namespace layercast {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { proposed, baseline };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
GrantRule grant_rule_from_string(const std::string& name);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  bool operator==(const Range&) const = default;
};

struct ClassSpec {
  double share = 0.0;
  Price reference_price = 1;
  bool operator==(const ClassSpec&) const = default;
};

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;
  std::uint64_t count() const { return last - first + 1; }
  bool operator==(const SeedRange&) const = default;
};

/// One swept parameter: `key` takes each of `values` in turn.
struct SweepAxis {
  std::string key;
  std::vector<double> values;
  bool operator==(const SweepAxis&) const = default;
};

/// Every knob of an experiment. Defaults reproduce the reference setup:
/// six layers (200 + 5 x 100 kbps), upload U[256, 2048], download
/// U[256, 1024], classes 10/30/60 %.
struct ScenarioConfig {
  int n_upstream = 250;
  int n_downstream = 500;
  int degree = 4;
  Range upload{256.0, 2048.0};
  Range download{256.0, 1024.0};
  Range link{256.0, 2048.0};
  std::vector<double> layer_rates{200.0, 100.0, 100.0, 100.0, 100.0, 100.0};
  std::vector<ClassSpec> classes{{0.10, 4}, {0.30, 2}, {0.60, 1}};
  std::vector<Mode> modes{Mode::proposed, Mode::baseline};
  SeedRange seeds{};
  std::optional<SweepAxis> sweep;
  std::string out_dir = "out";
  bool trace = false;
  /// Per-layer round limit; 0 means p_max + 2.
  int max_rounds = 0;
  GrantRule grant_rule = GrantRule::cumulative;

  Price max_reference_price() const;
  int effective_max_rounds() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError naming the offending key and constraint.
void validate_config(const ScenarioConfig& config);

/// Parses a JSON config file; missing keys take defaults, unknown keys are
/// rejected.
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(const std::string& json_text);
std::string config_to_json(const ScenarioConfig& config);

/// "A..B" (inclusive) or a single integer.
SeedRange parse_seeds(const std::string& spec);

/// "key=a..b:step" or "key=v1,v2,...".
SweepAxis parse_sweep(const std::string& spec);

/// Returns a copy of `config` with the sweep key set to `value`. Supported
/// keys: upload_mid, download_mid, link_mid (scale the range so its midpoint
/// becomes `value`), n_upstream, n_downstream, size (scales both counts,
/// keeping their ratio), degree, q1_share (other classes keep their
/// relative proportions).
ScenarioConfig apply_sweep(const ScenarioConfig& config, const std::string& key, double value);

std::vector<Mode> parse_modes(const std::string& list);

}  // namespace layercast
