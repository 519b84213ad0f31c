// layercast: run, summarize and replay layered-streaming auction experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "layercast/config.hpp"
#include "layercast/io.hpp"
#include "layercast/sweep.hpp"

namespace fs = std::filesystem;
using namespace layercast;

namespace {

enum Exit { ok = 0, run_failed = 1, bad_input = 2, io_failed = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("layercast");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("LAYERCAST_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour real level names.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("LAYERCAST_LOG={} is not a log level, keeping info", env);
    }
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Overlays depend on (seed, sweep point) only; reports and traces also on
// the mode.
std::string point_tag(const RunSpec& s) {
  std::string tag = "s" + std::to_string(s.seed);
  if (s.sweep_value) tag += "_x" + std::to_string(s.sweep_index);
  return tag;
}

std::string run_tag(const RunSpec& s) { return point_tag(s) + "_" + to_string(s.mode); }

struct CommonFlags {
  std::string config;
  std::string seeds;
  std::string modes;
  std::string sweep;
  std::string out;
  bool trace = false;
};

ScenarioConfig load_config(const CommonFlags& f) {
  ScenarioConfig c = f.config.empty() ? ScenarioConfig{} : parse_config(f.config);
  if (!f.seeds.empty()) c.seeds = parse_seeds(f.seeds);
  if (!f.modes.empty()) c.modes = parse_modes(f.modes);
  if (!f.sweep.empty()) c.sweep = parse_sweep(f.sweep);
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.trace) c.trace = true;
  validate_config(c);
  return c;
}

void print_summary(const std::vector<RunOutput>& runs) {
  struct Acc {
    int n = 0;
    std::vector<double> delivery = std::vector<double>(6, 0.0);
    double useless = 0, cost = 0;
    int rounds = 0;
  };
  std::map<std::pair<std::size_t, std::string>, Acc> acc;
  std::map<std::size_t, std::string> point_label;
  for (const auto& r : runs) {
    if (!r.error.empty()) continue;
    auto& a = acc[{r.spec.sweep_index, to_string(r.spec.mode)}];
    ++a.n;
    for (std::size_t k = 0; k < a.delivery.size() && k < r.report.delivery.size(); ++k) {
      a.delivery[k] += r.report.delivery[k].value_or(0.0);
    }
    a.useless += r.report.useless_ratio;
    a.cost += r.report.cost_all.value_or(0.0);
    a.rounds = std::max(a.rounds, r.report.convergence.max_rounds);
    point_label[r.spec.sweep_index] = r.spec.sweep_value ? fmt::format("{:g}", *r.spec.sweep_value) : "-";
  }
  fmt::print("{:>8} {:>9} {:>4} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>8} {:>6}\n", "sweep", "mode", "n",
             "d0", "d1", "d2", "d3", "d4", "d5", "useless", "cost", "rounds");
  for (const auto& [key, a] : acc) {
    fmt::print("{:>8} {:>9} {:>4}", point_label[key.first], key.second, a.n);
    for (double d : a.delivery) fmt::print(" {:>6.3f}", d / a.n);
    fmt::print(" {:>8.4f} {:>8.3f} {:>6}\n", a.useless / a.n, a.cost / a.n, a.rounds);
  }
}

int cmd_run(const CommonFlags& flags, bool serial) {
  const ScenarioConfig config = load_config(flags);
  const auto specs = expand_runs(config);
  spdlog::info("{} runs ({} seeds, {} modes{})", specs.size(), config.seeds.count(), config.modes.size(),
               config.sweep ? ", sweep " + config.sweep->key : "");
  const auto runs = run_sweep(specs, serial ? Execution::serial : Execution::parallel, config.trace);

  const fs::path out = config.out_dir;
  write_file(out / "config.json", config_to_json(config) + "\n");
  std::ostringstream csv;
  csv << csv_header() << '\n';
  int failed = 0;
  for (const auto& r : runs) {
    const auto tag = run_tag(r.spec);
    if (!r.error.empty()) {
      ++failed;
      spdlog::error("run {} failed: {}", tag, r.error);
      continue;
    }
    const RunLabel label{r.spec.seed, r.spec.mode, config.sweep ? config.sweep->key : std::string(),
                         r.spec.sweep_value.value_or(0.0)};
    csv << csv_row(label, r.spec.config, r.report) << '\n';
    write_file(out / "reports" / (tag + ".json"), report_to_json(r.report) + "\n");
    const auto overlay_path = out / "overlays" / (point_tag(r.spec) + ".json");
    if (!fs::exists(overlay_path)) write_file(overlay_path, overlay_to_json(r.result.overlay) + "\n");
    if (config.trace) write_file(out / "traces" / (tag + ".jsonl"), r.trace);
    spdlog::debug("run {} done: {} rounds", tag, r.report.convergence.total_rounds);
  }
  write_file(out / "runs.csv", csv.str());
  print_summary(runs);
  spdlog::info("wrote {}", (out / "runs.csv").string());
  if (failed > 0) {
    spdlog::error("{} of {} runs did not complete", failed, runs.size());
    return run_failed;
  }
  return ok;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Means over seeds of every numeric column, one row per (sweep point, mode).
int cmd_summarize(const std::string& csv_path, const std::string& out_dir) {
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError(csv_path + ": empty file");
  const auto header = split(line, ',');
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw IoError(csv_path + ": missing column " + name);
  };
  const std::size_t mode_c = col("mode"), seed_c = col("seed"), key_c = col("sweep_key"),
                    value_c = col("sweep_value");

  struct Group {
    std::vector<double> sum;
    std::vector<int> count;
    int rows = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  std::map<std::string, std::vector<std::string>> group_key;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw IoError(csv_path + ": ragged row: " + line);
    const std::string id = cells[key_c] + "\x1f" + cells[value_c] + "\x1f" + cells[mode_c];
    auto [it, fresh] = groups.try_emplace(id);
    if (fresh) {
      order.push_back(id);
      group_key[id] = {cells[key_c], cells[value_c], cells[mode_c]};
      it->second.sum.assign(header.size(), 0.0);
      it->second.count.assign(header.size(), 0);
    }
    auto& g = it->second;
    ++g.rows;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == mode_c || i == seed_c || i == key_c || i == value_c || cells[i].empty()) continue;
      g.sum[i] += std::stod(cells[i]);
      ++g.count[i];
    }
  }

  std::ostringstream os;
  os << "sweep_key,sweep_value,mode,n_runs";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == mode_c || i == seed_c || i == key_c || i == value_c) continue;
    os << ",mean_" << header[i];
  }
  os << '\n';
  for (const auto& id : order) {
    const auto& g = groups[id];
    const auto& k = group_key[id];
    os << k[0] << ',' << k[1] << ',' << k[2] << ',' << g.rows;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == mode_c || i == seed_c || i == key_c || i == value_c) continue;
      os << ',';
      if (g.count[i] > 0) os << fmt::format("{:.9g}", g.sum[i] / g.count[i]);
    }
    os << '\n';
  }
  if (out_dir.empty()) {
    std::cout << os.str();
  } else {
    write_file(fs::path(out_dir) / "summary.csv", os.str());
    spdlog::info("wrote {}", (fs::path(out_dir) / "summary.csv").string());
  }
  return ok;
}

int cmd_replay(const std::string& overlay_path, const CommonFlags& flags) {
  const ScenarioConfig config = load_config(flags);
  const Overlay overlay = overlay_from_json(read_file(overlay_path));
  if (const auto v = validate_overlay(overlay); !v.empty()) {
    for (const auto& x : v) spdlog::error("{}: {}", x.subject, x.message);
    return bad_input;
  }
  int status = ok;
  for (Mode mode : config.modes) {
    std::ostringstream trace;
    SimParams params;
    params.max_rounds = config.max_rounds;
    params.grant_rule = config.grant_rule;
    params.trace = config.trace ? &trace : nullptr;
    try {
      const auto result = run_mode(mode, overlay, params);
      const auto report = report_to_json(build_report(result)) + "\n";
      if (flags.out.empty()) {
        std::cout << report;
      } else {
        const std::string tag = "s" + std::to_string(overlay.seed) + "_" + to_string(mode);
        write_file(fs::path(flags.out) / (tag + ".json"), report);
        if (config.trace) write_file(fs::path(flags.out) / (tag + ".jsonl"), trace.str());
      }
    } catch (const NonConvergence& e) {
      spdlog::error("{} replay failed: {}", to_string(mode), e.what());
      status = run_failed;
    }
  }
  return status;
}

int cmd_validate(const std::string& path) {
  const auto config = parse_config(path);
  std::cout << config_to_json(config) << '\n';
  spdlog::info("{}: ok ({} runs)", path, expand_runs(config).size());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Auction-based bandwidth allocation for layered P2P streaming"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  bool serial = false;
  auto* run = app.add_subcommand("run", "Run every (seed, sweep value, mode) combination");
  run->add_option("--config", run_flags.config, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--seeds", run_flags.seeds, "Seed or inclusive range A..B");
  run->add_option("--modes", run_flags.modes, "Comma list of proposed,baseline");
  run->add_option("--sweep", run_flags.sweep, "KEY=a..b:step or KEY=v1,v2,...");
  run->add_option("--out", run_flags.out, "Output directory");
  run->add_flag("--trace", run_flags.trace, "Write per-round JSON-lines traces");
  run->add_flag("--serial", serial, "Run on one thread");

  std::string csv_path, summary_out;
  auto* summarize = app.add_subcommand("summarize", "Average a runs.csv over seeds");
  summarize->add_option("csv", csv_path, "runs.csv written by run")->required()->check(CLI::ExistingFile);
  summarize->add_option("--out", summary_out, "Write summary.csv here instead of stdout");

  CommonFlags replay_flags;
  std::string overlay_path;
  auto* replay = app.add_subcommand("replay", "Re-run a saved overlay and print its report");
  replay->add_option("--overlay", overlay_path, "Overlay JSON written by run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--config", replay_flags.config, "JSON config (grant rule, round limit)")
      ->check(CLI::ExistingFile);
  replay->add_option("--modes", replay_flags.modes, "Comma list of proposed,baseline");
  replay->add_option("--out", replay_flags.out, "Write reports here instead of stdout");
  replay->add_flag("--trace", replay_flags.trace, "Write per-round JSON-lines traces (needs --out)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "Check a config file and print it with defaults");
  validate->add_option("--config,config", validate_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags, serial);
    if (*summarize) return cmd_summarize(csv_path, summary_out);
    if (*replay) return cmd_replay(overlay_path, replay_flags);
    if (*validate) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return bad_input;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return io_failed;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return io_failed;
  }
  return ok;
}
