// percept: command-line entry point.
//
//   percept scenario list | show <id> | export <id> <path>
//   percept run   [--config FILE] [flags]
//   percept sweep [--config FILE] [flags]
//   percept report --sweep DIR [--format csv|json]

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "percept/config.hpp"
#include "percept/json_util.hpp"

namespace fs = std::filesystem;
using namespace percept;

namespace {

struct CliError : std::runtime_error {
  CliError(std::string type, const std::string& message) : std::runtime_error(message), type(std::move(type)) {}
  std::string type;
};

void print_error(const std::string& type, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = {{"type", type}, {"message", message}};
  std::cerr << err.dump() << std::endl;
}

void warn(const std::string& message) { std::cerr << "warning: " << message << std::endl; }

struct Overrides {
  std::optional<std::string> scenario;
  std::optional<std::string> sensor;
  std::optional<double> hfov;
  std::optional<double> vfov;
  std::optional<double> range;
  std::optional<std::string> predictor;
  std::optional<std::string> impute;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> noise;
  std::optional<std::string> out_dir;
  std::optional<int> parallel;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario, "Preset id, e.g. Sc-01");
  cmd->add_option("--sensor", o.sensor, "Sensor modality")->check(CLI::IsMember({"radar", "camera"}));
  cmd->add_option("--hfov-deg", o.hfov, "Horizontal field of view in degrees");
  cmd->add_option("--vfov-deg", o.vfov, "Vertical field of view in degrees");
  cmd->add_option("--range-m", o.range, "Maximum range in meters");
  cmd->add_option("--predictor", o.predictor, "cv | ca | social | external:<cmd-or-addr>");
  cmd->add_option("--impute", o.impute, "none | linear")->check(CLI::IsMember({"none", "linear"}));
  cmd->add_option("--seed", o.seed, "Sensor noise seed");
  cmd->add_option("--noise", o.noise, "on | off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out-dir", o.out_dir, "Output root directory");
}

// Writes a flag value into the run document, warning when it replaces a
// value the config file set.
template <typename T>
void put(nlohmann::json& node, const char* key, const std::optional<T>& value, const char* flag, bool from_file) {
  if (!value) return;
  if (from_file && node.contains(key)) warn(std::string(flag) + " overrides the config file value");
  node[key] = *value;
}

void apply_overrides(nlohmann::json& run, const Overrides& o, bool from_file) {
  put(run, "scenario", o.scenario, "--scenario", from_file);
  put(run, "predictor", o.predictor, "--predictor", from_file);
  put(run, "impute", o.impute, "--impute", from_file);
  if (!run.contains("sensor") || !run["sensor"].is_object()) run["sensor"] = nlohmann::json::object();
  auto& s = run["sensor"];
  put(s, "modality", o.sensor, "--sensor", from_file);
  put(s, "hfov_deg", o.hfov, "--hfov-deg", from_file);
  put(s, "vfov_deg", o.vfov, "--vfov-deg", from_file);
  put(s, "range_m", o.range, "--range-m", from_file);
  put(s, "seed", o.seed, "--seed", from_file);
  if (o.noise) put(s, "noise_enabled", std::optional<bool>(*o.noise == "on"), "--noise", from_file);
}

nlohmann::json load_config(const std::string& path) {
  try {
    return read_json_file(path);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError("io_error", e.what());
  }
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream o;
  o << std::setprecision(6) << *v;
  return o.str();
}

// ---------------------------------------------------------------------------

int cmd_scenario_list() {
  for (const auto& p : preset_catalogue()) std::cout << p.id << "  " << p.description << "\n";
  return 0;
}

int cmd_scenario_show(const std::string& id) {
  const auto spec = preset_scenario(id);
  std::cout << spec.id << ": " << spec.description << "\n" << to_json(spec).dump(2) << "\n";
  return 0;
}

int cmd_scenario_export(const std::string& id, const std::string& path) {
  const auto spec = preset_scenario(id);
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw CliError("io_error", "directory '" + parent.string() + "' is not an existing directory");
  try {
    write_text_file(path, to_json(spec).dump(2) + "\n");
  } catch (const std::exception& e) {
    throw CliError("io_error", e.what());
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_run(const std::optional<std::string>& config_path, const Overrides& o) {
  nlohmann::json doc = config_path ? load_config(*config_path) : nlohmann::json{{"version", kConfigVersion}};
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  const bool explicit_test_id = doc.contains("test_id");
  if (explicit_test_id && (o.scenario || o.hfov)) {
    warn("--scenario/--hfov-deg do not change the config's explicit test_id");
  }
  apply_overrides(doc, o, config_path.has_value());
  if (o.out_dir && doc.contains("out_dir")) warn("--out-dir overrides the config file value");
  const auto cfg = parse_run_config(doc);
  const std::string root = resolve_out_dir(o.out_dir, cfg.out_dir);
  const std::string dir = (fs::path(root) / "runs" / cfg.run.test_id).string();

  const auto result = execute_run(cfg.run, dir);
  std::cout << "test_id:    " << result.test_id << "\n"
            << "run_dir:    " << dir << "\n"
            << "status:     " << result.status << "\n"
            << "divergence: " << fmt(result.divergence_rmse) << " m\n"
            << "gap:        " << fmt(result.gap) << " m\n";
  if (result.status == "failed") throw CliError("run_failed", result.error);
  return 0;
}

int cmd_sweep(const std::optional<std::string>& config_path, const Overrides& o) {
  nlohmann::json doc = config_path ? load_config(*config_path) : nlohmann::json(default_sweep_document());
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  if (!doc.contains("base") || !doc["base"].is_object()) doc["base"] = nlohmann::json::object();
  if (o.scenario) {
    if (doc.contains("scenarios")) warn("--scenario overrides the config file scenarios");
    doc["scenarios"] = {*o.scenario};
  }
  if (o.sensor) {
    if (doc.contains("modalities")) warn("--sensor overrides the config file modalities");
    doc["modalities"] = {*o.sensor};
  }
  Overrides rest = o;
  rest.scenario.reset();
  rest.sensor.reset();
  apply_overrides(doc["base"], rest, config_path.has_value());
  if (o.parallel) {
    if (config_path && doc.contains("parallel")) warn("--parallel overrides the config file value");
    doc["parallel"] = *o.parallel;
  } else if (!doc.contains("parallel")) {
    doc["parallel"] = std::max(1u, std::thread::hardware_concurrency());
  }
  if (o.out_dir && doc.contains("out_dir")) warn("--out-dir overrides the config file value");

  const auto cfg = parse_sweep_config(doc);
  const std::string root = resolve_out_dir(o.out_dir, cfg.out_dir);
  const std::string dir = (fs::path(root) / "sweep" / cfg.sweep.name).string();
  const auto outcome = run_sweep(cfg.sweep, dir);

  std::cout << "sweep " << cfg.sweep.name << " (" << outcome.runs.size() << " runs) -> " << dir << "\n";
  for (const auto& g : outcome.groups) {
    std::cout << "\n" << g.scenario_id << " / " << g.modality << "\n";
    std::cout << "  " << std::left << std::setw(10) << cfg.sweep.parameter << std::setw(14) << "divergence_m"
              << "ok/no_det/failed\n";
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      std::cout << "  " << std::setw(10) << g.values[i] << std::setw(14) << fmt(g.aggregate[i])
                << g.successful_runs[i] << "/" << g.no_detection_runs[i] << "/" << g.failed_runs[i]
                << ((g.selected && *g.selected == g.values[i]) ? "  <- selected" : "") << "\n";
    }
    std::cout << "  selection: " << (g.selected ? fmt(*g.selected) : std::string("none")) << "\n";
  }
  return 0;
}

int cmd_report(const std::string& sweep_dir, const std::string& format) {
  if (!fs::is_directory(sweep_dir)) throw CliError("not_found", "sweep directory not found: '" + sweep_dir + "'");
  SweepSpec sweep;
  const auto outcome = load_sweep(sweep_dir, sweep);
  const ReportFormat f = format == "csv" ? ReportFormat::csv : format == "json" ? ReportFormat::json : ReportFormat::both;
  emit_report(sweep, outcome, sweep_dir, f);
  if (f != ReportFormat::json) std::cout << "wrote " << (fs::path(sweep_dir) / "metrics.csv").string() << " and curves/\n";
  if (f != ReportFormat::csv) std::cout << "wrote " << (fs::path(sweep_dir) / "summary.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception sensor sweep harness"};
  app.require_subcommand(1);

  auto* scenario = app.add_subcommand("scenario", "List, show or export scenario presets");
  scenario->require_subcommand(1);
  scenario->add_subcommand("list", "List presets");
  std::string show_id;
  auto* show = scenario->add_subcommand("show", "Print a preset");
  show->add_option("id", show_id)->required();
  std::string export_id;
  std::string export_path;
  auto* exp = scenario->add_subcommand("export", "Write a preset as JSON");
  exp->add_option("id", export_id)->required();
  exp->add_option("path", export_path)->required();

  Overrides run_flags;
  std::optional<std::string> run_config;
  auto* run = app.add_subcommand("run", "Execute one run end to end");
  run->add_option("--config", run_config, "Run config JSON");
  add_override_flags(run, run_flags);

  Overrides sweep_flags;
  std::optional<std::string> sweep_config;
  auto* sweep = app.add_subcommand("sweep", "Execute a parameter sweep");
  sweep->add_option("--config", sweep_config, "Sweep config JSON (default: HFOV grid over all presets)");
  add_override_flags(sweep, sweep_flags);
  sweep->add_option("--parallel", sweep_flags.parallel, "Worker threads")->check(CLI::PositiveNumber);

  std::string report_dir;
  std::string report_format = "csv";
  auto* report = app.add_subcommand("report", "Re-emit reports from a sweep directory");
  report->add_option("--sweep", report_dir, "Sweep directory")->required();
  report->add_option("--format", report_format)->check(CLI::IsMember({"csv", "json", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (scenario->parsed()) {
      if (show->parsed()) return cmd_scenario_show(show_id);
      if (exp->parsed()) return cmd_scenario_export(export_id, export_path);
      return cmd_scenario_list();
    }
    if (run->parsed()) return cmd_run(run_config, run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_flags);
    if (report->parsed()) return cmd_report(report_dir, report_format);
  } catch (const CliError& e) {
    print_error(e.type, e.what());
    return 1;
  } catch (const ConfigError& e) {
    print_error("config_error", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    print_error("invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime_error", e.what());
    return 1;
  }
  return 0;
}
