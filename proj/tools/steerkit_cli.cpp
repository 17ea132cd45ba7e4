// Command-line front end: run scenarios, print presets, validate engines.

#include "steerkit/cli/runner.hpp"
#include "steerkit/cli/scenario.hpp"
#include "steerkit/cli/svg.hpp"
#include "steerkit/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace steerkit;
using namespace steerkit::cli;

enum ExitCode { exit_ok = 0, exit_validation_failed = 1, exit_config = 2, exit_runtime = 3 };

void report_error(const std::string& kind, const std::string& message, const std::string& context) {
  nlohmann::json rec{{"error", {{"kind", kind}, {"message", message}, {"context", context}}}};
  std::cerr << rec.dump() << "\n";
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("STEERKIT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::ConfigError, std::string("STEERKIT_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

struct RunArgs {
  std::string config;
  std::string preset_name;
  std::string output;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string svg;
};

Scenario load(const RunArgs& a) {
  if (!a.config.empty() && !a.preset_name.empty()) fail(ErrorKind::ConfigError, "give either --config or --preset");
  if (!a.preset_name.empty()) return preset(a.preset_name);
  if (a.config.empty()) fail(ErrorKind::ConfigError, "--config PATH or --preset NAME is required");
  return load_scenario(a.config);
}

void open_and_write(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::ConfigError, "cannot write '" + path + "'");
  body(out);
  if (!out) fail(ErrorKind::ConfigError, "write to '" + path + "' failed");
}

int emit(const RunRecord& rec, const RunArgs& a) {
  const std::string path = !a.output.empty() ? a.output : rec.scenario.output;
  open_and_write(path, [&](std::ostream& os) {
    if (a.format == "json") os << record_json(rec).dump(2) << "\n";
    else write_csv(rec, os);
  });
  if (!a.svg.empty()) {
    std::ofstream out(a.svg);
    if (!out) fail(ErrorKind::ConfigError, "cannot write '" + a.svg + "'");
    if (!write_svg(rec, out)) std::cerr << "no preview for mode " << to_string(rec.scenario.mode) << "\n";
  }
  for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
  if (is_validation(rec.scenario.mode)) {
    std::cerr << "max relative error " << rec.summary.value("max_rel_error", nan_value) << " (tolerance "
              << rec.summary.value("tolerance", nan_value) << "): " << (rec.passed ? "pass" : "FAIL") << "\n";
    if (!rec.passed) return exit_validation_failed;
  }
  return exit_ok;
}

// A curve scenario validates as an engine comparison over its own sweep.
Scenario as_validation(Scenario s) {
  if (s.mode == Mode::ValidateOracle || s.mode == Mode::ValidateAdiabatic) return s;
  if (s.mode != Mode::Curve && s.mode != Mode::CrossCorrelation)
    fail(ErrorKind::ConfigError, "mode " + to_string(s.mode) + " has no engine comparison");
  s.mode = s.oracle_model == OracleModel::Full ? Mode::ValidateAdiabatic : Mode::ValidateOracle;
  s.engine = Engine::Both;
  s.series.clear();
  return s;
}

void add_run_options(CLI::App* cmd, RunArgs& a, bool allow_preset) {
  cmd->add_option("--config", a.config, "scenario JSON file");
  if (allow_preset) cmd->add_option("--preset", a.preset_name, "built-in scenario name");
  cmd->add_option("--output", a.output, "results file ('-' for stdout; default: scenario output field)");
  cmd->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", a.seed, "Monte Carlo seed override");
  cmd->add_option("--threads", a.threads, "worker threads (fallback: STEERKIT_THREADS)")->check(CLI::PositiveNumber);
  cmd->add_option("--svg", a.svg, "also write an SVG preview to this path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steerkit: steering of a mechanical mirror by two cavity fields"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "execute a scenario");
  add_run_options(run_cmd, run_args, true);

  std::string preset_name, preset_output;
  auto* preset_cmd = app.add_subcommand("preset", "print a built-in scenario as JSON");
  preset_cmd->add_option("name", preset_name, "preset name")->required()->check(CLI::IsMember(preset_names));
  preset_cmd->add_option("--output", preset_output, "write to this path instead of stdout");

  RunArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "compare closed form and oracle for a scenario");
  add_run_options(validate_cmd, validate_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("ConfigError", e.what(), "command line");
    return exit_config;
  }

  std::string context = "command line";
  try {
    if (*preset_cmd) {
      context = "preset " + preset_name;
      open_and_write(preset_output, [&](std::ostream& os) { os << emit_scenario(preset(preset_name)).dump(2) << "\n"; });
      return exit_ok;
    }
    RunArgs& a = *run_cmd ? run_args : validate_args;
    context = a.config.empty() ? "preset " + a.preset_name : a.config;
    Scenario s = load(a);
    if (*validate_cmd) s = as_validation(s);
    context = "scenario '" + s.name + "' (" + context + ")";
    const RunRecord rec = run(s, {resolve_threads(a.threads), a.seed});
    return emit(rec, a);
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.detail(), context);
    return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::InvalidParams ? exit_config : exit_runtime;
  } catch (const std::exception& e) {
    report_error("Internal", e.what(), context);
    return exit_runtime;
  }
}
