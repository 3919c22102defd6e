#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qmotion/cli.hpp"
#include "qmotion/errors.hpp"

using namespace qmotion;
using namespace qmotion::cli;

namespace {

struct Subcommand {
  Command command = Command::Free;
  CLI::App* app = nullptr;
  std::string preset;
  std::string config_file;
  bool quick = false;
  std::string fault;
  std::map<std::string, std::string> flags;
};

void add_common_options(Subcommand& sub) {
  sub.app->add_option("--preset", sub.preset, "fig1, fig2 or fig3 (default depends on the command)")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  sub.app->add_option("--config", sub.config_file, "flat 'key = value' file or a previous run manifest");
  for (const auto& info : setting_keys()) {
    const std::string key = info.key;
    if (key == "quick") continue;
    sub.app->add_option("--" + key, sub.flags[key], info.help);
  }
  sub.app->add_flag("--quick", sub.quick, "reduced grids (verify)");
  sub.app->add_option("--inject-fault", sub.fault)->group("");
}

int execute(const Subcommand& sub) {
  Settings file_settings;
  if (!sub.config_file.empty()) file_settings = read_config_file(sub.config_file);
  std::string preset = default_preset(sub.command);
  for (const auto& [k, v] : file_settings) {
    if (k == "preset") preset = v;
  }
  if (!sub.preset.empty()) preset = sub.preset;

  ScenarioConfig config = preset_config(preset);
  for (const auto& [k, v] : file_settings) {
    if (k != "preset") apply_setting(config, k, v);
  }
  for (const auto& info : setting_keys()) {
    const auto it = sub.flags.find(info.key);
    if (it != sub.flags.end() && sub.app->count(std::string("--") + info.key) > 0) {
      apply_setting(config, it->first, it->second);
    }
  }
  if (sub.quick) config.quick = true;
  if (!sub.fault.empty()) config.fault = sub.fault;
  if (config.out.empty()) config.out = std::string("qmotion_") + command_name(sub.command) + ".csv";

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run_command(sub.command, config);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(sub.command, config, result, secs);

  bool all_passed = true;
  for (const auto& c : result.checks) {
    all_passed = all_passed && c.passed;
    if (sub.command != Command::Verify) {
      std::fprintf(stderr, "check %-28s %s (value %.3g)\n", c.name.c_str(), c.passed ? "ok" : "FAILED", c.value);
    }
  }
  for (const auto& path : result.outputs) std::fprintf(stderr, "wrote %s\n", path.c_str());
  std::fprintf(stderr, "wrote %s (%.1f s)\n", manifest_path(config.out).c_str(), secs);
  if (sub.command == Command::Verify && !all_passed) {
    std::fprintf(stderr, "verification FAILED:");
    for (const auto& c : result.checks) {
      if (!c.passed) std::fprintf(stderr, " %s", c.name.c_str());
    }
    std::fprintf(stderr, "\n");
    return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile positions, trajectories and tunneling retardation checks"};
  app.require_subcommand(1);
  const std::pair<Command, const char*> commands[] = {
      {Command::Free, "free Gaussian quantile trajectories (ODE and CDF)"},
      {Command::Dissipative, "Gaussian with global probability loss"},
      {Command::Tunnel, "square-barrier packet vs free reference"},
      {Command::DeltaP, "direct and decomposed Delta P on an (x, t) grid"},
      {Command::Sphere3D, "3D flow map of a spherical seed surface"},
      {Command::Verify, "run the invariant suite"},
  };
  // Options bind to members, so the vector must not reallocate afterwards.
  std::vector<Subcommand> subs(std::size(commands));
  for (std::size_t i = 0; i < subs.size(); ++i) {
    subs[i].command = commands[i].first;
    subs[i].app = app.add_subcommand(command_name(commands[i].first), commands[i].second);
  }
  for (auto& sub : subs) add_common_options(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  for (const auto& sub : subs) {
    if (!sub.app->parsed()) continue;
    try {
      return execute(sub);
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "configuration error: %s\n", e.what());
      return kExitConfig;
    } catch (const NumericalError& e) {
      std::fprintf(stderr, "numerical failure: %s\n", e.what());
      return kExitNumerical;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kExitNumerical;
    }
  }
  return kExitConfig;
}
