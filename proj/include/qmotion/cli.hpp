#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmotion/numerics.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Free, Dissipative, Tunnel, DeltaP, Sphere3D, Verify };

const char* command_name(Command command);

struct ScenarioConfig {
  std::string preset;
  GaussianPacketParams packet;
  double lambda = 0.0;
  BarrierSpec barrier;
  std::vector<double> p_list;
  double t_min = 0.0;
  double t_max = 20.0;
  double t_step = 0.1;
  // Delta P evaluation grid; empty means the default grid.
  std::vector<double> dp_x;
  std::vector<double> dp_t;
  int n_lambda = 32;
  std::size_t k_nodes = presets::kDefaultKNodes;
  double k_sigmas = presets::kSpectralSigmas;
  std::vector<double> snapshots;
  double snapshot_dx = 0.05;
  // 3D scenario.
  double sigma3d = 1.0;
  Vec3 drift{1.0, 0.0, 0.0};
  double radius = 1.0;
  Tolerances tol;
  std::string out;
  bool quick = false;
  // Testing hook: "current-sign" flips j in every 1D model.
  std::string fault;

  // Throws ConfigError.
  void validate(Command command) const;
  // Flat key -> value echo; feeding it back through apply_setting reproduces the config.
  std::map<std::string, std::string> echo() const;
};

// Keys accepted by apply_setting, in display order, with a help line each.
struct SettingInfo {
  const char* key;
  const char* help;
};
const std::vector<SettingInfo>& setting_keys();

ScenarioConfig preset_config(const std::string& name);
const char* default_preset(Command command);

// Keys may use '-' or '_'. Throws ConfigError on unknown keys or bad values.
void apply_setting(ScenarioConfig& config, std::string key, const std::string& value);

using Settings = std::vector<std::pair<std::string, std::string>>;

// Flat "key = value" text with '#' comments. A JSON run manifest is accepted
// too; its "config" object is returned.
Settings read_config_file(const std::string& path);

std::vector<double> parse_list(const std::string& text);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunResult {
  std::vector<std::string> outputs;
  std::vector<CheckResult> checks;
};

RunResult cmd_free(const ScenarioConfig& config);
RunResult cmd_dissipative(const ScenarioConfig& config);
RunResult cmd_tunnel(const ScenarioConfig& config);
RunResult cmd_delta_p(const ScenarioConfig& config);
RunResult cmd_sphere3d(const ScenarioConfig& config);
// Runs the invariant suite; writes a CSV report to config.out.
RunResult cmd_verify(const ScenarioConfig& config);

RunResult run_command(Command command, const ScenarioConfig& config);

// <out without .csv>.manifest.json
std::string manifest_path(const std::string& out);
void write_manifest(Command command, const ScenarioConfig& config, const RunResult& result,
                    double wall_seconds);

}  // namespace qmotion::cli
