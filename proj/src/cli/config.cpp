#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qmotion/cli.hpp"
#include "qmotion/errors.hpp"

namespace qmotion::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key + ": not a finite number: '" + text + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 1e7) throw ConfigError(key + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true/false");
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += g17(v);
  }
  return out;
}

// Range values are rounded to 12 significant digits so 0.1:0.2:0.9 yields 0.3, not 0.30000000000000004.
std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> out;
  char buf[32];
  for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", lo + i * step);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

void check_probability_list(const std::vector<double>& ps) {
  if (ps.empty()) throw ConfigError("p-list: at least one P value is required");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (!(ps[i] > 0.0 && ps[i] < 1.0)) throw ConfigError("p-list: values must lie in (0, 1)");
    if (i > 0 && !(ps[i] > ps[i - 1])) throw ConfigError("p-list: values must be strictly increasing");
  }
}

}  // namespace

const char* command_name(Command command) {
  switch (command) {
    case Command::Free: return "free";
    case Command::Dissipative: return "dissipative";
    case Command::Tunnel: return "tunnel";
    case Command::DeltaP: return "delta-p";
    case Command::Sphere3D: return "sphere3d";
    case Command::Verify: return "verify";
  }
  return "?";
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    // lo:step:hi ranges are allowed alongside plain values
    if (item.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream rs(item);
      std::string part;
      while (std::getline(rs, part, ':')) parts.push_back(parse_number("list", part));
      if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
        throw ConfigError("list: range must be lo:step:hi with step > 0");
      }
      for (double v : steps(parts[0], parts[2], parts[1])) out.push_back(v);
      continue;
    }
    out.push_back(parse_number("list", item));
  }
  return out;
}

const std::vector<SettingInfo>& setting_keys() {
  static const std::vector<SettingInfo> keys{
      {"x-bar", "initial mean position"},
      {"v-bar", "mean velocity (= mean momentum, m = 1)"},
      {"sigma-x0", "initial position width"},
      {"lambda", "probability loss rate (dissipative)"},
      {"barrier-height", "barrier height V"},
      {"barrier-halfwidth", "barrier half-width a"},
      {"p-list", "P values, comma separated (lo:step:hi ranges allowed)"},
      {"t-min", "first output time"},
      {"t-max", "last output time"},
      {"t-step", "output time step"},
      {"dp-x", "Delta P positions (default: 12 points from a+0.2 to a+5)"},
      {"dp-t", "Delta P times (default: 0..10)"},
      {"n-lambda", "initial Gauss-Legendre order of the lambda integrals"},
      {"k-nodes", "Gauss-Legendre nodes of the k grid"},
      {"k-sigmas", "spectral truncation in units of sigma_k"},
      {"snapshots", "density snapshot times (tunnel)"},
      {"snapshot-dx", "density snapshot spacing"},
      {"sigma3d", "initial width of the 3D packet"},
      {"drift", "3D drift velocity vx,vy,vz"},
      {"radius", "radius of the seed sphere"},
      {"quad-rel", "relative quadrature tolerance"},
      {"quad-abs", "absolute quadrature tolerance"},
      {"root-abs", "root position tolerance"},
      {"ode-rel", "relative ODE tolerance"},
      {"ode-abs", "absolute ODE tolerance"},
      {"out", "output CSV path"},
      {"quick", "reduced grids (verify)"},
  };
  return keys;
}

const char* default_preset(Command command) {
  switch (command) {
    case Command::Free:
    case Command::Dissipative: return "fig1";
    case Command::Tunnel:
    case Command::DeltaP: return "fig2";
    case Command::Sphere3D: return "fig3";
    case Command::Verify: return "fig2";
  }
  return "fig1";
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  c.preset = name;
  c.packet = presets::fig1_packet();
  if (name == "fig1") {
    c.lambda = presets::kFig1LossRate;
    c.p_list = steps(0.1, 0.9, 0.2);
    c.t_max = 20.0;
    c.t_step = 0.1;
  } else if (name == "fig2") {
    c.barrier = presets::fig2_barrier();
    c.p_list = steps(0.1, 0.7, 0.05);
    c.t_max = 12.0;
    c.t_step = 0.25;
  } else if (name == "fig3") {
    c.sigma3d = 1.0;
    c.drift = {1.0, 0.0, 0.0};
    c.radius = 1.0;
    c.t_max = 10.0;
    c.t_step = 0.5;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig1, fig2 or fig3)");
  }
  return c;
}

void apply_setting(ScenarioConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '_', '-');
  key = trim(key);
  const std::string v = trim(value);
  if (key == "preset") c.preset = v;
  else if (key == "x-bar") c.packet.x_bar = parse_number(key, v);
  else if (key == "v-bar") c.packet.v_bar = parse_number(key, v);
  else if (key == "sigma-x0") c.packet.sigma_x0 = parse_number(key, v);
  else if (key == "lambda") c.lambda = parse_number(key, v);
  else if (key == "barrier-height") c.barrier.height = parse_number(key, v);
  else if (key == "barrier-halfwidth") c.barrier.half_width = parse_number(key, v);
  else if (key == "p-list") c.p_list = parse_list(v);
  else if (key == "t-min") c.t_min = parse_number(key, v);
  else if (key == "t-max") c.t_max = parse_number(key, v);
  else if (key == "t-step") c.t_step = parse_number(key, v);
  else if (key == "dp-x") c.dp_x = parse_list(v);
  else if (key == "dp-t") c.dp_t = parse_list(v);
  else if (key == "n-lambda") c.n_lambda = static_cast<int>(parse_count(key, v));
  else if (key == "k-nodes") c.k_nodes = parse_count(key, v);
  else if (key == "k-sigmas") c.k_sigmas = parse_number(key, v);
  else if (key == "snapshots") c.snapshots = parse_list(v);
  else if (key == "snapshot-dx") c.snapshot_dx = parse_number(key, v);
  else if (key == "sigma3d") c.sigma3d = parse_number(key, v);
  else if (key == "drift") {
    const auto d = parse_list(v);
    if (d.size() != 3) throw ConfigError("drift: expected three components");
    c.drift = {d[0], d[1], d[2]};
  } else if (key == "radius") c.radius = parse_number(key, v);
  else if (key == "quad-rel") c.tol.quad_rel = parse_number(key, v);
  else if (key == "quad-abs") c.tol.quad_abs = parse_number(key, v);
  else if (key == "root-abs") c.tol.root_abs = parse_number(key, v);
  else if (key == "ode-rel") c.tol.ode_rel = parse_number(key, v);
  else if (key == "ode-abs") c.tol.ode_abs = parse_number(key, v);
  else if (key == "out") c.out = v;
  else if (key == "quick") c.quick = parse_bool(key, v);
  else if (key == "inject-fault") c.fault = v;
  else throw ConfigError("unknown setting '" + key + "'");
}

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  Settings out;
  if (trim(text).starts_with("{")) {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!manifest.contains("config") || !manifest["config"].is_object()) {
      throw ConfigError(path + ": JSON config needs a \"config\" object");
    }
    for (const auto& [k, v] : manifest["config"].items()) {
      if (!v.is_string()) throw ConfigError(path + ": config values must be strings");
      out.emplace_back(k, v.get<std::string>());
    }
    return out;
  }
  std::stringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

void ScenarioConfig::validate(Command command) const {
  try {
    tol.validate();
    packet.validate();
    barrier.validate();
  } catch (const InvalidRange& e) {
    throw ConfigError(e.what());
  }
  if (out.empty()) throw ConfigError("out: an output path is required");
  if (!(t_step > 0.0)) throw ConfigError("t-step must be > 0");
  if (!(t_min >= 0.0)) throw ConfigError("t-min must be >= 0");
  if (!(t_max > t_min)) throw ConfigError("t-max must exceed t-min");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(k_sigmas > 0.0)) throw ConfigError("k-sigmas must be > 0");
  if (k_nodes < 64) throw ConfigError("k-nodes must be >= 64");
  if (n_lambda < 16) throw ConfigError("n-lambda must be >= 16");
  if (!(snapshot_dx > 0.0)) throw ConfigError("snapshot-dx must be > 0");
  if (!(sigma3d > 0.0)) throw ConfigError("sigma3d must be > 0");
  if (!(radius > 0.0)) throw ConfigError("radius must be > 0");
  if (!fault.empty() && fault != "current-sign") throw ConfigError("inject-fault: only 'current-sign' is known");
  for (double t : snapshots) {
    if (!(t >= 0.0)) throw ConfigError("snapshots: times must be >= 0");
  }
  switch (command) {
    case Command::Free:
    case Command::Dissipative:
    case Command::Tunnel: check_probability_list(p_list); break;
    default: break;
  }
  if (command == Command::Tunnel || command == Command::DeltaP) {
    const double k_max = packet.v_bar * packet.mass + k_sigmas * packet.sigma_p();
    double latest = t_max;
    for (double t : dp_t) latest = std::max(latest, t);
    for (double t : snapshots) latest = std::max(latest, t);
    if (command == Command::DeltaP && dp_t.empty()) latest = 10.0;
    const std::size_t need = required_k_nodes(k_max, latest);
    if (k_nodes < need) {
      throw ConfigError("k-nodes = " + std::to_string(k_nodes) + " cannot resolve the phase up to t = " +
                        g17(latest) + "; need at least " + std::to_string(need));
    }
    for (double x : dp_x) {
      if (!(x > barrier.half_width)) throw ConfigError("dp-x: positions must lie beyond the barrier (x > a)");
    }
    for (double t : dp_t) {
      if (!(t >= 0.0)) throw ConfigError("dp-t: times must be >= 0");
    }
  }
}

std::map<std::string, std::string> ScenarioConfig::echo() const {
  std::map<std::string, std::string> m;
  m["preset"] = preset;
  m["x-bar"] = g17(packet.x_bar);
  m["v-bar"] = g17(packet.v_bar);
  m["sigma-x0"] = g17(packet.sigma_x0);
  m["lambda"] = g17(lambda);
  m["barrier-height"] = g17(barrier.height);
  m["barrier-halfwidth"] = g17(barrier.half_width);
  m["p-list"] = join(p_list);
  m["t-min"] = g17(t_min);
  m["t-max"] = g17(t_max);
  m["t-step"] = g17(t_step);
  m["dp-x"] = join(dp_x);
  m["dp-t"] = join(dp_t);
  m["n-lambda"] = std::to_string(n_lambda);
  m["k-nodes"] = std::to_string(k_nodes);
  m["k-sigmas"] = g17(k_sigmas);
  m["snapshots"] = join(snapshots);
  m["snapshot-dx"] = g17(snapshot_dx);
  m["sigma3d"] = g17(sigma3d);
  m["drift"] = join({drift[0], drift[1], drift[2]});
  m["radius"] = g17(radius);
  m["quad-rel"] = g17(tol.quad_rel);
  m["quad-abs"] = g17(tol.quad_abs);
  m["root-abs"] = g17(tol.root_abs);
  m["ode-rel"] = g17(tol.ode_rel);
  m["ode-abs"] = g17(tol.ode_abs);
  m["out"] = out;
  m["quick"] = quick ? "true" : "false";
  if (!fault.empty()) m["inject-fault"] = fault;
  return m;
}

}  // namespace qmotion::cli
