#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "common.hpp"
#include "qmotion/errors.hpp"

namespace qmotion::cli {

namespace detail {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw ConfigError("cannot write '" + path + "'");
  std::fputs(kUnitsLine, file_);
  std::fputc('\n', file_);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) std::fputc(',', file_);
    std::fputs(columns[i].c_str(), file_);
  }
  std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::sep() {
  if (!first_) std::fputc(',', file_);
  first_ = false;
}

CsvWriter& CsvWriter::num(double v) {
  sep();
  if (std::isnan(v)) std::fputs("nan", file_);
  else std::fprintf(file_, "%.17g", v);
  return *this;
}

CsvWriter& CsvWriter::integer(long long v) {
  sep();
  std::fprintf(file_, "%lld", v);
  return *this;
}

CsvWriter& CsvWriter::text(const std::string& v) {
  sep();
  std::fputs(v.c_str(), file_);
  return *this;
}

CsvWriter& CsvWriter::empty() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  std::fputc('\n', file_);
  first_ = true;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> time_grid(const ScenarioConfig& c) { return uniform_grid(c.t_min, c.t_max, c.t_step); }

SpectralSetup spectral_setup(const ScenarioConfig& c) {
  const double k_bar = c.packet.mass * c.packet.v_bar;
  KGrid grid = build_kgrid(k_bar, c.packet.sigma_p(), c.k_sigmas, c.k_nodes);
  SpectralFunction spectral = SpectralFunction::from_packet(c.packet, grid);
  auto free = free_spectral_model(spectral, grid, c.tol);
  auto tunnel = tunneling_packet_model(spectral, c.barrier, grid, c.tol);
  return {std::move(grid), spectral, std::move(free), std::move(tunnel)};
}

namespace {

class FlippedCurrent final : public PacketModel {
 public:
  explicit FlippedCurrent(PacketModelPtr inner) : PacketModel(inner->tolerances()), inner_(std::move(inner)) {}
  double rho(double x, double t) const override { return inner_->rho(x, t); }
  double current(double x, double t) const override { return -inner_->current(x, t); }
  double loss(double x, double t) const override { return inner_->loss(x, t); }
  double tail(double x, double t) const override { return inner_->tail(x, t); }
  double mass_between(double a, double b, double t) const override { return inner_->mass_between(a, b, t); }
  double loss_tail(double x, double t) const override { return inner_->loss_tail(x, t); }
  double total_norm(double t) const override { return inner_->total_norm(t); }
  Interval support_hint(double t) const override { return inner_->support_hint(t); }
  double width_scale(double t) const override { return inner_->width_scale(t); }
  double peak_density(double t) const override { return inner_->peak_density(t); }
  bool conserves_norm() const override { return inner_->conserves_norm(); }

 private:
  PacketModelPtr inner_;
};

}  // namespace

PacketModelPtr with_fault(const ScenarioConfig& c, PacketModelPtr model) {
  if (c.fault == "current-sign") return std::make_shared<FlippedCurrent>(std::move(model));
  return model;
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  std::string stem = out;
  if (stem.size() > 4 && stem.ends_with(".csv")) stem.resize(stem.size() - 4);
  return stem + suffix;
}

}  // namespace detail

using namespace detail;

namespace {

CheckResult check(std::string name, bool passed, double value, double tolerance, std::string detail = {}) {
  return {std::move(name), passed, value, tolerance, std::move(detail)};
}

RunResult trace_1d(const ScenarioConfig& c, const PacketModel& model, bool lossy) {
  const auto ts = time_grid(c);
  CsvWriter csv(c.out, {"P", "t", "x_cdf", "v_cdf", "x_ode", "v_ode", "discrepancy", "status"});
  double worst = 0.0, end_err = 0.0;
  for (double P : c.p_list) {
    const QuantileTrajectory cdf = trace_trajectory_cdf(model, P, ts);
    const QuantileTrajectory ode = trace_trajectory_ode(model, P, ts);
    const std::size_t n = std::min(cdf.samples.size(), ode.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = cdf.samples[i];
      const auto& b = ode.samples[i];
      const double gap = std::abs(a.x - b.x);
      if (!b.cdf_fallback) worst = std::max(worst, gap);
      csv.num(P).num(a.t).num(a.x).num(a.v).num(b.x).num(b.v).num(gap).text(b.cdf_fallback ? "cdf_fallback" : "ok");
      csv.end_row();
    }
    if (ode.termination != Termination::Completed) {
      csv.num(P).num(ode.end_t).empty().empty();
      if (ode.termination == Termination::VelocitySingular) csv.num(ode.end_x);
      else csv.empty();
      csv.empty().empty().text(to_string(ode.termination));
      csv.end_row();
    }
    if (lossy && c.lambda > 0.0 && ode.termination == Termination::NormBelowP) {
      end_err = std::max(end_err, std::abs(ode.end_t + std::log(P) / c.lambda));
    }
  }
  RunResult r;
  r.outputs.push_back(c.out);
  r.checks.push_back(check("method_equivalence", worst <= 1e-5, worst, 1e-5, "max |x_ode - x_cdf|"));
  if (lossy && c.lambda > 0.0) {
    r.checks.push_back(check("termination_time", end_err <= 1e-6, end_err, 1e-6, "max |t_end + ln(P)/lambda|"));
  }
  return r;
}

}  // namespace

RunResult cmd_free(const ScenarioConfig& c) {
  const auto model = with_fault(c, free_gaussian_model(c.packet, c.tol));
  return trace_1d(c, *model, false);
}

RunResult cmd_dissipative(const ScenarioConfig& c) {
  const auto model = with_fault(c, dissipative_gaussian_model(c.packet, c.lambda, c.tol));
  return trace_1d(c, *model, true);
}

RunResult cmd_tunnel(const ScenarioConfig& c) {
  const SpectralSetup s = spectral_setup(c);
  const auto tunnel = with_fault(c, s.tunnel);
  const auto free = with_fault(c, s.free);
  const auto ts = time_grid(c);
  std::vector<QuantileTrajectory> tun, fre;
  for (double P : c.p_list) {
    tun.push_back(trace_trajectory_cdf(*tunnel, P, ts));
    fre.push_back(trace_trajectory_cdf(*free, P, ts));
  }
  RunResult r;
  {
    CsvWriter csv(c.out, {"P", "t", "x_tunnel", "x_free", "lag", "v_tunnel", "v_free"});
    double min_lag = kInf;
    for (std::size_t i = 0; i < tun.size(); ++i) {
      const std::size_t n = std::min(tun[i].samples.size(), fre[i].samples.size());
      for (std::size_t j = 0; j < n; ++j) {
        const auto& q = tun[i].samples[j];
        const auto& f = fre[i].samples[j];
        min_lag = std::min(min_lag, f.x - q.x);
        csv.num(c.p_list[i]).num(q.t).num(q.x).num(f.x).num(f.x - q.x).num(q.v).num(f.v);
        csv.end_row();
      }
    }
    r.outputs.push_back(c.out);
    r.checks.push_back(check("lag_all_samples", min_lag >= -1e-5, min_lag, -1e-5,
                             "min lag over every sample, including the reflection side"));
  }
  const auto verdicts = retardation_scan(fre, tun, c.barrier.half_width, 1e-5);
  double worst = kInf;
  bool holds = true;
  std::size_t checked = 0;
  for (const auto& v : verdicts) {
    worst = std::min(worst, v.worst_margin);
    holds = holds && v.holds;
    checked += v.checked;
  }
  r.checks.push_back(check("retardation_beyond_barrier", holds, worst, -1e-5,
                           checked == 0 ? std::string("no sample has x_tunnel > a (vacuous)")
                                        : std::to_string(checked) + " samples with x_tunnel > a"));
  r.checks.push_back(check("transmission_probability", true,
                           packet_transmission_probability(s.spectral, c.barrier, s.grid), 0.0,
                           "sum of w |T|^2 |psi~|^2 (informational)"));

  if (!c.snapshots.empty()) {
    const std::string path = sibling_path(c.out, "_density.csv");
    CsvWriter csv(path, {"t", "x", "rho_tunnel", "rho_free"});
    double worst_norm = 0.0;
    for (double t : c.snapshots) {
      const Interval a = tunnel->support_hint(t);
      const Interval b = free->support_hint(t);
      const double lo = std::min(a.lo, b.lo);
      const double hi = std::max(a.hi, b.hi);
      const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / c.snapshot_dx));
      const double dx = (hi - lo) / static_cast<double>(n);
      double mass_t = 0.0, mass_f = 0.0;
      for (std::size_t i = 0; i <= n; ++i) {
        const double x = lo + dx * static_cast<double>(i);
        const double rt = tunnel->rho(x, t);
        const double rf = free->rho(x, t);
        const double w = (i == 0 || i == n) ? 0.5 * dx : dx;
        mass_t += w * rt;
        mass_f += w * rf;
        csv.num(t).num(x).num(rt).num(rf);
        csv.end_row();
      }
      worst_norm = std::max({worst_norm, std::abs(mass_t - 1.0), std::abs(mass_f - 1.0)});
    }
    r.outputs.push_back(path);
    r.checks.push_back(check("snapshot_norm", worst_norm <= 1e-6, worst_norm, 1e-6,
                             "max |trapezoid integral of each snapshot - 1|"));
  }
  return r;
}

RunResult cmd_delta_p(const ScenarioConfig& c) {
  const SpectralSetup s = spectral_setup(c);
  const std::vector<double> xs = c.dp_x.empty() ? default_delta_p_positions(c.barrier) : c.dp_x;
  const std::vector<double> ts = c.dp_t.empty() ? default_delta_p_times() : c.dp_t;
  const DeltaPReport report = delta_p_report(*s.free, *s.tunnel, xs, ts, c.n_lambda);
  CsvWriter csv(c.out, {"x", "t", "dp_direct", "term1", "term2", "term3", "dp_eq9_total", "agreement_rel",
                        "positivity_ok"});
  bool positive = true, terms_ok = true;
  double worst = 0.0;
  for (const auto& p : report.points) {
    csv.num(p.x).num(p.t).num(p.dp_direct).num(p.terms.term1).num(p.terms.term2).num(p.terms.term3);
    csv.num(p.terms.total).num(p.agreement_rel).text(p.positivity_ok ? "true" : "false");
    csv.end_row();
    positive = positive && p.positivity_ok;
    terms_ok = terms_ok && p.terms.term1 >= 0.0 && p.terms.term2 >= 0.0 && p.terms.term3 >= 0.0;
    if (p.dp_direct > 1e-6) worst = std::max(worst, p.agreement_rel);
  }
  RunResult r;
  r.outputs.push_back(c.out);
  r.checks.push_back(check("positivity", positive, 0.0, -kPositivityTolerance, "dp_direct >= -1e-6 everywhere"));
  r.checks.push_back(check("terms_nonnegative", terms_ok, 0.0, 0.0));
  r.checks.push_back(check("decomposition_agreement", worst <= 0.01, worst, 0.01,
                           "max agreement_rel where dp_direct > 1e-6"));
  return r;
}

RunResult cmd_sphere3d(const ScenarioConfig& c) {
  Gaussian3DParams params;
  params.sigma_x0 = c.sigma3d;
  params.drift = c.drift;
  const Gaussian3DField field = gaussian3d_model(params);
  const auto seeds = sphere_seeds(field.mean(c.t_min), c.radius);
  const auto ts = time_grid(c);
  const FlowMap3D flow = trace_flowmap_3d(field, seeds, ts, c.tol);
  std::vector<double> enclosed(ts.size());
  double drift = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<Vec3> surface;
    for (const auto& path : flow.paths) surface.push_back(path[i].x);
    enclosed[i] = probability_in_volume(field, surface, ts[i]);
    drift = std::max(drift, std::abs(enclosed[i] - flow.P));
    spread = std::max(spread, fit_sphere(surface).relative_spread);
  }
  CsvWriter csv(c.out, {"seed_id", "t", "x", "y", "z", "enclosed_probability"});
  for (std::size_t s = 0; s < flow.paths.size(); ++s) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const Vec3& x = flow.paths[s][i].x;
      csv.integer(static_cast<long long>(s)).num(ts[i]).num(x[0]).num(x[1]).num(x[2]).num(enclosed[i]);
      csv.end_row();
    }
  }
  RunResult r;
  r.outputs.push_back(c.out);
  r.checks.push_back(check("probability_conserved", drift <= 1e-4, drift, 1e-4, "max |P(t) - P(0)|"));
  r.checks.push_back(check("sphere_shape", spread <= 1e-5, spread, 1e-5, "max relative radius spread"));
  return r;
}

RunResult run_command(Command command, const ScenarioConfig& c) {
  c.validate(command);
  switch (command) {
    case Command::Free: return cmd_free(c);
    case Command::Dissipative: return cmd_dissipative(c);
    case Command::Tunnel: return cmd_tunnel(c);
    case Command::DeltaP: return cmd_delta_p(c);
    case Command::Sphere3D: return cmd_sphere3d(c);
    case Command::Verify: return cmd_verify(c);
  }
  throw ConfigError("unknown command");
}

std::string manifest_path(const std::string& out) { return sibling_path(out, ".manifest.json"); }

void write_manifest(Command command, const ScenarioConfig& c, const RunResult& result, double wall_seconds) {
  nlohmann::ordered_json m;
  m["command"] = command_name(command);
  m["units"] = "hbar = m = 1; x in hbar/sqrt(eV m), t in hbar/eV, v and k in sqrt(eV m)/hbar, V in eV";
  nlohmann::ordered_json config;
  for (const auto& [k, v] : c.echo()) config[k] = v;
  m["config"] = config;
  m["tolerances"] = {{"quad_rel", c.tol.quad_rel},
                     {"quad_abs", c.tol.quad_abs},
                     {"root_abs", c.tol.root_abs},
                     {"ode_rel", c.tol.ode_rel},
                     {"ode_abs", c.tol.ode_abs}};
  m["outputs"] = result.outputs;
  m["wall_clock_seconds"] = wall_seconds;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& chk : result.checks) {
    checks.push_back({{"name", chk.name},
                      {"passed", chk.passed},
                      {"value", std::isfinite(chk.value) ? nlohmann::ordered_json(chk.value) : nlohmann::ordered_json()},
                      {"tolerance", chk.tolerance},
                      {"detail", chk.detail}});
  }
  m["checks"] = checks;
  const std::string path = manifest_path(c.out);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << m.dump(2) << '\n';
}

}  // namespace qmotion::cli
