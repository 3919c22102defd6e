#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "common.hpp"
#include "qmotion/errors.hpp"

namespace qmotion::cli {

using namespace detail;

namespace {

std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> out;
  for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i) out.push_back(lo + i * step);
  return out;
}

double max_gap(const QuantileTrajectory& a, const QuantileTrajectory& b) {
  double worst = 0.0;
  const std::size_t n = std::min(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.samples[i].cdf_fallback || b.samples[i].cdf_fallback) continue;
    worst = std::max(worst, std::abs(a.samples[i].x - b.samples[i].x));
  }
  // Differing lengths mean one method terminated early.
  if (a.samples.size() != b.samples.size()) return kInf;
  return worst;
}

// max |d rho/dt + dj/dx + l| relative to max |dj/dx| over the sample grid.
double continuity_ratio(const PacketModel& m, std::span<const double> xs, std::span<const double> ts) {
  const double h = 1e-4;
  double worst = 0.0, scale = 0.0;
  for (double t : ts) {
    for (double x : xs) {
      const double drho = (m.rho(x, t + h) - m.rho(x, t - h)) / (2 * h);
      const double dj = (m.current(x + h, t) - m.current(x - h, t)) / (2 * h);
      worst = std::max(worst, std::abs(drho + dj + m.loss(x, t)));
      scale = std::max(scale, std::abs(dj));
    }
  }
  return scale > 0.0 ? worst / scale : kInf;
}

class Suite {
 public:
  void run(const std::string& name, double tolerance, const std::string& what,
           const std::function<double()>& measure, bool upper = true) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    r.name = name;
    r.tolerance = tolerance;
    try {
      r.value = measure();
      r.passed = upper ? r.value <= tolerance : r.value >= tolerance;
      r.detail = what;
    } catch (const std::exception& e) {
      r.value = std::nan("");
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-28s %s  value=%-11.3g tol=%-9.3g %s (%.1f s)\n", name.c_str(), r.passed ? "PASS" : "FAIL",
                r.value, r.tolerance, r.detail.c_str(), secs);
    std::fflush(stdout);
    results_.push_back(std::move(r));
  }

  std::vector<CheckResult> results() const { return results_; }

 private:
  std::vector<CheckResult> results_;
};

}  // namespace

RunResult cmd_verify(const ScenarioConfig& c) {
  const bool quick = c.quick;
  Suite suite;
  const GaussianPacketParams packet = c.packet;
  const auto free = with_fault(c, free_gaussian_model(packet, c.tol));
  const auto lossy = with_fault(c, dissipative_gaussian_model(packet, presets::kFig1LossRate, c.tol));
  const SpectralSetup s = spectral_setup(c);
  const auto tunnel = with_fault(c, s.tunnel);
  const auto free_spec = with_fault(c, s.free);

  const auto ts_free = uniform_grid(0.0, 20.0, quick ? 1.0 : 0.25);
  const std::vector<double> ps_free = quick ? std::vector<double>{0.1, 0.5, 0.9} : steps(0.1, 0.9, 0.1);
  const auto ts_tunnel = uniform_grid(0.0, quick ? 8.0 : 12.0, quick ? 0.5 : 0.25);
  std::vector<double> ps_tunnel = quick ? std::vector<double>{0.015, 0.3} : steps(0.1, 0.7, 0.05);
  if (!quick) {
    const auto low = steps(0.005, 0.02, 0.005);
    ps_tunnel.insert(ps_tunnel.begin(), low.begin(), low.end());
  }

  std::vector<QuantileTrajectory> free_traces, tunnel_cdf, free_spec_cdf;

  suite.run("free_closed_form", 1e-5, "max |x_P(t) - closed form| (ODE tracer)", [&] {
    double worst = 0.0;
    for (double P : ps_free) {
      const auto traj = trace_trajectory_ode(*free, P, ts_free);
      const double x0 = quantile_position(*free, P, 0.0);
      if (traj.samples.size() != ts_free.size()) return kInf;
      for (const auto& smp : traj.samples) {
        const double exact =
            packet.x_bar + packet.v_bar * smp.t + packet.sigma_x(smp.t) / packet.sigma_x0 * (x0 - packet.x_bar);
        worst = std::max(worst, std::abs(smp.x - exact));
      }
      free_traces.push_back(traj);
    }
    return worst;
  });

  suite.run("method_equivalence_free", 1e-5, "max |x_ode - x_cdf|", [&] {
    double worst = 0.0;
    for (double P : ps_free) {
      worst = std::max(worst, max_gap(trace_trajectory_ode(*free, P, ts_free), trace_trajectory_cdf(*free, P, ts_free)));
    }
    return worst;
  });

  suite.run("method_equivalence_dissipative", 1e-5, "max |x_ode - x_cdf| with the lossy right-hand side", [&] {
    double worst = 0.0;
    for (double P : ps_free) {
      worst = std::max(worst, max_gap(trace_trajectory_ode(*lossy, P, ts_free), trace_trajectory_cdf(*lossy, P, ts_free)));
    }
    return worst;
  });

  suite.run("method_equivalence_tunnel", 1e-5, "max |x_ode - x_cdf| outside density-floor episodes", [&] {
    double worst = 0.0;
    for (double P : ps_tunnel) {
      auto cdf = trace_trajectory_cdf(*tunnel, P, ts_tunnel);
      worst = std::max(worst, max_gap(trace_trajectory_ode(*tunnel, P, ts_tunnel), cdf));
      tunnel_cdf.push_back(std::move(cdf));
    }
    return worst;
  });

  suite.run("dissipative_termination", 1e-6, "max |t_end + ln(P)/lambda|", [&] {
    double worst = 0.0;
    const auto ts = uniform_grid(0.0, 30.0, quick ? 1.0 : 0.25);
    for (double P : ps_free) {
      const auto traj = trace_trajectory_ode(*lossy, P, ts);
      if (traj.termination != Termination::NormBelowP) return kInf;
      worst = std::max(worst, std::abs(traj.end_t + std::log(P) / presets::kFig1LossRate));
    }
    return worst;
  });

  suite.run("scattering_unitarity", 1e-12, "max ||R|^2 + |T|^2 - 1| over 100 random (k, V, a)", [&] {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> uk(0.05, 8.0), uv(0.0, 25.0), ua(0.05, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const ScatteringMode m = scattering_mode(uk(rng), BarrierSpec{uv(rng), ua(rng)});
      worst = std::max(worst, std::abs(std::norm(m.R) + std::norm(m.T) - 1.0));
    }
    return worst;
  });

  const std::vector<double> fd_times{1.0, 4.5, 8.0};
  std::vector<double> fd_x;
  for (double x = -20.0; x <= 15.0; x += quick ? 1.0 : 0.35) fd_x.push_back(x);
  suite.run("continuity_free", 1e-4, "max |d rho/dt + dj/dx| / max |dj/dx|",
            [&] { return continuity_ratio(*free, fd_x, fd_times); });
  suite.run("continuity_dissipative", 1e-4, "max |d rho/dt + dj/dx + l| / max |dj/dx|",
            [&] { return continuity_ratio(*lossy, fd_x, fd_times); });
  suite.run("continuity_tunnel", 1e-4, "max |d rho/dt + dj/dx| / max |dj/dx|",
            [&] { return continuity_ratio(*tunnel, fd_x, fd_times); });

  suite.run("inversion_round_trip", 1e-8, "max |tail(x) - P| on a 1% spot check of traced rows", [&] {
    double worst = 0.0;
    std::size_t row = 0;
    auto spot = [&](const PacketModel& m, const std::vector<QuantileTrajectory>& set) {
      for (const auto& traj : set) {
        for (const auto& smp : traj.samples) {
          if (row++ % 100 != 0) continue;
          worst = std::max(worst, std::abs(m.tail(smp.x, smp.t) - traj.P));
        }
      }
    };
    spot(*free, free_traces);
    spot(*tunnel, tunnel_cdf);
    return worst;
  });

  suite.run("ordering", 0.0, "number of crossings between traced quantiles (P1 < P2 => x1 > x2)", [&] {
    double crossings = 0.0;
    for (std::size_t i = 1; i < tunnel_cdf.size(); ++i) {
      const auto& a = tunnel_cdf[i - 1].samples;
      const auto& b = tunnel_cdf[i].samples;
      for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j) crossings += a[j].x > b[j].x ? 0.0 : 1.0;
    }
    return crossings;
  });

  suite.run("retardation", -1e-5, "min x_free - x_tunnel where x_tunnel > a", [&] {
    for (double P : ps_tunnel) free_spec_cdf.push_back(trace_trajectory_cdf(*free_spec, P, ts_tunnel));
    const auto verdicts = retardation_scan(free_spec_cdf, tunnel_cdf, c.barrier.half_width, 1e-5);
    double worst = kInf;
    for (const auto& v : verdicts) worst = std::min(worst, v.worst_margin);
    return worst;
  }, false);

  const std::vector<double> dp_x =
      quick ? std::vector<double>{c.barrier.half_width + 0.2, c.barrier.half_width + 2.0, c.barrier.half_width + 5.0}
            : default_delta_p_positions(c.barrier);
  const std::vector<double> dp_t = quick ? std::vector<double>{2.0, 5.0, 8.0} : default_delta_p_times();
  DeltaPReport report;
  suite.run("delta_p_positive", -kPositivityTolerance, "min direct Delta P beyond the barrier", [&] {
    report = delta_p_report(*s.free, *s.tunnel, dp_x, dp_t, c.n_lambda);
    double worst = kInf;
    for (const auto& p : report.points) worst = std::min(worst, p.dp_direct);
    return worst;
  }, false);
  suite.run("delta_p_identity", 0.01, "max relative gap between direct and decomposed Delta P (direct > 1e-6)", [&] {
    double worst = 0.0;
    for (const auto& p : report.points) {
      if (p.terms.term1 < 0.0 || p.terms.term2 < 0.0 || p.terms.term3 < 0.0) return kInf;
      const double diff = std::abs(p.dp_direct - p.terms.total);
      if (diff > std::max(1e-6, 0.01 * std::abs(p.dp_direct))) worst = std::max(worst, diff / std::max(p.dp_direct, 1e-6));
      if (p.dp_direct > 1e-6) worst = std::max(worst, p.agreement_rel);
    }
    return worst;
  });

  suite.run("conservation_3d", 1e-4, "max |P(t) - P(0)| inside the transported sphere", [&] {
    Gaussian3DParams params;
    params.sigma_x0 = c.sigma3d;
    params.drift = c.drift;
    const Gaussian3DField field = gaussian3d_model(params);
    const auto ts = uniform_grid(0.0, 10.0, quick ? 2.0 : 0.5);
    const FlowMap3D flow = trace_flowmap_3d(field, sphere_seeds(field.mean(0.0), c.radius), ts, c.tol);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      std::vector<Vec3> surface;
      for (const auto& path : flow.paths) surface.push_back(path[i].x);
      worst = std::max(worst, std::abs(probability_in_volume(field, surface, ts[i]) - flow.P));
    }
    return worst;
  });

  RunResult result;
  result.checks = suite.results();
  CsvWriter csv(c.out, {"check", "passed", "value", "tolerance", "detail"});
  for (const auto& r : result.checks) {
    std::string quoted = "\"";
    for (char ch : r.detail) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    quoted += '"';
    csv.text(r.name).text(r.passed ? "true" : "false").num(r.value).num(r.tolerance).text(quoted);
    csv.end_row();
  }
  result.outputs.push_back(c.out);
  return result;
}

}  // namespace qmotion::cli
