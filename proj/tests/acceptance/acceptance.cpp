// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qmotion/errors.hpp"
#include "qmotion/quantile.hpp"
#include "qmotion/tunneling.hpp"

using namespace qmotion;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void run(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && secs > budget_s) {
    out.pass = false;
    out.detail += fmt("; over time budget %.0f s", budget_s);
  }
  if (!out.pass) ++failures;
  std::printf("criterion %-3s %s  %s: %s [%.1f s]\n", id, out.pass ? "PASS" : "FAIL", title, out.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::vector<double> p_range(double lo, double hi, double step) {
  std::vector<double> ps;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) ps.push_back(lo + i * step);
  return ps;
}

// Shared Fig.-2 setup; tunneling trajectories are traced once and reused.
struct Fig2 {
  KGrid grid = build_kgrid(2.0, 0.2, presets::kSpectralSigmas, presets::kDefaultKNodes);
  SpectralFunction spectral = SpectralFunction::gaussian(2.0, 0.2, -10.0, grid);
  BarrierSpec barrier = presets::fig2_barrier();
  std::shared_ptr<const SpectralPacketModel> free = free_spectral_model(spectral, grid);
  std::shared_ptr<const SpectralPacketModel> tunnel = tunneling_packet_model(spectral, barrier, grid);
  std::vector<double> ts = uniform_grid(0.0, 12.0, 0.25);
  std::vector<double> ps = p_range(0.1, 0.7, 0.05);
  std::vector<QuantileTrajectory> cdf_tunnel, cdf_free, ode_tunnel;

  void trace() {
    for (double P : ps) {
      cdf_tunnel.push_back(trace_trajectory_cdf(*tunnel, P, ts));
      cdf_free.push_back(trace_trajectory_cdf(*free, P, ts));
      ode_tunnel.push_back(trace_trajectory_ode(*tunnel, P, ts));
    }
  }
};

double max_ode_cdf_gap(const QuantileTrajectory& ode, const QuantileTrajectory& cdf, std::size_t& compared) {
  double worst = 0.0;
  const std::size_t n = std::min(ode.samples.size(), cdf.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (ode.samples[i].cdf_fallback) continue;
    worst = std::max(worst, std::abs(ode.samples[i].x - cdf.samples[i].x));
    ++compared;
  }
  return worst;
}

// |T|^2 for the square barrier, textbook closed form.
double textbook_t2(double k, double V, double a) {
  const double E = 0.5 * k * k;
  const double w = 2.0 * a;
  if (E < V) {
    const double kappa = std::sqrt(2.0 * (V - E));
    const double s = std::sinh(kappa * w);
    return 1.0 / (1.0 + V * V * s * s / (4.0 * E * (V - E)));
  }
  if (E > V) {
    const double q = std::sqrt(2.0 * (E - V));
    const double s = std::sin(q * w);
    return 1.0 / (1.0 + V * V * s * s / (4.0 * E * (E - V)));
  }
  return 1.0 / (1.0 + V * w * w / 2.0);
}

}  // namespace

int main() {
  const GaussianPacketParams fig1 = presets::fig1_packet();
  const double lambda = presets::kFig1LossRate;

  run("1", "closed-form free quantiles", 10.0, [&] {
    const auto model = free_gaussian_model(fig1);
    const auto ts = uniform_grid(0.0, 20.0, 0.1);
    double worst = 0.0, slope_err = 0.0;
    for (double P : p_range(0.1, 0.9, 0.2)) {
      const auto ode = trace_trajectory_ode(*model, P, ts);
      const auto cdf = trace_trajectory_cdf(*model, P, ts);
      const double x0 = cdf.samples.front().x;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double t = ts[i];
        const double exact = fig1.x_bar + fig1.v_bar * t + fig1.sigma_x(t) / fig1.sigma_x0 * (x0 - fig1.x_bar);
        worst = std::max({worst, std::abs(ode.samples[i].x - exact), std::abs(cdf.samples[i].x - exact)});
        if (std::abs(P - 0.5) < 1e-12 && t > 0.0) {
          slope_err = std::max(slope_err, std::abs((ode.samples[i].x - ode.samples[0].x) / t - 2.0));
          slope_err = std::max(slope_err, std::abs((cdf.samples[i].x - cdf.samples[0].x) / t - 2.0));
        }
      }
    }
    return Outcome{worst <= 1e-5 && slope_err <= 1e-8,
                   fmt("max |x - closed form| = %.2e (tol 1e-5), P=0.5 slope error = %.2e (tol 1e-8)", worst,
                       slope_err)};
  });

  Fig2 f2;
  run("2", "ODE vs CDF method equivalence", 120.0, [&] {
    const auto ts = uniform_grid(0.0, 20.0, 0.25);
    double free_gap = 0.0, lossy_gap = 0.0;
    std::size_t n = 0;
    const auto free = free_gaussian_model(fig1);
    const auto lossy = dissipative_gaussian_model(fig1, lambda);
    for (double P : p_range(0.1, 0.9, 0.1)) {
      free_gap = std::max(free_gap, max_ode_cdf_gap(trace_trajectory_ode(*free, P, ts),
                                                    trace_trajectory_cdf(*free, P, ts), n));
      lossy_gap = std::max(lossy_gap, max_ode_cdf_gap(trace_trajectory_ode(*lossy, P, ts),
                                                      trace_trajectory_cdf(*lossy, P, ts), n));
    }
    f2.trace();
    double tunnel_gap = 0.0;
    std::size_t fallbacks = 0, tunnel_n = 0;
    for (std::size_t i = 0; i < f2.ps.size(); ++i) {
      tunnel_gap = std::max(tunnel_gap, max_ode_cdf_gap(f2.ode_tunnel[i], f2.cdf_tunnel[i], tunnel_n));
      for (const auto& s : f2.ode_tunnel[i].samples) fallbacks += s.cdf_fallback;
    }
    const double worst = std::max({free_gap, lossy_gap, tunnel_gap});
    return Outcome{worst <= 1e-5, fmt("max gap free %.1e, dissipative %.1e, tunneling %.1e over %zu points "
                                      "(%zu density-floor fallbacks excluded), tol 1e-5",
                                      free_gap, lossy_gap, tunnel_gap, n + tunnel_n, fallbacks)};
  });

  run("3", "dissipative termination and norm", 0.0, [&] {
    const auto lossy = dissipative_gaussian_model(fig1, lambda);
    const auto ts = uniform_grid(0.0, 30.0, 0.25);
    double end_err = 0.0;
    bool all_terminated = true;
    for (double P : p_range(0.1, 0.9, 0.1)) {
      const auto traj = trace_trajectory_ode(*lossy, P, ts);
      all_terminated = all_terminated && traj.termination == Termination::NormBelowP;
      end_err = std::max(end_err, std::abs(traj.end_t + std::log(P) / lambda));
    }
    double norm_err = 0.0;
    for (double t : uniform_grid(0.0, 30.0, 1.0)) {
      const double norm = integrate_adaptive([&](double x) { return lossy->rho(x, t); }, -kInf, kInf,
                                             lossy->tolerances(), fig1.sigma_x(t));
      norm_err = std::max(norm_err, std::abs(norm - std::exp(-lambda * t)));
    }
    return Outcome{all_terminated && end_err <= 1e-6 && norm_err <= 1e-8,
                   fmt("max |t_end + ln P / lambda| = %.2e (tol 1e-6), max |norm - e^{-lambda t}| = %.2e "
                       "(tol 1e-8)%s",
                       end_err, norm_err, all_terminated ? "" : ", some trajectory did not terminate")};
  });

  run("4", "retardation, every sampled (P, t)", 0.0, [&] {
    double worst = kInf, worst_P = 0.0, worst_t = 0.0, worst_x = 0.0;
    for (std::size_t i = 0; i < f2.ps.size(); ++i) {
      const auto& q = f2.cdf_tunnel[i].samples;
      const auto& r = f2.cdf_free[i].samples;
      for (std::size_t j = 0; j < std::min(q.size(), r.size()); ++j) {
        const double lag = r[j].x - q[j].x;
        if (lag < worst) {
          worst = lag;
          worst_P = f2.ps[i];
          worst_t = q[j].t;
          worst_x = q[j].x;
        }
      }
    }
    return Outcome{worst >= -1e-5, fmt("min lag = %.3e at P=%.2f t=%.2f (x_tunnel=%.3f, reflection side); "
                                       "tol -1e-5",
                                       worst, worst_P, worst_t, worst_x)};
  });

  run("4b", "retardation beyond the barrier (x_tunnel > a)", 0.0, [&] {
    std::vector<double> ps = f2.ps;
    std::vector<QuantileTrajectory> tun = f2.cdf_tunnel, fre = f2.cdf_free;
    // Include transmitted quantiles too; the Fig.-2 P set never reaches x > a.
    for (double P : p_range(0.005, 0.02, 0.005)) {
      tun.push_back(trace_trajectory_cdf(*f2.tunnel, P, f2.ts));
      fre.push_back(trace_trajectory_cdf(*f2.free, P, f2.ts));
    }
    const auto verdicts = retardation_scan(fre, tun, f2.barrier.half_width, 1e-5);
    bool holds = true;
    double worst = kInf;
    std::size_t checked = 0;
    for (const auto& v : verdicts) {
      holds = holds && v.holds;
      worst = std::min(worst, v.worst_margin);
      checked += v.checked;
    }
    double dp_min = kInf;
    for (double t = 0.0; t <= 10.0; t += 1.0) {
      for (double x = 0.5; x <= 5.0 + 1e-12; x += 0.25) dp_min = std::min(dp_min, delta_p_direct(*f2.free, *f2.tunnel, x, t));
    }
    return Outcome{holds && checked > 0 && dp_min >= -1e-6,
                   fmt("min lag = %.2e over %zu samples with x_tunnel > a (tol -1e-5); min Delta P = %.2e on "
                       "x in [0.5, 5], t in [0, 10] (tol -1e-6)",
                       worst, checked, dp_min)};
  });

  run("5", "positive-definite Delta P identity", 600.0, [&] {
    const auto xs = default_delta_p_positions(f2.barrier);
    const auto ts = default_delta_p_times();
    const DeltaPReport report = delta_p_report(*f2.free, *f2.tunnel, xs, ts);
    bool terms_ok = true;
    double worst_rel = 0.0;
    std::size_t bad = 0;
    for (const auto& p : report.points) {
      terms_ok = terms_ok && p.terms.term1 >= 0.0 && p.terms.term2 >= 0.0 && p.terms.term3 >= 0.0;
      const double diff = std::abs(p.dp_direct - p.terms.total);
      if (diff > std::max(1e-6, 0.01 * std::abs(p.dp_direct))) ++bad;
      if (p.dp_direct > 1e-6) worst_rel = std::max(worst_rel, p.agreement_rel);
    }
    return Outcome{terms_ok && bad == 0,
                   fmt("%zu points, terms non-negative: %s, worst relative gap (Delta P > 1e-6) = %.2e, "
                       "points outside 1%%/1e-6: %zu",
                       report.points.size(), terms_ok ? "yes" : "no", worst_rel, bad)};
  });

  run("6", "square-barrier scattering", 0.0, [&] {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uk(0.05, 8.0), uv(0.0, 25.0), ua(0.05, 1.0);
    double unit = 0.0, oracle = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double k = uk(rng), V = uv(rng), a = ua(rng);
      const ScatteringMode m = scattering_mode(k, BarrierSpec{V, a});
      unit = std::max(unit, std::abs(std::norm(m.R) + std::norm(m.T) - 1.0));
      oracle = std::max(oracle, std::abs(std::norm(m.T) - textbook_t2(k, V, a)));
    }
    oracle = std::max(oracle, std::abs(std::norm(scattering_mode(2.0, f2.barrier).T) - textbook_t2(2.0, 10.0, 0.3)));
    const ScatteringMode free = scattering_mode(1.3, BarrierSpec{0.0, 0.3});
    const bool exact = free.T == Complex(1.0, 0.0) && free.R == Complex(0.0, 0.0);
    return Outcome{unit <= 1e-12 && oracle <= 1e-10 && exact,
                   fmt("max ||R|^2+|T|^2-1| = %.1e (tol 1e-12), max ||T|^2 - textbook| = %.1e (tol 1e-10), "
                       "V=0 gives T=1 exactly: %s",
                       unit, oracle, exact ? "yes" : "no")};
  });

  run("7", "continuity residual of the tunneling packet", 0.0, [&] {
    const double h = 1e-4;
    double worst = 0.0, scale = 0.0;
    for (double t : {1.0, 3.0, 4.5, 6.0, 9.0}) {
      for (double x = -20.0; x <= 15.0; x += 0.35) {
        const double drho = (f2.tunnel->rho(x, t + h) - f2.tunnel->rho(x, t - h)) / (2 * h);
        const double dj = (f2.tunnel->current(x + h, t) - f2.tunnel->current(x - h, t)) / (2 * h);
        worst = std::max(worst, std::abs(drho + dj));
        scale = std::max(scale, std::abs(dj));
      }
    }
    return Outcome{worst <= 1e-4 * scale,
                   fmt("max |d rho/dt + dj/dx| = %.2e, 1e-4 x max |dj/dx| = %.2e", worst, 1e-4 * scale)};
  });

  run("8", "barrier crossing threshold", 0.0, [&] {
    const double T = packet_transmission_probability(f2.spectral, f2.barrier, f2.grid);
    const double step = 0.005;
    const auto ts = uniform_grid(0.0, 14.0, 0.5);
    std::string crossed;
    bool ok = true;
    for (double P : p_range(step, 0.05, step)) {
      const auto traj = trace_trajectory_cdf(*f2.tunnel, P, ts);
      const bool crosses = traj.samples.back().x > f2.barrier.half_width;
      crossed += fmt("%s%.3f:%c", crossed.empty() ? "" : " ", P, crosses ? 'T' : 'R');
      if (std::abs(P - T) <= step) continue;  // within one grid step of the threshold
      ok = ok && crosses == (P < T);
    }
    // The Fig.-2 P set lies far above T_pkt and must reflect.
    for (const auto& traj : f2.cdf_tunnel) ok = ok && traj.samples.back().x < -f2.barrier.half_width;
    return Outcome{ok, fmt("T_pkt = %.6f; final side per P (T transmitted, R reflected): %s; all P >= 0.1 "
                           "reflect",
                           T, crossed.c_str())};
  });

  run("9", "3D probability transport", 60.0, [&] {
    const auto ts = uniform_grid(0.0, 10.0, 0.5);
    double p_drift = 0.0, p_still = 0.0, spread = 0.0;
    for (bool drift : {true, false}) {
      Gaussian3DParams params;
      if (drift) params.drift = {1.0, 0.0, 0.0};
      const Gaussian3DField field = gaussian3d_model(params);
      const auto seeds = sphere_seeds(field.mean(0.0), 1.0);
      const FlowMap3D flow = trace_flowmap_3d(field, seeds, ts);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        std::vector<Vec3> surface;
        for (const auto& path : flow.paths) surface.push_back(path[i].x);
        const double dev = std::abs(probability_in_volume(field, surface, ts[i]) - flow.P);
        (drift ? p_drift : p_still) = std::max(drift ? p_drift : p_still, dev);
        if (!drift) spread = std::max(spread, fit_sphere(surface).relative_spread);
      }
    }
    return Outcome{p_drift <= 1e-4 && p_still <= 1e-4 && spread <= 1e-5,
                   fmt("max |P(t) - P(0)| drift %.1e / zero drift %.1e (tol 1e-4), max radius spread %.1e "
                       "(tol 1e-5)",
                       p_drift, p_still, spread)};
  });

  run("10", "slower inside the barrier", 0.0, [&] {
    const auto ts = uniform_grid(0.0, 12.0, 0.02);
    const double a = f2.barrier.half_width;
    const double far = a + 2.0 * fig1.sigma_x0;
    std::size_t judged = 0, traced = 0;
    bool ok = true;
    double worst_ratio = 0.0, worst_P = 0.0, worst_x = 0.0;
    std::vector<double> ps = p_range(0.005, 0.05, 0.005);
    ps.insert(ps.end(), f2.ps.begin(), f2.ps.end());
    for (double P : ps) {
      const auto traj = trace_trajectory_ode(*f2.tunnel, P, ts);
      ++traced;
      double inside = -1.0, outside = -1.0, inside_x = 0.0;
      for (const auto& s : traj.samples) {
        if (!std::isfinite(s.v)) continue;
        if (std::abs(s.x) < a) {
          if (std::abs(s.v) > inside) inside_x = s.x;
          inside = std::max(inside, std::abs(s.v));
        } else if (std::abs(s.x) > far) {
          outside = std::max(outside, std::abs(s.v));
        }
      }
      if (inside < 0.0 || outside < 0.0) continue;  // needs samples in both regions
      ++judged;
      if (inside / outside > worst_ratio) {
        worst_ratio = inside / outside;
        worst_P = P;
        worst_x = inside_x;
      }
      ok = ok && inside <= outside;
    }
    return Outcome{ok && judged > 0,
                   fmt("%zu of %zu trajectories have samples inside |x| < a and beyond |x| > a + 2 sigma_x0; "
                       "worst max|v| inside / outside = %.4f at P=%.3f (interior maximum at x=%.4f)",
                       judged, traced, worst_ratio, worst_P, worst_x)};
  });

  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
