#include <cmath>
#include <limits>

#include "qmotion/errors.hpp"
#include "qmotion/ode.hpp"
#include "qmotion/quantile.hpp"

namespace qmotion {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double velocity_or_nan(const PacketModel& model, double x, double t) {
  try {
    return quantile_velocity(model, x, t);
  } catch (const VelocitySingular&) {
    return kNaN;
  }
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw InvalidRange("trajectory: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidRange("trajectory: times must increase strictly");
  }
  if (!(t_grid.front() >= 0.0)) throw InvalidRange("trajectory: times must be >= 0");
}

// Grid times strictly before the norm crossing; sets the termination record.
std::size_t usable_prefix(const PacketModel& model, double P, std::span<const double> t_grid,
                          QuantileTrajectory& out) {
  if (model.conserves_norm()) return t_grid.size();
  const auto crossing = norm_crossing_time(model, P, t_grid.front(), t_grid.back());
  if (!crossing) return t_grid.size();
  out.termination = Termination::NormBelowP;
  out.end_t = *crossing;
  out.end_x = -kInf;
  std::size_t n = 0;
  while (n < t_grid.size() && t_grid[n] < *crossing) ++n;
  return n;
}

}  // namespace

QuantileTrajectory trace_trajectory_cdf(const PacketModel& model, double P,
                                        std::span<const double> t_grid) {
  check_grid(t_grid);
  QuantileTrajectory out;
  out.P = P;
  const std::size_t n = usable_prefix(model, P, t_grid, out);
  std::optional<double> seed;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_grid[i];
    double x;
    try {
      x = quantile_position(model, P, t, seed);
    } catch (const NormBelowP& e) {
      out.termination = Termination::NormBelowP;
      out.end_t = e.t();
      out.end_x = -kInf;
      return out;
    }
    const double v = velocity_or_nan(model, x, t);
    out.samples.push_back({t, x, v, false});
    // Seed the next inversion with a linear extrapolation along the trajectory.
    seed = x;
    if (std::isfinite(v) && i + 1 < n) seed = x + v * (t_grid[i + 1] - t);
  }
  return out;
}

QuantileTrajectory trace_trajectory_ode(const PacketModel& model, double P,
                                        std::span<const double> t_grid) {
  check_grid(t_grid);
  QuantileTrajectory out;
  out.P = P;
  const std::size_t n = usable_prefix(model, P, t_grid, out);
  if (n == 0) return out;

  const Tolerances& tol = model.tolerances();
  double x = quantile_position(model, P, t_grid[0]);
  out.samples.push_back({t_grid[0], x, velocity_or_nan(model, x, t_grid[0]), false});
  ScalarField rhs = [&model](double t, double y) { return quantile_velocity(model, y, t); };
  double step = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double t0 = t_grid[i - 1];
    const double t1 = t_grid[i];
    bool fallback = false;
    try {
      const OdePath<1> path = integrate_ode(rhs, x, t0, t1, tol, {}, {}, kInf, step);
      x = path.x_end[0];
      step = path.next_step;
    } catch (const VelocitySingular&) {
      fallback = true;
    } catch (const StepUnderflow&) {
      fallback = true;
    }
    if (fallback) {
      try {
        x = quantile_position(model, P, t1, x);
      } catch (const NumericalError&) {
        out.termination = Termination::VelocitySingular;
        out.end_t = t0;
        out.end_x = x;
        return out;
      }
      step = 0.0;
    }
    out.samples.push_back({t1, x, velocity_or_nan(model, x, t1), fallback});
  }
  return out;
}

QuantileTrajectory trace_trajectory_ode(const PacketModel& model, double P, double t0, double t1) {
  if (!(t1 > t0)) throw InvalidRange("trace_trajectory_ode: t1 must exceed t0");
  const std::vector<double> grid = uniform_grid(t0, t1, (t1 - t0) / 200.0);
  return trace_trajectory_ode(model, P, grid);
}

}  // namespace qmotion
