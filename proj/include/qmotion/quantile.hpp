#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qmotion/numerics.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

// Fraction of the peak density below which j / rho is treated as singular.
inline constexpr double kDensityFloorRel = 1e-14;

enum class Termination { Completed, NormBelowP, VelocitySingular };

const char* to_string(Termination termination);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;
  // Set when the ODE tracer fell back to CDF inversion for the step ending here.
  bool cdf_fallback = false;
};

// Quantile trajectory x_P(t): probability P lies to the right of x at time t.
struct QuantileTrajectory {
  double P = 0.0;
  std::vector<TrajectorySample> samples;
  Termination termination = Termination::Completed;
  // NormBelowP: time at which F(t) reaches P. VelocitySingular: last state.
  double end_t = 0.0;
  double end_x = 0.0;
};

double tail_probability(const PacketModel& model, double x, double t);

// Position with tail_probability(x, t) == P. The bracket is seeded at `seed`
// (or the support centre), width 4 width_scale(t), expanded geometrically.
// Throws NormBelowP when P >= F(t).
double quantile_position(const PacketModel& model, double P, double t,
                         std::optional<double> seed = std::nullopt);

// j / rho, minus (1 / rho) times the loss integral to the right of x for
// non-conserving models. Throws VelocitySingular below the density floor.
double quantile_velocity(const PacketModel& model, double x, double t);

// Time in [t0, t1] at which the norm F(t) falls to P, if it does.
std::optional<double> norm_crossing_time(const PacketModel& model, double P, double t0, double t1);

// Quantile positions by inverting the tail at every grid time.
QuantileTrajectory trace_trajectory_cdf(const PacketModel& model, double P,
                                        std::span<const double> t_grid);

// Integrates dx/dt = quantile_velocity from x_P(t_grid[0]) and samples at the
// grid times. Steps that hit the density floor or underflow are replaced by
// CDF inversion and flagged.
QuantileTrajectory trace_trajectory_ode(const PacketModel& model, double P,
                                        std::span<const double> t_grid);

// Same, sampled on 200 uniform steps of [t0, t1].
QuantileTrajectory trace_trajectory_ode(const PacketModel& model, double P, double t0, double t1);

// Three-dimensional flow map of dx/dt = j / rho.
struct FlowPoint {
  double t = 0.0;
  Vec3 x{};
};

struct FlowMap3D {
  std::vector<Vec3> seeds;
  std::vector<std::vector<FlowPoint>> paths;
  // Probability inside the seed sphere at the first grid time.
  double P = 0.0;
};

// 26 points on a sphere: 6 axial, 12 edge and 8 corner directions.
std::vector<Vec3> sphere_seeds(const Vec3& center, double radius);

FlowMap3D trace_flowmap_3d(const Gaussian3DField& field, std::span<const Vec3> seeds,
                           std::span<const double> t_grid, const Tolerances& tol = Tolerances{});

struct SphereFit {
  Vec3 center{};
  double radius = 0.0;
  // (max - min) / mean of the point-to-centre distances.
  double relative_spread = 0.0;
};

SphereFit fit_sphere(std::span<const Vec3> surface);

// Probability of the field inside the ball, by radial x polar x azimuthal quadrature.
double probability_in_ball(const Gaussian3DField& field, const Vec3& center, double radius, double t);

// Probability inside the sphere spanned by a transported spherical seed surface.
double probability_in_volume(const Gaussian3DField& field, std::span<const Vec3> surface, double t);

}  // namespace qmotion
