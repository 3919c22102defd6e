#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmotion/errors.hpp"
#include "qmotion/ode.hpp"
#include "qmotion/quantile.hpp"

namespace qmotion {

std::vector<Vec3> sphere_seeds(const Vec3& center, double radius) {
  if (!(radius > 0.0)) throw InvalidRange("sphere_seeds: radius must be > 0");
  std::vector<Vec3> dirs;
  for (int axis = 0; axis < 3; ++axis) {
    for (double s : {-1.0, 1.0}) {
      Vec3 d{0.0, 0.0, 0.0};
      d[axis] = s;
      dirs.push_back(d);
    }
  }
  const double edge = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      for (double si : {-1.0, 1.0}) {
        for (double sj : {-1.0, 1.0}) {
          Vec3 d{0.0, 0.0, 0.0};
          d[i] = si * edge;
          d[j] = sj * edge;
          dirs.push_back(d);
        }
      }
    }
  }
  const double corner = 1.0 / std::numbers::sqrt3;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) dirs.push_back({sx * corner, sy * corner, sz * corner});
    }
  }
  std::vector<Vec3> seeds;
  seeds.reserve(dirs.size());
  for (const Vec3& d : dirs) {
    seeds.push_back({center[0] + radius * d[0], center[1] + radius * d[1], center[2] + radius * d[2]});
  }
  return seeds;
}

FlowMap3D trace_flowmap_3d(const Gaussian3DField& field, std::span<const Vec3> seeds,
                           std::span<const double> t_grid, const Tolerances& tol) {
  if (t_grid.empty()) throw InvalidRange("trace_flowmap_3d: empty time grid");
  if (seeds.empty()) throw InvalidRange("trace_flowmap_3d: no seeds");
  FlowMap3D out;
  out.seeds.assign(seeds.begin(), seeds.end());
  out.P = probability_in_volume(field, seeds, t_grid.front());
  VectorField<3> rhs = [&](double t, const State<3>& x) -> State<3> {
    const double floor = kDensityFloorRel * field.rho(field.mean(t), t);
    if (!(field.rho(x, t) > floor)) {
      throw VelocitySingular("trace_flowmap_3d: density below floor", t, x[0]);
    }
    return field.velocity(x, t);
  };
  for (const Vec3& seed : seeds) {
    const OdePath<3> path =
        integrate_ode<3>(rhs, seed, t_grid.front(), t_grid.back(), tol, {}, t_grid);
    std::vector<FlowPoint> points;
    points.reserve(path.samples.size());
    for (const auto& s : path.samples) points.push_back({s.t, s.x});
    out.paths.push_back(std::move(points));
  }
  return out;
}

SphereFit fit_sphere(std::span<const Vec3> surface) {
  if (surface.empty()) throw InvalidRange("fit_sphere: no points");
  SphereFit fit;
  for (const Vec3& p : surface) {
    for (int i = 0; i < 3; ++i) fit.center[i] += p[i];
  }
  for (double& c : fit.center) c /= static_cast<double>(surface.size());
  double r_min = kInf;
  double r_max = 0.0;
  double r_sum = 0.0;
  for (const Vec3& p : surface) {
    const double r = std::hypot(p[0] - fit.center[0], p[1] - fit.center[1], p[2] - fit.center[2]);
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
    r_sum += r;
  }
  fit.radius = r_sum / static_cast<double>(surface.size());
  fit.relative_spread = fit.radius > 0.0 ? (r_max - r_min) / fit.radius : 0.0;
  return fit;
}

double probability_in_ball(const Gaussian3DField& field, const Vec3& center, double radius, double t) {
  if (!(radius >= 0.0)) throw InvalidRange("probability_in_ball: negative radius");
  if (radius == 0.0) return 0.0;
  static const KGrid radial = gauss_legendre_grid(0.0, 1.0, 64);
  static const KGrid polar = gauss_legendre_grid(-1.0, 1.0, 48);
  constexpr int kAzimuthal = 64;
  const double dphi = 2.0 * std::numbers::pi / kAzimuthal;
  double total = 0.0;
  for (std::size_t ir = 0; ir < radial.size(); ++ir) {
    const double r = radius * radial.nodes[ir];
    double shell = 0.0;
    for (std::size_t ic = 0; ic < polar.size(); ++ic) {
      const double ct = polar.nodes[ic];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      double ring = 0.0;
      for (int ip = 0; ip < kAzimuthal; ++ip) {
        const double phi = dphi * (ip + 0.5);
        const Vec3 x{center[0] + r * st * std::cos(phi), center[1] + r * st * std::sin(phi),
                     center[2] + r * ct};
        ring += field.rho(x, t);
      }
      shell += polar.weights[ic] * ring * dphi;
    }
    total += radial.weights[ir] * radius * r * r * shell;
  }
  return total;
}

double probability_in_volume(const Gaussian3DField& field, std::span<const Vec3> surface, double t) {
  const SphereFit fit = fit_sphere(surface);
  return probability_in_ball(field, fit.center, fit.radius, t);
}

}  // namespace qmotion
