#include <cmath>
#include <numbers>

#include "qmotion/errors.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

void Gaussian3DParams::validate() const {
  if (!(sigma_x0 > 0.0) || !std::isfinite(sigma_x0)) throw InvalidRange("sigma_x0 must be > 0");
  if (!(mass > 0.0)) throw InvalidRange("mass must be > 0");
}

double Gaussian3DParams::sigma_x(double t) const {
  const double sv = sigma_v();
  return std::sqrt(sigma_x0 * sigma_x0 + sv * sv * t * t);
}

Gaussian3DField::Gaussian3DField(const Gaussian3DParams& params) : params_(params) {
  params_.validate();
}

Vec3 Gaussian3DField::mean(double t) const {
  Vec3 m;
  for (int i = 0; i < 3; ++i) m[i] = params_.center[i] + params_.drift[i] * t;
  return m;
}

double Gaussian3DField::rho(const Vec3& x, double t) const {
  const double s = sigma_x(t);
  const Vec3 m = mean(t);
  double r2 = 0.0;
  for (int i = 0; i < 3; ++i) r2 += (x[i] - m[i]) * (x[i] - m[i]);
  const double norm = std::pow(2.0 * std::numbers::pi * s * s, -1.5);
  return norm * std::exp(-0.5 * r2 / (s * s));
}

Vec3 Gaussian3DField::velocity(const Vec3& x, double t) const {
  const double s = sigma_x(t);
  const double sv = params_.sigma_v();
  const Vec3 m = mean(t);
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = params_.drift[i] + sv * sv * t * (x[i] - m[i]) / (s * s);
  return v;
}

Vec3 Gaussian3DField::current(const Vec3& x, double t) const {
  const double r = rho(x, t);
  Vec3 j = velocity(x, t);
  for (double& c : j) c *= r;
  return j;
}

Gaussian3DField gaussian3d_model(const Gaussian3DParams& params) { return Gaussian3DField(params); }

}  // namespace qmotion
