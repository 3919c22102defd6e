#include <cmath>
#include <numbers>

#include "qmotion/errors.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

void GaussianPacketParams::validate() const {
  if (!(sigma_x0 > 0.0) || !std::isfinite(sigma_x0)) throw InvalidRange("sigma_x0 must be > 0");
  if (!(mass > 0.0)) throw InvalidRange("mass must be > 0");
  if (!std::isfinite(x_bar) || !std::isfinite(v_bar)) throw InvalidRange("packet mean must be finite");
}

double GaussianPacketParams::sigma_x(double t) const {
  const double sv = sigma_v();
  return std::sqrt(sigma_x0 * sigma_x0 + sv * sv * t * t);
}

double PacketModel::mass_between(double x1, double x2, double t) const {
  return tail(x1, t) - tail(x2, t);
}

double PacketModel::loss_tail(double x, double t) const {
  const Interval support = support_hint(t);
  if (x >= support.hi) return 0.0;
  return integrate_adaptive([&](double y) { return loss(y, t); }, x, support.hi, tolerances(),
                            width_scale(t));
}

namespace {

class GaussianModel : public PacketModel {
 public:
  GaussianModel(const GaussianPacketParams& params, double lambda, const Tolerances& tol)
      : PacketModel(tol), p_(params), lambda_(lambda) {}

  double rho(double x, double t) const override {
    const double s = p_.sigma_x(t);
    const double u = (x - centre(t)) / s;
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * s) * decay(t);
  }

  double current(double x, double t) const override {
    const double s = p_.sigma_x(t);
    const double sv = p_.sigma_v();
    return rho(x, t) * (p_.v_bar + sv * sv * t * (x - centre(t)) / (s * s));
  }

  double loss(double x, double t) const override { return lambda_ * rho(x, t); }

  double tail(double x, double t) const override { return upper(x, t) * decay(t); }

  double mass_between(double x1, double x2, double t) const override {
    const double m = centre(t);
    if (x2 <= m) return (lower(x2, t) - lower(x1, t)) * decay(t);
    return (upper(x1, t) - upper(x2, t)) * decay(t);
  }

  double loss_tail(double x, double t) const override { return lambda_ * tail(x, t); }

  double total_norm(double t) const override { return decay(t); }

  Interval support_hint(double t) const override {
    const double s = p_.sigma_x(t);
    return {centre(t) - 12.0 * s, centre(t) + 12.0 * s};
  }

  double width_scale(double t) const override { return p_.sigma_x(t); }

  double peak_density(double t) const override {
    return decay(t) / (std::sqrt(2.0 * std::numbers::pi) * p_.sigma_x(t));
  }

  bool conserves_norm() const override { return lambda_ == 0.0; }

 private:
  double centre(double t) const { return p_.x_bar + p_.v_bar * t; }
  double decay(double t) const { return lambda_ == 0.0 ? 1.0 : std::exp(-lambda_ * t); }
  double upper(double x, double t) const {
    return 0.5 * qmotion::erfc((x - centre(t)) / (std::numbers::sqrt2 * p_.sigma_x(t)));
  }
  double lower(double x, double t) const {
    return 0.5 * qmotion::erfc((centre(t) - x) / (std::numbers::sqrt2 * p_.sigma_x(t)));
  }

  GaussianPacketParams p_;
  double lambda_;
};

}  // namespace

PacketModelPtr free_gaussian_model(const GaussianPacketParams& params, const Tolerances& tol) {
  params.validate();
  tol.validate();
  return std::make_shared<GaussianModel>(params, 0.0, tol);
}

PacketModelPtr dissipative_gaussian_model(const GaussianPacketParams& params, double lambda,
                                          const Tolerances& tol) {
  params.validate();
  tol.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidRange("loss rate must be >= 0");
  return std::make_shared<GaussianModel>(params, lambda, tol);
}

namespace presets {

GaussianPacketParams fig1_packet() {
  GaussianPacketParams p;
  p.x_bar = -10.0;
  p.v_bar = 2.0;
  p.sigma_x0 = 1.0 / (2.0 * 0.2);
  p.mass = 1.0;
  return p;
}

BarrierSpec fig2_barrier() { return {10.0, 0.3}; }

}  // namespace presets

}  // namespace qmotion
