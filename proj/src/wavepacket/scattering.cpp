#include <cmath>
#include <limits>

#include "qmotion/errors.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

namespace {

constexpr Complex kI{0.0, 1.0};

// sin(gamma y) / gamma, analytic at gamma = 0.
Complex sinc_scaled(Complex gamma, double y) {
  const Complex z = gamma * y;
  if (std::abs(z) < 1e-4) {
    const Complex z2 = z * z;
    return y * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  }
  return std::sin(z) / gamma;
}

}  // namespace

void BarrierSpec::validate() const {
  if (!(height >= 0.0) || !std::isfinite(height)) throw InvalidRange("barrier height must be >= 0");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw InvalidRange("barrier half-width must be > 0");
  }
}

Complex barrier_gamma(double k, const BarrierSpec& barrier) {
  return std::sqrt(Complex(k * k - barrier.coupling(), 0.0));
}

Complex transmission_denominator(double k, const BarrierSpec& barrier) {
  const Complex g = barrier_gamma(k, barrier);
  const double a = barrier.half_width;
  return (k + g) * (k + g) * std::exp(2.0 * kI * a * (k - g)) -
         (k - g) * (k - g) * std::exp(2.0 * kI * a * (k + g));
}

ScatteringMode scattering_mode(double k, const BarrierSpec& barrier) {
  if (!(k > 0.0)) throw DegenerateK("scattering_mode: wave number must be positive");
  barrier.validate();
  ScatteringMode mode;
  mode.k = k;
  mode.a = barrier.half_width;
  const double a = barrier.half_width;
  if (barrier.height == 0.0) {
    mode.gamma = k;
    mode.T = 1.0;
    mode.R = 0.0;
    mode.A = 1.0;
    mode.B = 0.0;
    return mode;
  }
  const Complex g = barrier_gamma(k, barrier);
  mode.gamma = g;
  const Complex c = std::cos(2.0 * a * g);
  const Complex s = sinc_scaled(g, 2.0 * a);
  // Propagating the transmitted solution back from x = a to x = -a and
  // projecting onto the incident wave.
  mode.T = 2.0 * kI * k * std::exp(-2.0 * kI * k * a) / (2.0 * kI * k * c + (k * k + g * g) * s);
  const Complex scale = mode.T * std::exp(kI * k * a);
  const Complex u_left = scale * (c - kI * k * s);
  mode.R = u_left * std::exp(-kI * k * a) - std::exp(-2.0 * kI * k * a);
  if (g != 0.0) {
    mode.A = scale * std::exp(-kI * g * a) * (g + k) / (2.0 * g);
    mode.B = scale * std::exp(kI * g * a) * (g - k) / (2.0 * g);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    mode.A = Complex(nan, nan);
    mode.B = Complex(nan, nan);
  }
  return mode;
}

Complex ScatteringMode::value(double x) const {
  if (x <= -a) return std::exp(kI * k * x) + R * std::exp(-kI * k * x);
  if (x >= a) return T * std::exp(kI * k * x);
  const double y = x - a;
  return T * std::exp(kI * k * a) * (std::cos(gamma * y) + kI * k * sinc_scaled(gamma, y));
}

Complex ScatteringMode::derivative(double x) const {
  if (x <= -a) return kI * k * (std::exp(kI * k * x) - R * std::exp(-kI * k * x));
  if (x >= a) return kI * k * T * std::exp(kI * k * x);
  const double y = x - a;
  return T * std::exp(kI * k * a) *
         (-gamma * gamma * sinc_scaled(gamma, y) + kI * k * std::cos(gamma * y));
}

}  // namespace qmotion
