#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qmotion/errors.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

namespace {
constexpr Complex kI{0.0, 1.0};
}

SpectralFunction SpectralFunction::gaussian(double k_bar, double sigma_k, double x_bar, double k_lo,
                                            double k_hi) {
  if (!(sigma_k > 0.0)) throw InvalidRange("spectral width must be > 0");
  if (!(k_lo >= 0.0) || !(k_hi > k_lo)) throw InvalidRange("spectral support must satisfy 0 <= k_lo < k_hi");
  SpectralFunction f;
  f.k_bar_ = k_bar;
  f.sigma_k_ = sigma_k;
  f.x_bar_ = x_bar;
  f.k_lo_ = k_lo;
  f.k_hi_ = k_hi;
  // |psi~|^2 is a normal density of width sigma_k; renormalise its mass on [k_lo, k_hi].
  const double scale = std::numbers::sqrt2 * sigma_k;
  const double mass = 0.5 * (std::erf((k_hi - k_bar) / scale) - std::erf((k_lo - k_bar) / scale));
  if (!(mass > 0.0)) throw InvalidRange("spectral support carries no probability");
  f.norm_ = 1.0 / std::sqrt(std::sqrt(2.0 * std::numbers::pi) * sigma_k * mass);
  return f;
}

SpectralFunction SpectralFunction::from_packet(const GaussianPacketParams& params, const KGrid& grid) {
  params.validate();
  return gaussian(params.mass * params.v_bar, params.sigma_p(), params.x_bar, grid);
}

double SpectralFunction::operator()(double k) const {
  if (k < k_lo_ || k > k_hi_ || k < 0.0) return 0.0;
  const double u = (k - k_bar_) / sigma_k_;
  return norm_ * std::exp(-0.25 * u * u);
}

Complex SpectralFunction::at(double k, double x, double t) const {
  return (*this)(k) * std::polar(1.0, k * (x - x_bar_) - 0.5 * k * k * t);
}

std::size_t required_k_nodes(double k_max, double t) {
  const double periods = k_max * k_max * std::abs(t) / (4.0 * std::numbers::pi);
  return static_cast<std::size_t>(std::ceil(8.0 * periods));
}

SpectralPacketModel::SpectralPacketModel(SpectralFunction spectral, std::optional<BarrierSpec> barrier,
                                         KGrid grid, const Tolerances& tol)
    : PacketModel(tol), spectral_(spectral), barrier_(barrier), grid_(std::move(grid)) {
  tol.validate();
  if (grid_.size() == 0) throw InvalidRange("empty k grid");
  if (grid_.nodes.front() <= 0.0) throw InvalidRange("k grid must be strictly positive");
  if (barrier_) barrier_->validate();
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  amplitude_.reserve(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    amplitude_.push_back(grid_.weights[i] * spectral_(grid_.nodes[i]) * inv_sqrt_2pi);
  }
  if (barrier_) {
    modes_.reserve(grid_.size());
    interior_scale_.reserve(grid_.size());
    for (double k : grid_.nodes) {
      modes_.push_back(scattering_mode(k, *barrier_));
      interior_scale_.push_back(modes_.back().T * std::exp(kI * k * barrier_->half_width));
    }
  }
}

void SpectralPacketModel::check_resolution(double t) const {
  const std::size_t needed = required_k_nodes(grid_.k_max, t);
  if (grid_.size() < needed) {
    throw GridTooCoarse("k grid has " + std::to_string(grid_.size()) + " nodes, t = " +
                        std::to_string(t) + " needs " + std::to_string(needed));
  }
}

void SpectralPacketModel::wavefunction(double x, double t, Complex& psi, Complex& dpsi) const {
  check_resolution(t);
  psi = 0.0;
  dpsi = 0.0;
  const double xb = spectral_.x_bar();
  const std::size_t n = grid_.size();
  if (!barrier_ || x >= barrier_->half_width) {
    for (std::size_t i = 0; i < n; ++i) {
      const double k = grid_.nodes[i];
      Complex term = amplitude_[i] * std::polar(1.0, k * (x - xb) - 0.5 * k * k * t);
      if (barrier_) term *= modes_[i].T;
      psi += term;
      dpsi += k * term;
    }
    dpsi *= kI;
    return;
  }
  const double a = barrier_->half_width;
  if (x <= -a) {
    for (std::size_t i = 0; i < n; ++i) {
      const double k = grid_.nodes[i];
      const double energy_phase = -0.5 * k * k * t;
      const Complex incident = amplitude_[i] * std::polar(1.0, k * (x - xb) + energy_phase);
      const Complex reflected =
          amplitude_[i] * modes_[i].R * std::polar(1.0, -k * (x + xb) + energy_phase);
      psi += incident + reflected;
      dpsi += kI * k * (incident - reflected);
    }
    return;
  }
  const double y = x - a;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = grid_.nodes[i];
    const Complex g = modes_[i].gamma;
    const Complex weight =
        amplitude_[i] * interior_scale_[i] * std::polar(1.0, -k * xb - 0.5 * k * k * t);
    const Complex gy = g * y;
    const Complex cos_gy = std::cos(gy);
    const Complex sinc = std::abs(gy) < 1e-4 ? y * (1.0 - gy * gy / 6.0) : std::sin(gy) / g;
    psi += weight * (cos_gy + kI * k * sinc);
    dpsi += weight * (-g * g * sinc + kI * k * cos_gy);
  }
}

double SpectralPacketModel::rho(double x, double t) const {
  Complex psi;
  Complex dpsi;
  wavefunction(x, t, psi, dpsi);
  return std::norm(psi);
}

double SpectralPacketModel::current(double x, double t) const {
  Complex psi;
  Complex dpsi;
  wavefunction(x, t, psi, dpsi);
  return std::imag(std::conj(psi) * dpsi);
}

double SpectralPacketModel::mass_between(double x1, double x2, double t) const {
  if (x1 == x2) return 0.0;
  if (x1 > x2) return -mass_between(x2, x1, t);
  check_resolution(t);
  // Panels no wider than the packet width, split at the barrier edges.
  std::vector<double> cuts{x1};
  if (barrier_) {
    for (double edge : {-barrier_->half_width, barrier_->half_width}) {
      if (edge > x1 && edge < x2) cuts.push_back(edge);
    }
  }
  cuts.push_back(x2);
  const double panel = width_scale(t);
  double total = 0.0;
  auto density = [&](double y) { return rho(y, t); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / panel)));
    const double h = (hi - lo) / static_cast<double>(pieces);
    for (std::size_t j = 0; j < pieces; ++j) {
      const double a = lo + h * static_cast<double>(j);
      const double b = j + 1 == pieces ? hi : a + h;
      total += integrate_adaptive(density, a, b, tolerances());
    }
  }
  return total;
}

double SpectralPacketModel::tail(double x, double t) const {
  // Outside the support the k-sum only carries aliasing noise.
  const Interval support = support_hint(t);
  if (x >= support.hi) return 0.0;
  return mass_between(std::max(x, support.lo), support.hi, t);
}

double SpectralPacketModel::width_scale(double t) const {
  const double sigma_x0 = 1.0 / (2.0 * spectral_.sigma_k());
  const double sv = spectral_.sigma_k();
  return std::sqrt(sigma_x0 * sigma_x0 + sv * sv * t * t);
}

double SpectralPacketModel::peak_density(double t) const {
  return 1.0 / (std::sqrt(2.0 * std::numbers::pi) * width_scale(t));
}

Interval SpectralPacketModel::support_hint(double t) const {
  const double spread = 8.0 * width_scale(t);
  const double xb = spectral_.x_bar();
  const double v_min = grid_.k_min;
  const double v_max = grid_.k_max;
  Interval out{xb + v_min * t - spread, xb + v_max * t + spread};
  if (barrier_) {
    // Mirror image of the incident interval for the reflected packet.
    out.lo = std::min(out.lo, -xb - v_max * t - spread);
    out.hi = std::max(out.hi, -xb - v_min * t + spread);
  }
  return out;
}

std::shared_ptr<const SpectralPacketModel> tunneling_packet_model(const SpectralFunction& spectral,
                                                                 const BarrierSpec& barrier,
                                                                 const KGrid& grid,
                                                                 const Tolerances& tol) {
  return std::make_shared<SpectralPacketModel>(spectral, barrier, grid, tol);
}

std::shared_ptr<const SpectralPacketModel> free_spectral_model(const SpectralFunction& spectral,
                                                              const KGrid& grid,
                                                              const Tolerances& tol) {
  return std::make_shared<SpectralPacketModel>(spectral, std::nullopt, grid, tol);
}

}  // namespace qmotion
