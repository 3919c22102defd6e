#pragma once

#include <array>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "qmotion/numerics.hpp"

namespace qmotion {

using Complex = std::complex<double>;

// Initial Gaussian packet. Natural units: hbar = 1, mass fixed to 1.
struct GaussianPacketParams {
  double x_bar = -10.0;
  double v_bar = 2.0;
  double sigma_x0 = 2.5;
  double mass = 1.0;

  void validate() const;
  double sigma_p() const { return 1.0 / (2.0 * sigma_x0); }
  double sigma_v() const { return sigma_p() / mass; }
  double sigma_x(double t) const;
};

// Repulsive square barrier V(x) = height for |x| < half_width.
struct BarrierSpec {
  double height = 10.0;
  double half_width = 0.3;

  void validate() const;
  // 2 m V / hbar^2, the squared wave number at the barrier top.
  double coupling() const { return 2.0 * height; }
};

// Probability density rho, current j, loss density l and the right tail
// integral for a one-dimensional packet. Implementations are immutable and
// safe to evaluate concurrently.
class PacketModel {
 public:
  virtual ~PacketModel() = default;

  virtual double rho(double x, double t) const = 0;
  virtual double current(double x, double t) const = 0;
  virtual double loss(double /*x*/, double /*t*/) const { return 0.0; }

  // Integral of rho over [x, +inf).
  virtual double tail(double x, double t) const = 0;
  // Integral of rho over [x1, x2].
  virtual double mass_between(double x1, double x2, double t) const;
  // Integral of the loss density over [x, +inf); quadrature by default.
  virtual double loss_tail(double x, double t) const;

  // Total probability F(t).
  virtual double total_norm(double t) const = 0;
  // Interval holding all but ~1e-12 of the probability at time t.
  virtual Interval support_hint(double t) const = 0;
  // Characteristic spatial width, used to seed quantile brackets.
  virtual double width_scale(double t) const = 0;
  // Estimate of the maximum density, used for the velocity floor.
  virtual double peak_density(double t) const = 0;

  virtual bool conserves_norm() const { return true; }

  const Tolerances& tolerances() const { return tol_; }

 protected:
  explicit PacketModel(const Tolerances& tol) : tol_(tol) {}

 private:
  Tolerances tol_;
};

using PacketModelPtr = std::shared_ptr<const PacketModel>;

// Closed-form spreading Gaussian.
PacketModelPtr free_gaussian_model(const GaussianPacketParams& params,
                                   const Tolerances& tol = Tolerances{});

// Gaussian with global exponential probability loss exp(-lambda t).
PacketModelPtr dissipative_gaussian_model(const GaussianPacketParams& params, double lambda,
                                          const Tolerances& tol = Tolerances{});

// Gaussian momentum-space amplitude truncated to [k_lo, k_hi] (k_lo >= 0) and
// renormalised so that its squared modulus integrates to one there.
class SpectralFunction {
 public:
  static SpectralFunction gaussian(double k_bar, double sigma_k, double x_bar, double k_lo,
                                   double k_hi);
  static SpectralFunction gaussian(double k_bar, double sigma_k, double x_bar, const KGrid& grid) {
    return gaussian(k_bar, sigma_k, x_bar, grid.k_min, grid.k_max);
  }
  // Spectral function of a Gaussian packet with the given initial parameters.
  static SpectralFunction from_packet(const GaussianPacketParams& params, const KGrid& grid);

  double operator()(double k) const;
  // psi~(k) exp[i k (x - x_bar) - i k^2 t / 2]
  Complex at(double k, double x, double t) const;

  double k_bar() const { return k_bar_; }
  double sigma_k() const { return sigma_k_; }
  double x_bar() const { return x_bar_; }
  double norm() const { return norm_; }
  double k_lo() const { return k_lo_; }
  double k_hi() const { return k_hi_; }

 private:
  double k_bar_ = 0.0;
  double sigma_k_ = 0.0;
  double x_bar_ = 0.0;
  double norm_ = 0.0;
  double k_lo_ = 0.0;
  double k_hi_ = 0.0;
};

// Stationary scattering state of the square barrier for incidence from the left:
//   x < -a : e^{ikx} + R e^{-ikx}
//   |x| < a: A e^{i gamma x} + B e^{-i gamma x}
//   x > a  : T e^{ikx}
struct ScatteringMode {
  double k = 0.0;
  double a = 0.0;
  Complex gamma;
  Complex T;
  Complex R;
  // Interior coefficients; NaN when gamma == 0 (value() stays well defined).
  Complex A;
  Complex B;

  Complex value(double x) const;
  Complex derivative(double x) const;
};

// gamma = principal sqrt(k^2 - 2mV/hbar^2); +i kappa (kappa > 0) under the barrier.
Complex barrier_gamma(double k, const BarrierSpec& barrier);

// D(k) = (k+gamma)^2 e^{2ia(k-gamma)} - (k-gamma)^2 e^{2ia(k+gamma)}; T = 4 k gamma / D.
Complex transmission_denominator(double k, const BarrierSpec& barrier);

// Throws DegenerateK for k <= 0.
ScatteringMode scattering_mode(double k, const BarrierSpec& barrier);

// Minimum Gauss-Legendre node count resolving the k^2 t / 2 phase at k_max
// with eight nodes per period.
std::size_t required_k_nodes(double k_max, double t);

// Packet built as a k-superposition of scattering modes (or plain waves when
// no barrier is given). Throws GridTooCoarse from evaluation when the grid
// cannot resolve the phase at the requested time.
class SpectralPacketModel final : public PacketModel {
 public:
  SpectralPacketModel(SpectralFunction spectral, std::optional<BarrierSpec> barrier, KGrid grid,
                      const Tolerances& tol = Tolerances{});

  double rho(double x, double t) const override;
  double current(double x, double t) const override;
  double tail(double x, double t) const override;
  double mass_between(double x1, double x2, double t) const override;
  double total_norm(double) const override { return 1.0; }
  Interval support_hint(double t) const override;
  double width_scale(double t) const override;
  double peak_density(double t) const override;

  // psi(x, t) and d psi / dx, both by summation over the k grid.
  void wavefunction(double x, double t, Complex& psi, Complex& dpsi) const;

  const SpectralFunction& spectral() const { return spectral_; }
  const KGrid& grid() const { return grid_; }
  const std::optional<BarrierSpec>& barrier() const { return barrier_; }

 private:
  void check_resolution(double t) const;

  SpectralFunction spectral_;
  std::optional<BarrierSpec> barrier_;
  KGrid grid_;
  std::vector<double> amplitude_;  // w_k psi~(k) / sqrt(2 pi)
  std::vector<ScatteringMode> modes_;
  std::vector<Complex> interior_scale_;  // T e^{ika}
};

std::shared_ptr<const SpectralPacketModel> tunneling_packet_model(const SpectralFunction& spectral,
                                                                 const BarrierSpec& barrier,
                                                                 const KGrid& grid,
                                                                 const Tolerances& tol = Tolerances{});

// Free reference packet with the same spectral function.
std::shared_ptr<const SpectralPacketModel> free_spectral_model(const SpectralFunction& spectral,
                                                              const KGrid& grid,
                                                              const Tolerances& tol = Tolerances{});

using Vec3 = std::array<double, 3>;

struct Gaussian3DParams {
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 drift{0.0, 0.0, 0.0};
  double sigma_x0 = 1.0;
  double mass = 1.0;

  void validate() const;
  double sigma_v() const { return 1.0 / (2.0 * sigma_x0 * mass); }
  double sigma_x(double t) const;
};

// Isotropic free Gaussian in three dimensions: product of three 1D densities.
class Gaussian3DField {
 public:
  explicit Gaussian3DField(const Gaussian3DParams& params);

  double rho(const Vec3& x, double t) const;
  Vec3 current(const Vec3& x, double t) const;
  Vec3 velocity(const Vec3& x, double t) const;
  Vec3 mean(double t) const;
  double sigma_x(double t) const { return params_.sigma_x(t); }
  const Gaussian3DParams& params() const { return params_; }

 private:
  Gaussian3DParams params_;
};

Gaussian3DField gaussian3d_model(const Gaussian3DParams& params);

// Figure presets: packet x_bar = -10, p_bar = 2, sigma_p = 0.2; loss rate 0.1;
// barrier V = 10 eV, a = 0.3.
namespace presets {
GaussianPacketParams fig1_packet();
inline constexpr double kFig1LossRate = 0.1;
BarrierSpec fig2_barrier();
inline constexpr double kSpectralSigmas = 6.0;
inline constexpr std::size_t kDefaultKNodes = 256;
}  // namespace presets

}  // namespace qmotion
