#pragma once

#include <span>
#include <vector>

#include "qmotion/quantile.hpp"
#include "qmotion/wavepacket.hpp"

namespace qmotion {

// P_F(x, t) - P_T(x, t) for x beyond the barrier, by direct integration of
// both densities. Both models must share one spectral function.
double delta_p_direct(const SpectralPacketModel& free, const SpectralPacketModel& tunneling, double x,
                      double t);

// Positive-definite decomposition of Delta P. With q^2 = 2 m V / hbar^2:
//   term1 = int_0^1 dl | int Z_l(k)/D(k) psi~(k;x,t) dk |^2
//   term2 = int_0^1 dl | int e^{2ialk} sin(2al gamma)/D(k) psi~(k;x,t) dk |^2
//   term3 = int_x^inf dx' | int e^{2iak} sin(2a gamma)/D(k) psi~(k;x',t) dk |^2
//   total = (2a/pi) q^2 [term1 + 4 q^2 term2 + (q^2/a) term3]
// The contribution_* fields hold the three weighted summands of total.
struct DeltaPTerms {
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  double contribution1 = 0.0;
  double contribution2 = 0.0;
  double contribution3 = 0.0;
  double total = 0.0;
  int n_lambda = 0;
};

// Lambda integrals use n_lambda-point Gauss-Legendre, doubled until the
// lambda-dependent part of the total changes by less than 0.1%.
DeltaPTerms delta_p_decomposed(const SpectralFunction& spectral, const BarrierSpec& barrier,
                               const KGrid& grid, double x, double t, int n_lambda = 32,
                               const Tolerances& tol = Tolerances{});

inline constexpr double kAgreementFloor = 1e-9;
inline constexpr double kPositivityTolerance = 1e-6;

struct DeltaPPoint {
  double x = 0.0;
  double t = 0.0;
  double dp_direct = 0.0;
  DeltaPTerms terms;
  // |direct - decomposed| / max(direct, floor)
  double agreement_rel = 0.0;
  bool positivity_ok = false;
};

struct DeltaPReport {
  std::vector<DeltaPPoint> points;
};

// Default evaluation grid: 12 positions from a + 0.2 to a + 5, times 0..10.
std::vector<double> default_delta_p_positions(const BarrierSpec& barrier);
std::vector<double> default_delta_p_times();

DeltaPReport delta_p_report(const SpectralPacketModel& free, const SpectralPacketModel& tunneling,
                            std::span<const double> xs, std::span<const double> ts,
                            int n_lambda = 32);

struct RetardationVerdict {
  double P = 0.0;
  bool holds = true;
  // Smallest x_free - x_tunnel over checked pairs (+inf when none).
  double worst_margin = kInf;
  double worst_t = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Compares paired trajectories (same P, same grid) wherever both quantiles
// exist and the tunneling quantile lies beyond the barrier (x > a).
std::vector<RetardationVerdict> retardation_scan(std::span<const QuantileTrajectory> free,
                                                 std::span<const QuantileTrajectory> tunneling,
                                                 double barrier_half_width, double tolerance = 1e-5);

// Traces both models by CDF inversion first.
std::vector<RetardationVerdict> retardation_scan(const PacketModel& free, const PacketModel& tunneling,
                                                 std::span<const double> p_list,
                                                 std::span<const double> t_grid,
                                                 double barrier_half_width, double tolerance = 1e-5);

// Sum over the grid of w |T(k)|^2 |psi~(k)|^2: asymptotic transmitted probability.
double packet_transmission_probability(const SpectralFunction& spectral, const BarrierSpec& barrier,
                                       const KGrid& grid);

}  // namespace qmotion
