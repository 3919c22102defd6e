#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmotion/errors.hpp"
#include "qmotion/tunneling.hpp"

namespace qmotion {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr int kMaxLambdaNodes = 1024;

bool same_spectral(const SpectralFunction& a, const SpectralFunction& b) {
  return a.k_bar() == b.k_bar() && a.sigma_k() == b.sigma_k() && a.x_bar() == b.x_bar() &&
         a.k_lo() == b.k_lo() && a.k_hi() == b.k_hi();
}

struct LambdaTerms {
  double term1 = 0.0;
  double term2 = 0.0;
};

LambdaTerms lambda_integrals(const KGrid& grid, std::span<const Complex> base,
                             std::span<const Complex> gamma, double a, int n_lambda) {
  const KGrid lambda = gauss_legendre_grid(0.0, 1.0, static_cast<std::size_t>(n_lambda));
  LambdaTerms out;
  for (std::size_t il = 0; il < lambda.size(); ++il) {
    const double l = lambda.nodes[il];
    Complex z_sum = 0.0;
    Complex s_sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double k = grid.nodes[i];
      const Complex g = gamma[i];
      const Complex minus = std::exp(2.0 * kI * a * l * (k - g));
      const Complex plus = std::exp(2.0 * kI * a * l * (k + g));
      z_sum += ((k + g) * minus - (k - g) * plus) * base[i];
      s_sum += std::polar(1.0, 2.0 * a * l * k) * std::sin(2.0 * a * l * g) * base[i];
    }
    out.term1 += lambda.weights[il] * std::norm(z_sum);
    out.term2 += lambda.weights[il] * std::norm(s_sum);
  }
  return out;
}

}  // namespace

double delta_p_direct(const SpectralPacketModel& free, const SpectralPacketModel& tunneling, double x,
                      double t) {
  if (!same_spectral(free.spectral(), tunneling.spectral())) {
    throw InvalidRange("delta_p_direct: models use different spectral functions");
  }
  if (tunneling.barrier() && !(x > tunneling.barrier()->half_width)) {
    throw InvalidRange("delta_p_direct: x must lie beyond the barrier");
  }
  return free.tail(x, t) - tunneling.tail(x, t);
}

DeltaPTerms delta_p_decomposed(const SpectralFunction& spectral, const BarrierSpec& barrier,
                               const KGrid& grid, double x, double t, int n_lambda,
                               const Tolerances& tol) {
  barrier.validate();
  const double a = barrier.half_width;
  if (!(x > a)) throw InvalidRange("delta_p_decomposed: x must lie beyond the barrier");
  if (n_lambda < 16) throw InvalidRange("delta_p_decomposed: n_lambda must be >= 16");
  const double q2 = barrier.coupling();
  DeltaPTerms out;
  if (q2 == 0.0) {
    out.n_lambda = n_lambda;
    return out;
  }

  const std::size_t n = grid.size();
  std::vector<Complex> gamma(n);
  std::vector<Complex> inv_d(n);
  std::vector<Complex> base(n);
  std::vector<Complex> edge(n);  // e^{2iak} sin(2a gamma) / D without the x' phase
  const double xb = spectral.x_bar();
  for (std::size_t i = 0; i < n; ++i) {
    const double k = grid.nodes[i];
    gamma[i] = barrier_gamma(k, barrier);
    inv_d[i] = 1.0 / transmission_denominator(k, barrier);
    const double amp = grid.weights[i] * spectral(k);
    base[i] = amp * std::polar(1.0, k * (x - xb) - 0.5 * k * k * t) * inv_d[i];
    edge[i] = amp * std::polar(1.0, 2.0 * a * k - k * xb - 0.5 * k * k * t) *
              std::sin(2.0 * a * gamma[i]) * inv_d[i];
  }

  // Lambda integrals, refined until the lambda-dependent part settles.
  int nodes = n_lambda;
  LambdaTerms coarse = lambda_integrals(grid, base, gamma, a, nodes);
  LambdaTerms fine = coarse;
  while (true) {
    if (2 * nodes > kMaxLambdaNodes) break;
    fine = lambda_integrals(grid, base, gamma, a, 2 * nodes);
    nodes *= 2;
    const double before = coarse.term1 + 4.0 * q2 * coarse.term2;
    const double after = fine.term1 + 4.0 * q2 * fine.term2;
    if (std::abs(after - before) <= 1e-3 * std::abs(after) || std::abs(after - before) < 1e-300) break;
    coarse = fine;
  }
  out.term1 = fine.term1;
  out.term2 = fine.term2;
  out.n_lambda = nodes;

  // Spatial integral from x to beyond the transmitted packet.
  const double sigma_x0 = 1.0 / (2.0 * spectral.sigma_k());
  const double width = std::hypot(sigma_x0, spectral.sigma_k() * t);
  const double hi = std::max(x, xb + grid.k_max * t + 8.0 * width);
  auto density = [&](double y) {
    Complex sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += edge[i] * std::polar(1.0, grid.nodes[i] * y);
    return std::norm(sum);
  };
  double term3 = 0.0;
  if (hi > x) {
    const auto pieces = static_cast<std::size_t>(std::ceil((hi - x) / width));
    const double h = (hi - x) / static_cast<double>(pieces);
    for (std::size_t j = 0; j < pieces; ++j) {
      const double lo_j = x + h * static_cast<double>(j);
      const double hi_j = j + 1 == pieces ? hi : lo_j + h;
      term3 += integrate_adaptive(density, lo_j, hi_j, tol);
    }
  }
  out.term3 = term3;

  const double prefactor = 2.0 * a / std::numbers::pi * q2;
  out.contribution1 = prefactor * out.term1;
  out.contribution2 = prefactor * 4.0 * q2 * out.term2;
  out.contribution3 = prefactor * (q2 / a) * out.term3;
  out.total = out.contribution1 + out.contribution2 + out.contribution3;
  return out;
}

std::vector<double> default_delta_p_positions(const BarrierSpec& barrier) {
  std::vector<double> xs;
  const double first = barrier.half_width + 0.2;
  const double last = barrier.half_width + 5.0;
  for (int i = 0; i < 12; ++i) xs.push_back(first + (last - first) * i / 11.0);
  return xs;
}

std::vector<double> default_delta_p_times() {
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(static_cast<double>(i));
  return ts;
}

DeltaPReport delta_p_report(const SpectralPacketModel& free, const SpectralPacketModel& tunneling,
                            std::span<const double> xs, std::span<const double> ts, int n_lambda) {
  if (!tunneling.barrier()) throw InvalidRange("delta_p_report: tunneling model has no barrier");
  DeltaPReport report;
  for (double t : ts) {
    for (double x : xs) {
      DeltaPPoint p;
      p.x = x;
      p.t = t;
      p.dp_direct = delta_p_direct(free, tunneling, x, t);
      p.terms = delta_p_decomposed(tunneling.spectral(), *tunneling.barrier(), tunneling.grid(), x, t,
                                   n_lambda, tunneling.tolerances());
      p.agreement_rel =
          std::abs(p.dp_direct - p.terms.total) / std::max(p.dp_direct, kAgreementFloor);
      p.positivity_ok = p.dp_direct >= -kPositivityTolerance;
      report.points.push_back(p);
    }
  }
  return report;
}

double packet_transmission_probability(const SpectralFunction& spectral, const BarrierSpec& barrier,
                                       const KGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.nodes[i];
    const double amp = spectral(k);
    total += grid.weights[i] * std::norm(scattering_mode(k, barrier).T) * amp * amp;
  }
  return total;
}

}  // namespace qmotion
