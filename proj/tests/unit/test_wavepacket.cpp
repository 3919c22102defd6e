#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmotion/errors.hpp"
#include "qmotion/quantile.hpp"
#include "qmotion/wavepacket.hpp"

using namespace qmotion;

namespace {
constexpr double kTextbookT2 = 0.0209700881959028278;  // V=10, a=0.3, E=2
constexpr double kOneSigmaTail = 0.158655253931457051;  // erfc(1/sqrt 2) / 2

struct Fig2 {
  KGrid grid = build_kgrid(2.0, 0.2, presets::kSpectralSigmas, presets::kDefaultKNodes);
  SpectralFunction spectral = SpectralFunction::gaussian(2.0, 0.2, -10.0, grid);
  BarrierSpec barrier = presets::fig2_barrier();
};

// max over the samples of |d rho/dt + dj/dx + l| and of |dj/dx|, central differences.
std::pair<double, double> continuity_residual(const PacketModel& m, std::span<const double> xs,
                                              std::span<const double> ts, double h = 1e-4) {
  double worst = 0.0, scale = 0.0;
  for (double t : ts) {
    for (double x : xs) {
      const double drho = (m.rho(x, t + h) - m.rho(x, t - h)) / (2 * h);
      const double dj = (m.current(x + h, t) - m.current(x - h, t)) / (2 * h);
      worst = std::max(worst, std::abs(drho + dj + m.loss(x, t)));
      scale = std::max(scale, std::abs(dj));
    }
  }
  return {worst, scale};
}
}  // namespace

TEST_CASE("parameter validation") {
  GaussianPacketParams p;
  p.sigma_x0 = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidRange);
  BarrierSpec b;
  b.height = -1.0;
  CHECK_THROWS_AS(b.validate(), InvalidRange);
  b = BarrierSpec{};
  b.half_width = 0.0;
  CHECK_THROWS_AS(b.validate(), InvalidRange);
  CHECK_THROWS_AS(dissipative_gaussian_model(GaussianPacketParams{}, -0.1), InvalidRange);
}

TEST_CASE("figure presets") {
  const auto p = presets::fig1_packet();
  CHECK(p.x_bar == -10.0);
  CHECK(p.v_bar == 2.0);
  CHECK(p.sigma_p() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(p.sigma_x0 == 2.5);
  CHECK(presets::fig2_barrier().height == 10.0);
  CHECK(presets::fig2_barrier().half_width == 0.3);
}

TEST_CASE("free Gaussian closed forms") {
  const auto p = presets::fig1_packet();
  const auto model = free_gaussian_model(p);
  CHECK(p.sigma_x(5.0) * p.sigma_x(5.0) == doctest::Approx(7.25).epsilon(1e-14));
  for (double t : {0.0, 3.0, 12.5}) {
    const double m = p.x_bar + p.v_bar * t;
    const double s = p.sigma_x(t);
    CHECK(model->rho(m, t) == doctest::Approx(1.0 / (std::sqrt(2 * std::numbers::pi) * s)).epsilon(1e-14));
    CHECK(model->tail(m, t) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(model->tail(m + s, t) == doctest::Approx(kOneSigmaTail).epsilon(1e-14));
    CHECK(model->tail(-kInf, t) == 1.0);
    CHECK(model->current(m, t) / model->rho(m, t) == doctest::Approx(p.v_bar).epsilon(1e-14));
    CHECK(model->loss(m, t) == 0.0);
    // Lower-tail accuracy is kept far to the left.
    CHECK(model->mass_between(m - 40 * s, m - 9 * s, t) > 0.0);
  }
}

TEST_CASE("dissipative model") {
  const auto p = presets::fig1_packet();
  const auto lossless = dissipative_gaussian_model(p, 0.0);
  const auto free = free_gaussian_model(p);
  for (double x : {-20.0, -10.0, 3.0}) {
    CHECK(lossless->rho(x, 4.0) == free->rho(x, 4.0));
    CHECK(lossless->current(x, 4.0) == free->current(x, 4.0));
    CHECK(lossless->tail(x, 4.0) == free->tail(x, 4.0));
  }
  const auto lossy = dissipative_gaussian_model(p, presets::kFig1LossRate);
  CHECK_FALSE(lossy->conserves_norm());
  CHECK(lossy->total_norm(0.0) == 1.0);
  CHECK(lossy->total_norm(std::numbers::ln2 / 0.1) == doctest::Approx(0.5).epsilon(1e-15));
  for (double t : {0.0, 2.0, 9.0}) {
    CHECK(lossy->tail(-kInf, t) == doctest::Approx(std::exp(-0.1 * t)).epsilon(1e-15));
    const double x = -6.0;
    CHECK(lossy->loss(x, t) == doctest::Approx(0.1 * lossy->rho(x, t)).epsilon(1e-15));
    CHECK(lossy->loss_tail(x, t) == doctest::Approx(0.1 * lossy->tail(x, t)).epsilon(1e-14));
  }
}

TEST_CASE("lossy continuity holds for the closed-form models") {
  const auto p = presets::fig1_packet();
  const std::vector<double> ts{0.5, 4.0, 11.0};
  std::vector<double> xs;
  for (double x = -25.0; x <= 25.0; x += 2.5) xs.push_back(x);
  for (double lambda : {0.0, 0.1}) {
    const auto model = dissipative_gaussian_model(p, lambda);
    const auto [worst, scale] = continuity_residual(*model, xs, ts);
    CHECK(worst <= 1e-6 * std::max(scale, 1e-3));
  }
}

TEST_CASE("square barrier: free limit and textbook transmission") {
  const ScatteringMode free = scattering_mode(1.7, BarrierSpec{0.0, 0.4});
  CHECK(free.T == Complex(1.0, 0.0));
  CHECK(free.R == Complex(0.0, 0.0));
  CHECK(transmission_denominator(1.7, BarrierSpec{0.0, 0.4}) == Complex(4 * 1.7 * 1.7, 0.0));

  const BarrierSpec fig2 = presets::fig2_barrier();
  const Complex gamma = barrier_gamma(2.0, fig2);
  CHECK(gamma.real() == 0.0);
  CHECK(gamma.imag() == doctest::Approx(4.0).epsilon(1e-15));
  const ScatteringMode mode = scattering_mode(2.0, fig2);
  CHECK(std::abs(std::norm(mode.T) - kTextbookT2) < 1e-10);
  // Closed form T = 4 k gamma / D agrees with the stable evaluation.
  CHECK(std::abs(4.0 * 2.0 * gamma / transmission_denominator(2.0, fig2) - mode.T) < 1e-13);

  CHECK_THROWS_AS(scattering_mode(0.0, fig2), DegenerateK);
  CHECK_THROWS_AS(scattering_mode(-1.0, fig2), DegenerateK);
}

TEST_CASE("square barrier: unitarity and matching for random modes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uk(0.05, 6.0), uv(0.0, 20.0), ua(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const BarrierSpec barrier{uv(rng), ua(rng)};
    const double k = uk(rng);
    const ScatteringMode m = scattering_mode(k, barrier);
    CHECK(std::abs(std::norm(m.R) + std::norm(m.T) - 1.0) <= 1e-12);
    for (double edge : {-barrier.half_width, barrier.half_width}) {
      const double e = 1e-15 * std::max(1.0, std::abs(edge));
      const Complex v_in = m.value(edge - e), v_out = m.value(edge + e);
      const Complex d_in = m.derivative(edge - e), d_out = m.derivative(edge + e);
      CHECK(std::abs(v_in - v_out) <= 1e-12 * std::max(1.0, std::abs(v_in)));
      CHECK(std::abs(d_in - d_out) <= 1e-12 * std::max(1.0, std::abs(d_in)));
    }
    // Interior coefficients reproduce the interior value.
    const double x = 0.3 * barrier.half_width;
    const Complex g = m.gamma;
    const Complex inner = m.A * std::exp(Complex(0, 1) * g * x) + m.B * std::exp(-Complex(0, 1) * g * x);
    CHECK(std::abs(inner - m.value(x)) <= 1e-10 * std::max(1.0, std::abs(inner)));
  }
}

TEST_CASE("square barrier: gamma = 0 and high-energy limit") {
  const BarrierSpec barrier{2.0, 0.5};
  const ScatteringMode top = scattering_mode(2.0, barrier);  // k^2 = 2V exactly
  CHECK(std::isfinite(top.T.real()));
  CHECK(std::abs(std::norm(top.R) + std::norm(top.T) - 1.0) <= 1e-12);
  CHECK(std::abs(top.value(0.5 - 1e-15) - top.value(0.5 + 1e-15)) < 1e-12);

  const BarrierSpec fig2 = presets::fig2_barrier();
  const ScatteringMode fast = scattering_mode(50.0 * std::sqrt(fig2.coupling()), fig2);
  CHECK(std::abs(std::abs(fast.T) - 1.0) < 1e-3);
  CHECK(std::abs(fast.R) < 1e-3);
}

TEST_CASE("spectral packet without barrier matches the free spectral packet") {
  Fig2 f;
  const auto flat = tunneling_packet_model(f.spectral, BarrierSpec{0.0, 0.3}, f.grid);
  const auto free = free_spectral_model(f.spectral, f.grid);
  for (double t : {0.0, 3.0, 7.0}) {
    for (double x = -20.0; x <= 15.0; x += 1.7) {
      CHECK(std::abs(flat->rho(x, t) - free->rho(x, t)) <= 1e-8);
    }
  }
  // And the free spectral packet is the closed-form Gaussian up to truncation.
  // The amplitude is cut at exp(-9) ~ 1e-4, which shows up pointwise even
  // though the probability outside the window is only ~2e-9.
  const auto gauss = free_gaussian_model(presets::fig1_packet());
  for (double x = -16.0; x <= -4.0; x += 1.5) {
    CHECK(free->rho(x, 0.0) == doctest::Approx(gauss->rho(x, 0.0)).epsilon(2e-4));
  }
}

TEST_CASE("tunneling packet conserves probability") {
  Fig2 f;
  const auto model = tunneling_packet_model(f.spectral, f.barrier, f.grid);
  for (double t : {0.0, 4.0, 6.0, 10.0}) {
    const Interval s = model->support_hint(t);
    CHECK(model->mass_between(s.lo, s.hi, t) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model->tail(s.lo - 100.0, t) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(model->tail(s.hi, t) == 0.0);
  }
}

TEST_CASE("tunneling packet satisfies the continuity equation") {
  Fig2 f;
  const auto model = tunneling_packet_model(f.spectral, f.barrier, f.grid);
  std::vector<double> xs;
  for (double x = -14.0; x <= 8.0; x += 0.55) xs.push_back(x);
  xs.push_back(-0.3 + 0.05);
  xs.push_back(0.3 - 0.05);
  const std::vector<double> ts{1.0, 3.5, 5.0, 8.0};
  const auto [worst, scale] = continuity_residual(*model, xs, ts);
  CHECK(scale > 0.0);
  CHECK(worst <= 1e-4 * scale);
}

TEST_CASE("tail is non-increasing in x for every model") {
  Fig2 f;
  const auto p = presets::fig1_packet();
  std::vector<PacketModelPtr> models{free_gaussian_model(p), dissipative_gaussian_model(p, 0.1),
                                     free_spectral_model(f.spectral, f.grid),
                                     tunneling_packet_model(f.spectral, f.barrier, f.grid)};
  for (const auto& m : models) {
    for (double t : {0.0, 5.0}) {
      const Interval s = m->support_hint(t);
      double prev = m->tail(s.lo, t);
      for (int i = 1; i < 200; ++i) {
        const double x = s.lo + s.width() * i / 199.0;
        const double cur = m->tail(x, t);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
      }
    }
  }
}

TEST_CASE("phase resolution guard") {
  CHECK(required_k_nodes(3.2, 20.0) == 131);
  Fig2 f;
  const KGrid coarse = build_kgrid(2.0, 0.2, 6.0, 64);
  const auto model = tunneling_packet_model(f.spectral, f.barrier, coarse);
  CHECK_NOTHROW(model->rho(0.0, 5.0));
  CHECK_THROWS_AS(model->rho(0.0, 20.0), GridTooCoarse);
}

TEST_CASE("3D Gaussian field") {
  Gaussian3DParams params;
  params.drift = {1.0, -0.5, 0.25};
  const Gaussian3DField field = gaussian3d_model(params);
  const Vec3 m = field.mean(4.0);
  CHECK(m[0] == doctest::Approx(4.0));
  CHECK(m[1] == doctest::Approx(-2.0));
  const Vec3 off{m[0] + 0.1, m[1], m[2]};
  CHECK(field.rho(m, 4.0) > field.rho(off, 4.0));
  CHECK(probability_in_ball(field, m, 12.0 * field.sigma_x(4.0), 4.0) == doctest::Approx(1.0).epsilon(1e-10));

  const Gaussian3DField still = gaussian3d_model(Gaussian3DParams{});
  const Vec3 x{0.3, -0.7, 1.1};
  const Vec3 v = still.velocity(x, 2.0);
  // Radial: v parallel to x.
  CHECK(std::abs(v[0] * x[1] - v[1] * x[0]) < 1e-15);
  CHECK(std::abs(v[1] * x[2] - v[2] * x[1]) < 1e-15);
  const Vec3 j = still.current(x, 2.0);
  CHECK(j[2] == doctest::Approx(still.rho(x, 2.0) * v[2]));
}
