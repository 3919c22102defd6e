#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmotion/errors.hpp"
#include "qmotion/numerics.hpp"
#include "qmotion/ode.hpp"
#include "qmotion/wavepacket.hpp"

using namespace qmotion;

namespace {
// Reference values from a 30-digit mpmath evaluation.
constexpr double kErfc1 = 0.157299207050285130658;
constexpr double kErfcMinus3 = 1.99997790950300141456;
constexpr double kErfc5 = 1.53745979442803485e-12;
constexpr double kNormalUpperQuartile = 0.674489750196081743;
constexpr double kGaussCosine = 2.46157395846151141705e-11;  // sqrt(pi) e^{-25}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
}  // namespace

TEST_CASE("erfc reference values") {
  CHECK(qmotion::erfc(0.0) == 1.0);
  CHECK(qmotion::erfc(1.0) == doctest::Approx(kErfc1).epsilon(1e-14));
  CHECK(qmotion::erfc(-3.0) == doctest::Approx(kErfcMinus3).epsilon(1e-14));
  CHECK(qmotion::erfc(5.0) == doctest::Approx(kErfc5).epsilon(1e-12));
  CHECK(qmotion::erfc(kInf) == 0.0);
  CHECK(qmotion::erfc(-kInf) == 2.0);
}

TEST_CASE("erfc symmetry over |x| <= 10") {
  for (double x = -10.0; x <= 10.0; x += 0.37) {
    CHECK(qmotion::erfc(x) + qmotion::erfc(-x) == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("tolerances must be positive") {
  Tolerances tol;
  CHECK_NOTHROW(tol.validate());
  tol.root_abs = 0.0;
  CHECK_THROWS_AS(tol.validate(), InvalidRange);
}

TEST_CASE("adaptive quadrature basics") {
  const Tolerances tol;
  CHECK(integrate_adaptive([](double) { return 1.0; }, 0.0, 1.0, tol) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(integrate_adaptive(normal_pdf, -kInf, kInf, tol) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_adaptive(normal_pdf, 0.0, kInf, tol) == doctest::Approx(0.5).epsilon(1e-10));
  const double gc = integrate_adaptive([](double x) { return std::exp(-x * x) * std::cos(10.0 * x); },
                                       -kInf, kInf, tol);
  CHECK(std::abs(gc - kGaussCosine) <= tol.quad_abs);
}

TEST_CASE("Kronrod rule is exact for polynomials up to degree 31") {
  Tolerances tol;
  for (int degree = 0; degree <= 31; ++degree) {
    const double got = integrate_adaptive([degree](double x) { return std::pow(x, degree); }, 0.0, 1.0, tol);
    CHECK(got == doctest::Approx(1.0 / (degree + 1)).epsilon(1e-13));
  }
}

TEST_CASE("adaptive quadrature is linear") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Tolerances tol;
  for (int trial = 0; trial < 25; ++trial) {
    const double alpha = u(rng), beta = u(rng), w = u(rng) * 3.0, c = u(rng);
    auto f = [w](double x) { return std::sin(w * x) * std::exp(-0.3 * x); };
    auto g = [c](double x) { return 1.0 / (1.0 + (x - c) * (x - c)); };
    const double lo = -1.0, hi = 4.0;
    const double If = integrate_adaptive(f, lo, hi, tol);
    const double Ig = integrate_adaptive(g, lo, hi, tol);
    const double Ih = integrate_adaptive([&](double x) { return alpha * f(x) + beta * g(x); }, lo, hi, tol);
    const double scale = std::abs(alpha * If) + std::abs(beta * Ig);
    CHECK(std::abs(Ih - (alpha * If + beta * Ig)) <= 2.0 * std::max(tol.quad_abs, tol.quad_rel * scale));
  }
}

TEST_CASE("adaptive quadrature gives up on non-integrable input") {
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / (x * x); }, 0.0, 1.0, Tolerances{}),
                  NonConvergence);
}

TEST_CASE("Gauss-Legendre k grid") {
  const KGrid grid = build_kgrid(2.0, 0.2, 6.0, 256);
  CHECK(grid.size() == 256);
  CHECK(grid.k_min == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(grid.k_max == doctest::Approx(3.2).epsilon(1e-15));
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sum += grid.weights[i];
    CHECK(grid.weights[i] > 0.0);
    CHECK(grid.nodes[i] > grid.k_min);
    if (i > 0) CHECK(grid.nodes[i] > grid.nodes[i - 1]);
  }
  CHECK(sum == doctest::Approx(2.4).epsilon(1e-13));

  // Low-mean spectra clip at k = 0.
  CHECK(build_kgrid(0.5, 0.2, 6.0, 64).k_min == 0.0);
  CHECK_THROWS_AS(build_kgrid(2.0, 0.2, 6.0, 32), InvalidRange);
  CHECK_THROWS_AS(build_kgrid(-3.0, 0.2, 6.0, 64), InvalidRange);
  CHECK_THROWS_AS(build_kgrid(2.0, 0.0, 6.0, 64), InvalidRange);
}

TEST_CASE("truncated spectral function is normalised on the grid") {
  const KGrid grid = build_kgrid(2.0, 0.2, 6.0, 256);
  const SpectralFunction psi = SpectralFunction::gaussian(2.0, 0.2, -10.0, grid);
  double on_grid = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) on_grid += grid.weights[i] * psi(grid.nodes[i]) * psi(grid.nodes[i]);
  const double adaptive =
      integrate_adaptive([&](double k) { return psi(k) * psi(k); }, grid.k_min, grid.k_max, Tolerances{});
  CHECK(on_grid == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(on_grid - adaptive) < 1e-12);
  CHECK(psi(-0.5) == 0.0);
}

TEST_CASE("monotone root finding") {
  const Tolerances tol;
  CHECK(find_root_monotone([](double x) { return x - 3.0; }, 0.0, 10.0, tol) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(find_root_monotone([](double x) { return qmotion::erfc(x) - 1.0; }, -5.0, 5.0, tol)) < 1e-11);
  auto tail = [](double x) { return 0.5 * qmotion::erfc(x / std::numbers::sqrt2) - 0.25; };
  CHECK(find_root_monotone(tail, -5.0, 5.0, tol) == doctest::Approx(kNormalUpperQuartile).epsilon(1e-11));
  CHECK_THROWS_AS(find_root_monotone([](double x) { return x + 20.0; }, 0.0, 10.0, tol), NoSignChange);

  NewtonProblem problem{tail, [](double x) { return -normal_pdf(x); }};
  CHECK(find_root_monotone_newton(problem, -5.0, 5.0, 0.0, tol) ==
        doctest::Approx(kNormalUpperQuartile).epsilon(1e-11));
  // A guess outside the basin still converges through bisection.
  CHECK(find_root_monotone_newton(problem, -5.0, 5.0, 4.9, tol) ==
        doctest::Approx(kNormalUpperQuartile).epsilon(1e-11));
}

TEST_CASE("root round trip on a family of monotone functions") {
  const Tolerances tol;
  for (double shift = -3.0; shift <= 3.0; shift += 0.5) {
    for (double scale : {0.01, 1.0, 100.0}) {
      auto g = [=](double x) { return scale * (std::atan(x - shift) + 0.1 * (x - shift)); };
      const double x = find_root_monotone(g, -10.0, 10.0, tol);
      CHECK(std::abs(g(x)) <= scale * 1e-8);
      auto h = [=](double x) { return scale * (std::exp(x - shift) - 1.0); };
      CHECK(std::abs(h(find_root_monotone(h, -10.0, 10.0, tol))) <= scale * 1e-8);
    }
  }
}

TEST_CASE("uniform grid includes both ends") {
  const auto grid = uniform_grid(0.0, 1.0, 0.1);
  CHECK(grid.size() == 11);
  CHECK(grid.back() == 1.0);
  CHECK(uniform_grid(0.0, 1.0, 0.3).back() == 1.0);
  CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 0.0), InvalidRange);
}

TEST_CASE("ODE stepper on elementary flows") {
  const Tolerances tol;
  auto constant = integrate_ode([](double, double) { return 2.5; }, 0.0, 0.0, 1.0, tol);
  CHECK(constant.x_end[0] == doctest::Approx(2.5).epsilon(1e-13));
  auto growth = integrate_ode([](double, double x) { return x; }, 1.0, 0.0, 1.0, tol);
  CHECK(std::abs(growth.x_end[0] - std::numbers::e) < 1e-8);
  CHECK(growth.stop == OdeStop::Completed);
}

TEST_CASE("ODE stepper reproduces a known flow over 50 time units") {
  const Tolerances tol;
  const std::vector<double> times = uniform_grid(0.0, 50.0, 0.5);
  auto path = integrate_ode([](double t, double x) { return x * std::cos(t); }, 1.5, 0.0, 50.0, tol, {}, times);
  REQUIRE(path.samples.size() == times.size());
  for (const auto& s : path.samples) {
    const double exact = 1.5 * std::exp(std::sin(s.t));
    CHECK(std::abs(s.x[0] - exact) <= 1e2 * tol.ode_rel * exact);
  }
}

TEST_CASE("ODE stepper follows the free Gaussian quantile") {
  const GaussianPacketParams p = presets::fig1_packet();
  const double sv = p.sigma_v();
  auto v = [&](double t, double x) {
    const double m = p.x_bar + p.v_bar * t;
    const double s2 = p.sigma_x0 * p.sigma_x0 + sv * sv * t * t;
    return p.v_bar + sv * sv * t * (x - m) / s2;
  };
  const double x0 = p.x_bar + 1.3;
  auto path = integrate_ode(v, x0, 0.0, 20.0, Tolerances{});
  const double exact = p.x_bar + p.v_bar * 20.0 + p.sigma_x(20.0) / p.sigma_x0 * (x0 - p.x_bar);
  CHECK(std::abs(path.x_end[0] - exact) < 1e-6);
}

TEST_CASE("ODE stepper stops on a predicate and on blow-up") {
  const Tolerances tol;
  auto stopped = integrate_ode([](double, double) { return 1.0; }, 0.0, 0.0, 10.0, tol,
                               [](double, double x) { return x > 3.0; });
  CHECK(stopped.stop == OdeStop::Predicate);
  CHECK(stopped.t_end < 10.0);
  // x' = x^2 from x = 1 blows up at t = 1.
  CHECK_THROWS_AS(integrate_ode([](double, double x) { return x * x; }, 1.0, 0.0, 2.0, tol), StepUnderflow);
}
