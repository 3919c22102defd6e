#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

#include "qmotion/errors.hpp"
#include "qmotion/numerics.hpp"

namespace qmotion {

namespace {

// Kronrod abscissae on [0, 1]; odd indices are the embedded 10-point Gauss nodes.
constexpr std::array<double, 11> kKronrodX = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr std::array<double, 11> kKronrodW = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525591985, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

constexpr std::array<double, 5> kGaussW = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr int kMaxSubdivisions = 4000;

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const RealFunction& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_center = f(center);
  double kronrod = f_center * kKronrodW[10];
  double gauss = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double dx = half * kKronrodX[i];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kKronrodW[i] * pair;
    if (i % 2 == 1) gauss += kGaussW[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

double integrate_finite(const RealFunction& f, double a, double b, const Tolerances& tol) {
  if (a == b) return 0.0;
  std::priority_queue<Segment> work;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value;
  double total_error = first.error;
  work.push(first);
  int subdivisions = 0;
  auto check_finite = [&] {
    if (!std::isfinite(total) || !std::isfinite(total_error)) {
      throw NonConvergence("integrate_adaptive: non-finite integrand or estimate");
    }
  };
  check_finite();
  while (total_error > std::max(tol.quad_abs, tol.quad_rel * std::abs(total))) {
    if (++subdivisions > kMaxSubdivisions) {
      throw NonConvergence("integrate_adaptive: subdivision limit reached");
    }
    Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw NonConvergence("integrate_adaptive: interval collapsed below machine resolution");
    }
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    check_finite();
    work.push(left);
    work.push(right);
    // Re-sum periodically so the running totals do not drift.
    if (subdivisions % 64 == 0) {
      auto copy = work;
      total = 0.0;
      total_error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        total_error += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

}  // namespace

double integrate_adaptive(const RealFunction& f, double a, double b, const Tolerances& tol,
                          double decay_length) {
  if (std::isnan(a) || std::isnan(b)) throw InvalidRange("integrate_adaptive: NaN bound");
  if (a > b) return -integrate_adaptive(f, b, a, tol, decay_length);
  if (!(decay_length > 0.0)) throw InvalidRange("integrate_adaptive: decay length must be > 0");
  const double len = decay_length;
  if (std::isinf(a) && std::isinf(b)) {
    return integrate_adaptive(f, -kInf, 0.0, tol, len) + integrate_adaptive(f, 0.0, kInf, tol, len);
  }
  if (std::isinf(b)) {
    auto mapped = [&](double u) {
      const double s = 1.0 - u;
      return f(a + len * u / s) * len / (s * s);
    };
    return integrate_finite(mapped, 0.0, 1.0, tol);
  }
  if (std::isinf(a)) {
    auto mapped = [&](double u) {
      const double s = 1.0 - u;
      return f(b - len * u / s) * len / (s * s);
    };
    return integrate_finite(mapped, 0.0, 1.0, tol);
  }
  return integrate_finite(f, a, b, tol);
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw InvalidRange("gauss_legendre: n must be positive");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t j = 2; j <= n; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = z;
    for (std::size_t j = 2; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      const double p2 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p0) / jd;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = -z;
    nodes[n - 1 - i] = z;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

KGrid gauss_legendre_grid(double a, double b, std::size_t n) {
  if (!(b > a)) throw InvalidRange("gauss_legendre_grid: empty interval");
  KGrid grid;
  gauss_legendre(n, grid.nodes, grid.weights);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < n; ++i) {
    grid.nodes[i] = mid + half * grid.nodes[i];
    grid.weights[i] *= half;
  }
  grid.k_min = a;
  grid.k_max = b;
  return grid;
}

KGrid build_kgrid(double k_bar, double sigma_k, double n_sigma, std::size_t n_nodes) {
  if (!(k_bar + n_sigma * sigma_k > 0.0)) throw InvalidRange("build_kgrid: k_bar + n_sigma sigma_k <= 0");
  if (!(k_bar > 0.0) || !(sigma_k > 0.0) || !(n_sigma > 0.0)) {
    throw InvalidRange("build_kgrid: k_bar, sigma_k and n_sigma must be positive");
  }
  if (n_nodes < 64) throw InvalidRange("build_kgrid: at least 64 nodes required");
  return gauss_legendre_grid(std::max(0.0, k_bar - n_sigma * sigma_k), k_bar + n_sigma * sigma_k,
                             n_nodes);
}

}  // namespace qmotion
