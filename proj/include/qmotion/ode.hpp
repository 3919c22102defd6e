#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qmotion/errors.hpp"
#include "qmotion/numerics.hpp"

namespace qmotion {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct OdeSample {
  double t;
  State<N> x;
  State<N> v;
};

enum class OdeStop { Completed, Predicate };

template <std::size_t N>
struct OdePath {
  std::vector<OdeSample<N>> samples;
  OdeStop stop = OdeStop::Completed;
  double t_end = 0.0;
  State<N> x_end{};
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  // Step size the controller proposed after the last accepted step.
  double next_step = 0.0;
};

template <std::size_t N>
using VectorField = std::function<State<N>(double t, const State<N>& x)>;

template <std::size_t N>
using StopPredicate = std::function<bool(double t, const State<N>& x)>;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
bool all_finite(const State<N>& s) {
  return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

// Integrates dx/dt = rhs(t, x) from t0 to t1 (t1 >= t0) with an adaptive
// Dormand-Prince 5(4) pair. With empty sample_times every accepted step is
// recorded; otherwise the path is sampled at those (ascending) times through
// the method's fourth-order continuous extension. The stop predicate is
// checked after every accepted step.
//
// Non-finite right-hand sides cause step rejection; a step below
// 1e-13 max(1, |t|) throws StepUnderflow with the last accepted state.
template <std::size_t N>
OdePath<N> integrate_ode(const VectorField<N>& rhs, State<N> x0, double t0, double t1,
                         const Tolerances& tol, const StopPredicate<N>& stop = {},
                         std::span<const double> sample_times = {}, double max_step = kInf,
                         double initial_step = 0.0) {
  using T = detail::Dopri5;
  if (!(t1 >= t0)) throw InvalidRange("integrate_ode: t1 must not precede t0");
  OdePath<N> path;
  const bool dense = !sample_times.empty();
  std::size_t next_sample = 0;

  double t = t0;
  State<N> x = x0;
  State<N> k1 = rhs(t, x);
  if (!detail::all_finite(k1)) throw StepUnderflow("integrate_ode: non-finite initial velocity", t, x[0]);

  auto emit_sample = [&](double ts, const State<N>& xs, const State<N>& vs) {
    path.samples.push_back({ts, xs, vs});
  };
  if (dense) {
    while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) {
      if (sample_times[next_sample] == t0) emit_sample(t0, x, k1);
      ++next_sample;
    }
  } else {
    emit_sample(t, x, k1);
  }

  const double span = t1 - t0;
  double h = std::min(max_step, initial_step > 0.0 ? initial_step : std::max(span * 1e-3, 1e-6));
  if (span == 0.0) {
    path.t_end = t;
    path.x_end = x;
    return path;
  }

  State<N> k2, k3, k4, k5, k6, k7, y, x_new;
  while (t < t1) {
    const double h_full = h;
    const bool last = t + h >= t1;
    if (last) h = t1 - t;
    if (h < 1e-13 * std::max(1.0, std::abs(t))) {
      throw StepUnderflow("integrate_ode: step size underflow", t, x[0]);
    }
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * T::a21 * k1[i];
    k2 = rhs(t + T::c2 * h, y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x[i] + h * (T::a31 * k1[i] + T::a32 * k2[i]);
    k3 = rhs(t + T::c3 * h, y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x[i] + h * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
    k4 = rhs(t + T::c4 * h, y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x[i] + h * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] + T::a54 * k4[i]);
    k5 = rhs(t + T::c5 * h, y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x[i] + h * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] + T::a64 * k4[i] +
                         T::a65 * k5[i]);
    k6 = rhs(t + h, y);
    for (std::size_t i = 0; i < N; ++i)
      x_new[i] = x[i] + h * (T::a71 * k1[i] + T::a73 * k3[i] + T::a74 * k4[i] + T::a75 * k5[i] +
                             T::a76 * k6[i]);
    k7 = rhs(t + h, x_new);

    double err = 0.0;
    bool finite = detail::all_finite(x_new) && detail::all_finite(k7);
    if (finite) {
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] + T::e5 * k5[i] +
                              T::e6 * k6[i] + T::e7 * k7[i]);
        const double scale = tol.ode_abs + tol.ode_rel * std::max(std::abs(x[i]), std::abs(x_new[i]));
        err += (e / scale) * (e / scale);
      }
      err = std::sqrt(err / static_cast<double>(N));
      finite = std::isfinite(err);
    }
    if (!finite) {
      h *= 0.25;
      ++path.rejected_steps;
      continue;
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      ++path.rejected_steps;
      continue;
    }

    ++path.accepted_steps;
    const double t_new = last ? t1 : t + h;
    if (dense) {
      while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
        const double ts = sample_times[next_sample];
        const double theta = (ts - t) / h;
        const double theta1 = 1.0 - theta;
        State<N> xs;
        for (std::size_t i = 0; i < N; ++i) {
          const double diff = x_new[i] - x[i];
          const double bspl = h * k1[i] - diff;
          const double r4 = diff - h * k7[i] - bspl;
          const double r5 = h * (T::d1 * k1[i] + T::d3 * k3[i] + T::d4 * k4[i] + T::d5 * k5[i] +
                                 T::d6 * k6[i] + T::d7 * k7[i]);
          xs[i] = x[i] + theta * (diff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
        }
        if (ts == t_new) {
          emit_sample(ts, x_new, k7);
        } else {
          emit_sample(ts, xs, rhs(ts, xs));
        }
        ++next_sample;
      }
    } else {
      emit_sample(t_new, x_new, k7);
    }

    t = t_new;
    x = x_new;
    k1 = k7;
    if (stop && stop(t, x)) {
      path.stop = OdeStop::Predicate;
      break;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    const double proposed = std::min(max_step, h * factor);
    if (!last) h = proposed;
    path.next_step = last ? std::max(h_full, proposed) : proposed;
  }
  path.t_end = t;
  path.x_end = x;
  return path;
}

// Scalar convenience form.
using ScalarField = std::function<double(double t, double x)>;
using ScalarStop = std::function<bool(double t, double x)>;

OdePath<1> integrate_ode(const ScalarField& rhs, double x0, double t0, double t1,
                         const Tolerances& tol, const ScalarStop& stop = {},
                         std::span<const double> sample_times = {}, double max_step = kInf,
                         double initial_step = 0.0);

}  // namespace qmotion
