#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qmotion/errors.hpp"
#include "qmotion/quantile.hpp"

namespace qmotion {

const char* to_string(Termination termination) {
  switch (termination) {
    case Termination::Completed: return "completed";
    case Termination::NormBelowP: return "norm_below_p";
    case Termination::VelocitySingular: return "velocity_singular";
  }
  return "unknown";
}

double tail_probability(const PacketModel& model, double x, double t) {
  if (!(t >= 0.0)) throw InvalidRange("tail_probability: t must be >= 0");
  return model.tail(x, t);
}

namespace {

// Tail evaluation that reuses the last computed point, so that each new
// evaluation only integrates the density between two nearby positions.
class TailCursor {
 public:
  TailCursor(const PacketModel& model, double t, double x0)
      : model_(model), t_(t), x_(x0), tail_(model.tail(x0, t)) {}

  double operator()(double x) {
    if (x != x_) {
      tail_ += model_.mass_between(x, x_, t_);
      x_ = x;
    }
    return tail_;
  }

 private:
  const PacketModel& model_;
  double t_;
  double x_;
  double tail_;
};

constexpr int kMaxBracketExpansions = 64;

}  // namespace

double quantile_position(const PacketModel& model, double P, double t, std::optional<double> seed) {
  if (!(t >= 0.0)) throw InvalidRange("quantile_position: t must be >= 0");
  if (!(P > 0.0 && P < 1.0)) throw InvalidRange("quantile_position: P must lie in (0, 1)");
  const double norm = model.total_norm(t);
  if (P >= norm) {
    throw NormBelowP("quantile_position: P = " + std::to_string(P) + " exceeds norm " +
                         std::to_string(norm),
                     t);
  }
  const Interval support = model.support_hint(t);
  const double centre = seed.value_or(0.5 * (support.lo + support.hi));
  double half = 4.0 * model.width_scale(t);

  TailCursor tail(model, t, centre);
  double lo = centre - half;
  double hi = centre + half;
  double g_lo = tail(lo) - P;
  double g_hi = tail(hi) - P;
  // The tail decreases with x: need g_lo >= 0 >= g_hi.
  int expansions = 0;
  while (g_lo < 0.0 || g_hi > 0.0) {
    if (++expansions > kMaxBracketExpansions) {
      throw NoSignChange("quantile_position: bracket expansion failed");
    }
    half *= 2.0;
    if (g_lo < 0.0) {
      hi = lo;
      g_hi = g_lo;
      lo = centre - half;
      g_lo = tail(lo) - P;
    } else {
      lo = hi;
      g_lo = g_hi;
      hi = centre + half;
      g_hi = tail(hi) - P;
    }
  }
  const double guess = seed && *seed > lo && *seed < hi ? *seed : 0.5 * (lo + hi);
  NewtonProblem problem{[&](double x) { return tail(x) - P; },
                        [&](double x) { return -model.rho(x, t); }};
  return find_root_monotone_newton(problem, lo, hi, guess, model.tolerances());
}

double quantile_velocity(const PacketModel& model, double x, double t) {
  const double density = model.rho(x, t);
  const double floor = kDensityFloorRel * model.peak_density(t);
  if (!(density > floor)) {
    throw VelocitySingular("quantile_velocity: density below floor at x = " + std::to_string(x), t, x);
  }
  double flux = model.current(x, t);
  if (!model.conserves_norm()) flux -= model.loss_tail(x, t);
  return flux / density;
}

std::optional<double> norm_crossing_time(const PacketModel& model, double P, double t0, double t1) {
  if (model.total_norm(t1) > P) return std::nullopt;
  if (model.total_norm(t0) <= P) return t0;
  Tolerances tol = model.tolerances();
  tol.root_abs = std::min(tol.root_abs, 1e-12);
  return find_root_monotone([&](double t) { return model.total_norm(t) - P; }, t0, t1, tol);
}

}  // namespace qmotion
