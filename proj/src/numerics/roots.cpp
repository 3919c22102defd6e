#include <algorithm>
#include <cmath>
#include <limits>

#include "qmotion/errors.hpp"
#include "qmotion/numerics.hpp"

namespace qmotion {

namespace {
constexpr int kMaxRootIterations = 400;
}

double find_root_monotone(const RealFunction& g, double lo, double hi, const Tolerances& tol) {
  double a = lo;
  double b = hi;
  double fa = g(a);
  double fb = g(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw NoSignChange("find_root_monotone: bracket has no sign change");

  // Brent: b is the best estimate, a the previous one, c keeps the bracket.
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < kMaxRootIterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol.root_abs;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = g(b);
  }
  throw NonConvergence("find_root_monotone: iteration limit reached");
}

double find_root_monotone_newton(const NewtonProblem& problem, double lo, double hi, double guess,
                                 const Tolerances& tol) {
  double g_lo = problem.g(lo);
  double g_hi = problem.g(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw NoSignChange("find_root_monotone_newton: bracket has no sign change");
  }
  // Orient so that g(neg) < 0 < g(pos).
  double neg = g_lo < 0.0 ? lo : hi;
  double pos = g_lo < 0.0 ? hi : lo;
  double x = (guess > std::min(lo, hi) && guess < std::max(lo, hi)) ? guess : 0.5 * (lo + hi);
  double step_prev = std::abs(hi - lo);
  for (int iter = 0; iter < kMaxRootIterations; ++iter) {
    const double gx = problem.g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) neg = x;
    else pos = x;
    const double width = std::abs(pos - neg);
    const double dgx = problem.dg(x);
    double next = x - gx / dgx;
    const double lo_b = std::min(neg, pos);
    const double hi_b = std::max(neg, pos);
    const bool newton_ok = std::isfinite(next) && next > lo_b && next < hi_b &&
                           std::abs(next - x) < 0.5 * step_prev;
    if (!newton_ok) next = 0.5 * (lo_b + hi_b);
    step_prev = std::abs(next - x);
    x = next;
    if (step_prev <= tol.root_abs || width <= tol.root_abs) return x;
  }
  throw NonConvergence("find_root_monotone_newton: iteration limit reached");
}

}  // namespace qmotion
