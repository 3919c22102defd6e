#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace qmotion {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Accuracy targets shared by quadrature, root-finding and the ODE stepper.
// Positions are in hbar/sqrt(eV m), times in hbar/eV (hbar = m = 1).
struct Tolerances {
  double quad_rel = 1e-10;
  double quad_abs = 1e-13;
  double root_abs = 1e-11;
  double ode_rel = 1e-10;
  double ode_abs = 1e-11;

  // Throws InvalidRange unless every field is strictly positive.
  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Gauss-Legendre discretisation of a wave-number interval.
struct KGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double k_min = 0.0;
  double k_max = 0.0;

  std::size_t size() const { return nodes.size(); }
};

using RealFunction = std::function<double(double)>;

double erfc(double x);

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

// n-point Gauss-Legendre rule mapped to [a, b].
KGrid gauss_legendre_grid(double a, double b, std::size_t n);

// Gauss-Legendre grid on [max(0, k_bar - n_sigma sigma_k), k_bar + n_sigma sigma_k].
KGrid build_kgrid(double k_bar, double sigma_k, double n_sigma, std::size_t n_nodes);

// Globally adaptive Gauss-Kronrod (10/21) quadrature of f over [a, b].
// Either bound may be infinite; the infinite side is mapped with
// x = x0 +/- L u / (1 - u) where L is decay_length.
// Throws NonConvergence when the subdivision budget is exhausted.
double integrate_adaptive(const RealFunction& f, double a, double b, const Tolerances& tol,
                          double decay_length = 1.0);

// Root of a monotone function inside [lo, hi] by Brent's method.
// Throws NoSignChange if g(lo) and g(hi) have the same strict sign.
double find_root_monotone(const RealFunction& g, double lo, double hi, const Tolerances& tol);

// Safeguarded Newton iteration for a monotone g with derivative dg.
// The bracket [lo, hi] must satisfy g(lo) g(hi) <= 0; values g_lo, g_hi are the
// function values at the ends. Falls back to bisection whenever a Newton step
// leaves the bracket or stalls.
struct NewtonProblem {
  std::function<double(double)> g;
  std::function<double(double)> dg;
};
double find_root_monotone_newton(const NewtonProblem& problem, double lo, double hi, double guess,
                                 const Tolerances& tol);

// Points t0, t0 + step, ... up to and including t1 (t1 is appended when the
// last step would overshoot by more than 1e-12 step).
std::vector<double> uniform_grid(double t0, double t1, double step);

}  // namespace qmotion
