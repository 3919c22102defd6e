#include "qmotion/ode.hpp"

namespace qmotion {

OdePath<1> integrate_ode(const ScalarField& rhs, double x0, double t0, double t1,
                         const Tolerances& tol, const ScalarStop& stop,
                         std::span<const double> sample_times, double max_step,
                         double initial_step) {
  VectorField<1> field = [&rhs](double t, const State<1>& x) { return State<1>{rhs(t, x[0])}; };
  StopPredicate<1> predicate;
  if (stop) predicate = [&stop](double t, const State<1>& x) { return stop(t, x[0]); };
  return integrate_ode<1>(field, State<1>{x0}, t0, t1, tol, predicate, sample_times, max_step,
                          initial_step);
}

}  // namespace qmotion
