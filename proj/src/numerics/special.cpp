#include <cmath>

#include "qmotion/errors.hpp"
#include "qmotion/numerics.hpp"

namespace qmotion {

double erfc(double x) { return std::erfc(x); }

void Tolerances::validate() const {
  if (!(quad_rel > 0.0 && quad_abs > 0.0 && root_abs > 0.0 && ode_rel > 0.0 && ode_abs > 0.0)) {
    throw InvalidRange("tolerances must be strictly positive");
  }
}

std::vector<double> uniform_grid(double t0, double t1, double step) {
  if (!(step > 0.0) || !(t1 >= t0)) {
    throw InvalidRange("uniform_grid needs step > 0 and t1 >= t0");
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9));
  out.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(t0 + static_cast<double>(i) * step);
  if (t1 - out.back() > 1e-12 * step) out.push_back(t1);
  return out;
}

}  // namespace qmotion
