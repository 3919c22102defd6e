#include <cmath>

#include "qmotion/errors.hpp"
#include "qmotion/tunneling.hpp"

namespace qmotion {

std::vector<RetardationVerdict> retardation_scan(std::span<const QuantileTrajectory> free,
                                                 std::span<const QuantileTrajectory> tunneling,
                                                 double barrier_half_width, double tolerance) {
  if (free.size() != tunneling.size()) {
    throw InvalidRange("retardation_scan: trajectory sets differ in size");
  }
  std::vector<RetardationVerdict> verdicts;
  for (std::size_t i = 0; i < free.size(); ++i) {
    const QuantileTrajectory& f = free[i];
    const QuantileTrajectory& q = tunneling[i];
    if (f.P != q.P) throw InvalidRange("retardation_scan: trajectories are not paired by P");
    RetardationVerdict v;
    v.P = f.P;
    std::size_t jf = 0;
    for (const TrajectorySample& s : q.samples) {
      while (jf < f.samples.size() && f.samples[jf].t < s.t) ++jf;
      if (jf == f.samples.size() || f.samples[jf].t != s.t || !(s.x > barrier_half_width)) {
        ++v.skipped;
        continue;
      }
      const double margin = f.samples[jf].x - s.x;
      ++v.checked;
      if (margin < v.worst_margin) {
        v.worst_margin = margin;
        v.worst_t = s.t;
      }
      if (margin < -tolerance) v.holds = false;
    }
    verdicts.push_back(v);
  }
  return verdicts;
}

std::vector<RetardationVerdict> retardation_scan(const PacketModel& free, const PacketModel& tunneling,
                                                 std::span<const double> p_list,
                                                 std::span<const double> t_grid,
                                                 double barrier_half_width, double tolerance) {
  std::vector<QuantileTrajectory> free_traj;
  std::vector<QuantileTrajectory> tunnel_traj;
  for (double P : p_list) {
    free_traj.push_back(trace_trajectory_cdf(free, P, t_grid));
    tunnel_traj.push_back(trace_trajectory_cdf(tunneling, P, t_grid));
  }
  return retardation_scan(free_traj, tunnel_traj, barrier_half_width, tolerance);
}

}  // namespace qmotion
