#pragma once

#include "evtrack/rdsolver.hpp"

#include <vector>

namespace evtrack {

/// theta(x) = x + (1+x) log2(1+x) - x log2 x, extended to theta(0) = 0.
/// Strictly increasing and concave; theta_inv(H) lower-bounds the
/// expected length of any non-singular code with entropy H.
double theta(double x);

/// Inverse of theta by bisection on [0, y] to 1e-12 absolute tolerance.
double theta_inv(double y);

struct BoundFlags {
  bool dt_infeasible = false;      // D_d <= 0: sampled bound diverges
  bool trivial_distortion = false; // Dc at/above stationary trace
};

struct BoundReport {
  double tau = 0.0;
  double Dc = 0.0;
  double rate_lb_ct = 0.0;          // bits/second
  double rate_lb_dt = 0.0;          // bits/second; valid unless dt_infeasible
  double info_ct = 0.0;             // bits/second
  double rate_dt_per_sample = 0.0;  // bits/sample; valid unless dt_infeasible
  double critical_Dc = 0.0;         // b_bar / tau
  BoundFlags flags;
};

/// Continuous-time bitrate lower bound theta_inv(tau * I^c(Dc)) / tau.
BoundReport ct_lower_bound(const StateSpaceModel& model, double Dc,
                           double tau);

/// Overload reusing a cached information-rate solution so sweeps solve
/// once per (model, Dc) across many tau.
BoundReport ct_lower_bound(const CTInfoSolution& info, double Dc, double tau);

/// Sampled-in-time bitrate lower bound theta_inv(R(D_d)) / tau; also fills
/// the continuous-time fields so the ordering dt >= ct can be read off one
/// report. D_d <= 0 sets the dt_infeasible flag instead of a sentinel.
BoundReport dt_lower_bound(const StateSpaceModel& model, double Dc,
                           double tau);

struct VacuityRow {
  double tau = 0.0;
  double rate_per_second = 0.0;  // R(D_d)/tau, bits/second
  double info_ct = 0.0;          // I^c(Dc), bits/second
  double bound = 0.0;            // theta_inv(R)/tau, bits/second
  bool infeasible = false;
};

/// For a scalar model, tabulates how the per-second sampled rate
/// approaches I^c while the coded-bit bound collapses to zero as tau -> 0.
std::vector<VacuityRow> vacuity_profile(const StateSpaceModel& model,
                                        double Dc,
                                        const std::vector<double>& tau_grid);

}  // namespace evtrack
