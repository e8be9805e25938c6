#include "evtrack/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace evtrack {

double theta(double x) {
  if (x < 0.0) throw std::invalid_argument("theta: x < 0");
  if (x == 0.0) return 0.0;
  return x + (1.0 + x) * std::log2(1.0 + x) - x * std::log2(x);
}

double theta_inv(double y) {
  if (y < 0.0) throw std::invalid_argument("theta_inv: y < 0");
  if (y == 0.0) return 0.0;
  // theta(x) >= x, so the root lies in [0, y].
  double lo = 0.0, hi = y;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (theta(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

BoundReport ct_report(const CTInfoSolution& info, double stat_trace,
                      const DiscretizedModel& dmodel, double Dc, double tau) {
  BoundReport r;
  r.tau = tau;
  r.Dc = Dc;
  r.info_ct = info.value;
  r.rate_lb_ct = theta_inv(tau * info.value) / tau;
  r.critical_Dc = dmodel.b_bar / tau;
  r.flags.trivial_distortion = Dc >= stat_trace;
  return r;
}

}  // namespace

BoundReport ct_lower_bound(const StateSpaceModel& model, double Dc,
                           double tau) {
  if (Dc <= 0.0) throw std::invalid_argument("ct_lower_bound: Dc <= 0");
  if (tau <= 0.0) throw std::invalid_argument("ct_lower_bound: tau <= 0");
  const CTInfoSolution info = solve_ct_info(model, Dc);
  return ct_report(info, stationary_trace(model), discretize(model, tau), Dc,
                   tau);
}

BoundReport ct_lower_bound(const CTInfoSolution& info, double Dc, double tau) {
  if (Dc <= 0.0) throw std::invalid_argument("ct_lower_bound: Dc <= 0");
  if (tau <= 0.0) throw std::invalid_argument("ct_lower_bound: tau <= 0");
  BoundReport r;
  r.tau = tau;
  r.Dc = Dc;
  r.info_ct = info.value;
  r.rate_lb_ct = theta_inv(tau * info.value) / tau;
  return r;
}

BoundReport dt_lower_bound(const StateSpaceModel& model, double Dc,
                           double tau) {
  if (Dc <= 0.0) throw std::invalid_argument("dt_lower_bound: Dc <= 0");
  if (tau <= 0.0) throw std::invalid_argument("dt_lower_bound: tau <= 0");
  const DiscretizedModel dmodel = discretize(model, tau);
  const CTInfoSolution info = solve_ct_info(model, Dc);
  BoundReport r = ct_report(info, stationary_trace(model), dmodel, Dc, tau);
  const DtDistortion dd = ct_to_dt_distortion(dmodel, Dc);
  if (!dd.feasible) {
    r.flags.dt_infeasible = true;
    return r;
  }
  const DTRateSolution rd = solve_dt_rate(dmodel, dd.value, dmodel.Q_bar);
  r.rate_dt_per_sample = rd.value;
  r.rate_lb_dt = theta_inv(rd.value) / tau;
  return r;
}

std::vector<VacuityRow> vacuity_profile(const StateSpaceModel& model,
                                        double Dc,
                                        const std::vector<double>& tau_grid) {
  if (model.dim() != 1) {
    throw std::invalid_argument("vacuity_profile: model must be scalar");
  }
  if (Dc <= 0.0) throw std::invalid_argument("vacuity_profile: Dc <= 0");
  const double A = model.A(0, 0);
  const double B = model.B(0, 0);
  const double info_ct = scalar_ct_info(A, B, Dc);
  std::vector<VacuityRow> rows;
  rows.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    VacuityRow row;
    row.tau = tau;
    row.info_ct = info_ct;
    const DiscretizedModel dmodel = discretize(model, tau);
    const DtDistortion dd = ct_to_dt_distortion(dmodel, Dc);
    if (!dd.feasible) {
      row.infeasible = true;
    } else {
      const double R = scalar_dt_rate(dmodel, dd.value);
      row.rate_per_second = R / tau;
      row.bound = theta_inv(R) / tau;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace evtrack
