#ifndef WEDFLOW_SWEEP_HPP_
#define WEDFLOW_SWEEP_HPP_

#include <functional>
#include <string>
#include <vector>

#include "wedflow/optctl.hpp"

namespace wedflow {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
  std::vector<double> column(const std::string& name) const;
};

/// Convergence-experiment bundle: one problem instance plus the epsilon and
/// lambda lists to sweep.
struct SweepPlan {
  EnergyPtr energy;
  Vec y0;
  TimeGrid grid{1.0, 2};
  TargetFunctional J;
  const ControlFamily* U = nullptr;
  std::vector<double> epsilon_list;
  std::vector<double> lambda_list;
  /// Joint schedule; default eps^4 e^{-T/eps}.
  std::function<double(double)> lambda_schedule;
  double sigma = 0.5;
  OuterOptions outer;

  void validate() const;
  double schedule(double eps) const;
};

/// Columns: eps, ok, u_star_*, value, dist_c0, dist_hsigma, dist_h1deriv.
/// Distances are between the inner minimizer at u* and the gradient flow S(u*).
Table sweep_eps(const SweepPlan& plan);

/// Columns: lambda, ok, u_star_*, value, dist_h1, penalty_residual.
Table sweep_lambda(const SweepPlan& plan, double eps_fixed);

/// Columns: eps, lambda, ok, u_star_*, value, dist_c0, dist_hsigma,
/// dist_h1_sq, coercivity_bound. Rows with lambda below 1e-14 are skipped
/// (ok = 0) to avoid 1/lambda overflow.
Table sweep_joint(const SweepPlan& plan);

/// Recovery-sequence probe at a fixed control: columns eps, p_eps, p_limit,
/// gap, where p_eps is the target value at the weighted-functional minimizer
/// and p_limit the value at the gradient flow.
Table gamma_liminf_probe(const SweepPlan& plan, const Vec& u_hat_params);

/// Trend rule for sweep assertions: last <= first and no increase larger
/// than 10% of the current value.
bool monotone_trend(const std::vector<double>& v);

}  // namespace wedflow

#endif  // WEDFLOW_SWEEP_HPP_
