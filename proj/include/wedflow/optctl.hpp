#ifndef WEDFLOW_OPTCTL_HPP_
#define WEDFLOW_OPTCTL_HPP_

#include <functional>
#include <utility>

#include "wedflow/core.hpp"
#include "wedflow/flow.hpp"
#include "wedflow/wed.hpp"

namespace wedflow {

/// Quadratic tracking target
///   J(y,u) = w_f/2 |y(T) - yT_ref|^2 + 1/2 int w_y(t)|y - y_ref|^2
///            + 1/2 int w_u(t)|u - u_ref|^2.
struct TargetFunctional {
  double w_f = 0.0;
  Vec yT_ref;
  std::function<double(double)> w_y;
  std::function<double(double)> w_u;
  std::function<Vec(double)> y_ref;
  std::function<Vec(double)> u_ref;

  static TargetFunctional zero(int d);

  /// The scalar ODE benchmark target: w_y = 1, y_ref = e^{-t},
  /// w_u = t^2, u_ref = e^{-t}, no terminal term.
  static TargetFunctional sec21();
};

double eval_J(const TargetFunctional& J, const Trajectory& y, const ControlPoint& u);

struct OptimalPair {
  Trajectory y;
  ControlPoint u;
  double value;       // total objective (J plus penalty when applicable)
  double J_part;      // J(y,u)
  double penalty_part = 0.0;
  SolveReport report;
};

struct OuterOptions {
  int lattice = 11;         // points per axis in the coarse scan
  double nm_xtol = 1e-9;
  double nm_ftol = 1e-12;
  int nm_max_iter = 500;
  int threads = 1;
  WedOptions inner;
};

/// Deterministic derivative-free minimization over a coefficient box:
/// coarse lattice, Nelder-Mead refinement projected to the box, then a
/// per-axis quadratic polish. Ties on the lattice break to the smallest
/// lexicographic parameter vector.
std::pair<Vec, double> minimize_over_box(const ControlFamily& U,
                                         const std::function<double(const Vec&)>& f,
                                         const OuterOptions& opts);

OptimalPair solve_P(const TargetFunctional& J, const FlowProblem& flow,
                    const ControlFamily& U, const OuterOptions& opts = {});

OptimalPair solve_P_eps(const TargetFunctional& J, const WedProblem& wed,
                        const ControlFamily& U, const OuterOptions& opts = {});

OptimalPair solve_P_eps_lambda(const TargetFunctional& J, const WedProblem& wed,
                               const ControlFamily& U, double lambda,
                               const OuterOptions& opts = {},
                               MepsCache* cache = nullptr);

/// Inner minimization of y -> J(y,u) + (W(y,u) - M)/lambda at fixed u,
/// warm-started at the weighted-functional minimizer.
std::pair<Trajectory, SolveReport> penalized_inner_minimize(
    const TargetFunctional& J, const WedProblem& wed, const ControlPoint& u,
    double lambda, double M, const Trajectory& warm_start, const WedOptions& opts);

}  // namespace wedflow

#endif  // WEDFLOW_OPTCTL_HPP_
