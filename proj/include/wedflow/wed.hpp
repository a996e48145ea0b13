#ifndef WEDFLOW_WED_HPP_
#define WEDFLOW_WED_HPP_

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "wedflow/core.hpp"
#include "wedflow/energy.hpp"

namespace wedflow {

/// Exponentially weighted trajectory functional
///   W(y,u) = sum_k mu_k [ eps/2 |(y_{k+1}-y_k)/h|^2
///                         + avg_cell(phi(y) - (u,y)) ]
/// with exact cell masses mu_k = eps (e^{-t_k/eps} - e^{-t_{k+1}/eps}) and
/// the potential averaged over the two cell endpoints (trapezoid); paired
/// with the midpoint-accurate velocity this makes the discretization second
/// order, where right-endpoint sampling would be first order only.
/// Minimized over trajectories with pinned initial node; the terminal
/// condition eps*dy(T) = 0 emerges as the natural condition of the last cell.
struct WedProblem {
  EnergyPtr energy;
  Vec y0;
  TimeGrid grid;
  double epsilon;
  std::vector<double> mu;  // exponential cell masses, size N

  WedProblem(EnergyPtr e, Vec y0_, TimeGrid g, double eps);

  /// Uniform-convexity guard: 1/(4|kappa|) for kappa < 0, +inf otherwise.
  double epsilon0() const;
};

struct WedOptions {
  double tol = 1e-10;
  int max_iter = 200;
  int max_prox_iter = 100000;
};

double wed_value(const WedProblem& p, const Trajectory& y, const ControlPoint& u);

std::pair<Trajectory, SolveReport> wed_minimize(const WedProblem& p,
                                                const ControlPoint& u,
                                                const WedOptions& opts = {});

/// Same solver, custom initial guess (used by restart probes).
std::pair<Trajectory, SolveReport> wed_minimize_from(const WedProblem& p,
                                                     const ControlPoint& u,
                                                     const Trajectory& y_init,
                                                     const WedOptions& opts = {});

/// Scaled first-order residual at y: per-node gradient divided by the cell
/// mass, the discrete counterpart of -eps*ddy + dy + dphi(y) - u.
std::vector<Vec> el_residual(const WedProblem& p, const Trajectory& y,
                             const ControlPoint& u);

/// Minimum value of W(.,u), caching per (problem, control) key.
class MepsCache {
 public:
  double get(const WedProblem& p, const ControlPoint& u, const WedOptions& opts = {});
  void clear();

 private:
  std::map<std::vector<double>, double> cache_;
  std::mutex mutex_;
};

double m_eps(const WedProblem& p, const ControlPoint& u, const WedOptions& opts = {});

/// Alternative expression for the minimum value, evaluated on the discrete
/// minimizer with exponential-mass quadrature; consistency check for m_eps.
double lemma1_value(const WedProblem& p, const ControlPoint& u,
                    const WedOptions& opts = {});

/// Coercivity pair: lhs = eps^3 e^{-T/eps} |y - y_min|_H1^2,
/// rhs = W(y,u) - M. The inequality lhs <= rhs is the caller's to assert.
std::pair<double, double> coercivity_gap(const WedProblem& p, const Trajectory& y,
                                         const ControlPoint& u,
                                         const WedOptions& opts = {});

}  // namespace wedflow

#endif  // WEDFLOW_WED_HPP_
