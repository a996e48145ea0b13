#ifndef WEDFLOW_FLOW_HPP_
#define WEDFLOW_FLOW_HPP_

#include <utility>

#include "wedflow/core.hpp"
#include "wedflow/energy.hpp"

namespace wedflow {

/// Gradient flow dy/dt + dphi(y) contains u, y(0) = y0, solved by
/// proximal implicit Euler: y_{k+1} = prox_{h phi}(y_k + h u_{k+1}).
struct FlowProblem {
  EnergyPtr energy;
  Vec y0;
  TimeGrid grid;

  FlowProblem(EnergyPtr e, Vec y0_, TimeGrid g);
};

std::pair<Trajectory, SolveReport> solve_gradient_flow(const FlowProblem& p,
                                                       const ControlPoint& u);

/// Defect of the discrete energy-dissipation identity
///   sum h|dy|^2 + sum h|eta|^2 = sum h|u|^2 - 2 phi(y_N) + 2 phi(y_0),
/// with eta the per-step prox residual. Expected O(h).
double dissipation_identity_residual(const FlowProblem& p, const ControlPoint& u,
                                     const Trajectory& y);

}  // namespace wedflow

#endif  // WEDFLOW_FLOW_HPP_
