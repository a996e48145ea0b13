#include "wedflow/flow.hpp"

#include <chrono>
#include <cmath>

namespace wedflow {

FlowProblem::FlowProblem(EnergyPtr e, Vec y0_, TimeGrid g)
    : energy(std::move(e)), y0(std::move(y0_)), grid(g) {
  if (!energy) throw InputError("FlowProblem: null energy");
  if (!energy->in_domain(y0)) {
    throw DomainError("FlowProblem: y0 outside the effective domain");
  }
  if (!(grid.h() * energy->kappa() > -1.0)) {
    throw ParameterError("FlowProblem: step incompatibility, need h*kappa > -1");
  }
}

std::pair<Trajectory, SolveReport> solve_gradient_flow(const FlowProblem& p,
                                                       const ControlPoint& u) {
  const auto t_start = std::chrono::steady_clock::now();
  const TimeGrid& g = p.grid;
  const double h = g.h();
  const int d = static_cast<int>(p.y0.size());

  Trajectory y(g, d);
  y.at(0) = p.y0;
  for (int k = 0; k < g.N(); ++k) {
    const Vec uk = u.eval(g.node(k + 1));  // right endpoint of cell k
    y.at(k + 1) = p.energy->prox(y.at(k) + h * uk, h);
  }

  SolveReport report;
  report.iterations = g.N();
  report.converged = true;
  report.final_residual = dissipation_identity_residual(p, u, y);
  report.functional_value = p.energy->value(y.at(g.N()));
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(y), report};
}

double dissipation_identity_residual(const FlowProblem& p, const ControlPoint& u,
                                     const Trajectory& y) {
  const TimeGrid& g = y.grid();
  const double h = g.h();
  double vel2 = 0.0, eta2 = 0.0, ctrl2 = 0.0;
  for (int k = 0; k < g.N(); ++k) {
    const Vec uk = u.eval(g.node(k + 1));
    const Vec dy = (y.at(k + 1) - y.at(k)) / h;
    const Vec eta = (y.at(k) + h * uk - y.at(k + 1)) / h;  // prox residual
    vel2 += h * dy.squaredNorm();
    eta2 += h * eta.squaredNorm();
    ctrl2 += h * uk.squaredNorm();
  }
  const double defect = vel2 + eta2 - ctrl2 + 2.0 * p.energy->value(y.at(g.N())) -
                        2.0 * p.energy->value(y.at(0));
  return std::abs(defect);
}

}  // namespace wedflow
