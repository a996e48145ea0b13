#include "wedflow/wed.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace wedflow {

WedProblem::WedProblem(EnergyPtr e, Vec y0_, TimeGrid g, double eps)
    : energy(std::move(e)), y0(std::move(y0_)), grid(g), epsilon(eps) {
  if (!energy) throw InputError("WedProblem: null energy");
  if (!(epsilon > 0.0)) throw ParameterError("WedProblem: epsilon must be positive");
  if (epsilon < 1e-3 * grid.T()) {
    throw ParameterError("WedProblem: epsilon below 1e-3*T, weights underflow");
  }
  if (epsilon >= epsilon0()) {
    throw ParameterError("WedProblem: epsilon >= epsilon0 = 1/(4|kappa|), "
                         "uniform convexity not guaranteed");
  }
  if (!energy->in_domain(y0)) {
    throw DomainError("WedProblem: y0 outside the effective domain");
  }
  mu.resize(grid.N());
  for (int k = 0; k < grid.N(); ++k) {
    mu[k] = epsilon * (std::exp(-grid.node(k) / epsilon) -
                       std::exp(-grid.node(k + 1) / epsilon));
    if (!(mu[k] > 0.0)) {
      throw ParameterError("WedProblem: exponential cell mass underflows at cell " +
                           std::to_string(k));
    }
  }
}

double WedProblem::epsilon0() const {
  const double kneg = std::max(0.0, -energy->kappa());
  return kneg > 0.0 ? 1.0 / (4.0 * kneg) : kInf;
}

namespace {

bool initial_value_pinned(const WedProblem& p, const Trajectory& y) {
  return (y.at(0) - p.y0).lpNorm<Eigen::Infinity>() <=
         1e-14 * (1.0 + p.y0.lpNorm<Eigen::Infinity>());
}

std::vector<Vec> control_nodes(const ControlPoint& u, const TimeGrid& g) {
  std::vector<Vec> un(g.num_nodes());
  for (int k = 0; k <= g.N(); ++k) un[k] = u.eval(g.node(k));
  return un;
}

// Gradient of the smooth part of W with respect to y_1..y_N.
// For ProxOnly obstacle the smooth part uses phi_s(v) = |v|^2/2.
std::vector<Vec> smooth_gradient(const WedProblem& p, const Trajectory& y,
                                 const std::vector<Vec>& un, bool prox_only) {
  const TimeGrid& g = y.grid();
  const double h = g.h();
  const double eh2 = p.epsilon / (h * h);
  std::vector<Vec> grad(g.N());
  for (int j = 1; j <= g.N(); ++j) {
    Vec phig = prox_only ? p.energy->smooth_part_grad(y.at(j)) : p.energy->grad(y.at(j));
    // Node j sits on the right end of cell j-1 and the left end of cell j,
    // so the trapezoid potential contributes half from each adjacent cell.
    const double mpot =
        0.5 * (p.mu[j - 1] + (j < g.N() ? p.mu[j] : 0.0));
    Vec gj = p.mu[j - 1] * eh2 * (y.at(j) - y.at(j - 1)) + mpot * (phig - un[j]);
    if (j < g.N()) gj -= p.mu[j] * eh2 * (y.at(j + 1) - y.at(j));
    grad[j - 1] = std::move(gj);
  }
  return grad;
}

double scaled_residual(const WedProblem& p, const std::vector<Vec>& grad) {
  double r = 0.0;
  for (size_t j = 0; j < grad.size(); ++j) {
    r = std::max(r, grad[j].lpNorm<Eigen::Infinity>() / p.mu[j]);
  }
  return r;
}

double residual_scale(const Trajectory& y, const std::vector<Vec>& un) {
  double s = 1.0;
  for (int k = 0; k <= y.grid().N(); ++k) {
    s = std::max(s, y.at(k).lpNorm<Eigen::Infinity>());
    s = std::max(s, un[k].lpNorm<Eigen::Infinity>());
  }
  return s;
}

// Block-tridiagonal solve, blocks d x d, in-place block Thomas.
std::vector<Vec> block_tridiag_solve(std::vector<Mat> diag, std::vector<Mat> off,
                                     std::vector<Vec> rhs) {
  const size_t n = diag.size();
  for (size_t i = 1; i < n; ++i) {
    // off[i-1] couples unknowns i-1 and i (symmetric).
    const Mat L = off[i - 1] * diag[i - 1].ldlt().solve(Mat::Identity(
                                   diag[i - 1].rows(), diag[i - 1].cols()));
    diag[i] -= L * off[i - 1].transpose();
    rhs[i] -= L * rhs[i - 1];
  }
  std::vector<Vec> x(n);
  x[n - 1] = diag[n - 1].ldlt().solve(rhs[n - 1]);
  for (size_t i = n - 1; i-- > 0;) {
    x[i] = diag[i].ldlt().solve(rhs[i] - off[i].transpose() * x[i + 1]);
  }
  return x;
}

std::pair<Trajectory, SolveReport> minimize_smooth(const WedProblem& p,
                                                   const ControlPoint& u,
                                                   Trajectory y,
                                                   const WedOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const TimeGrid& g = p.grid;
  const int N = g.N(), d = static_cast<int>(p.y0.size());
  const double h = g.h();
  const double eh2 = p.epsilon / (h * h);
  const auto un = control_nodes(u, g);
  const Mat I = Mat::Identity(d, d);

  SolveReport rep;
  double fval = wed_value(p, y, u);
  const double scale = residual_scale(y, un);
  // Gradient entries carry terms of size mu*eps/h^2, so after dividing by
  // mu the residual cannot drop below roughly eps/h^2 times machine
  // precision; stop once the remainder is pure roundoff.
  const double roundoff_floor =
      64.0 * std::numeric_limits<double>::epsilon() * eh2 * scale;
  for (int it = 0; it < opts.max_iter; ++it) {
    auto grad = smooth_gradient(p, y, un, false);
    rep.final_residual = scaled_residual(p, grad);
    rep.iterations = it;
    if (rep.final_residual <= opts.tol * scale + roundoff_floor) {
      rep.converged = true;
      break;
    }
    std::vector<Mat> diag(N), off(N - 1);
    for (int j = 1; j <= N; ++j) {
      const double mpot = 0.5 * (p.mu[j - 1] + (j < N ? p.mu[j] : 0.0));
      Mat Dj = p.mu[j - 1] * eh2 * I + mpot * p.energy->hess(y.at(j));
      if (j < N) {
        Dj += p.mu[j] * eh2 * I;
        off[j - 1] = -p.mu[j] * eh2 * I;
      }
      diag[j - 1] = std::move(Dj);
    }
    std::vector<Vec> rhs(N);
    for (int j = 0; j < N; ++j) rhs[j] = -grad[j];
    auto step = block_tridiag_solve(std::move(diag), std::move(off), std::move(rhs));
    double slope = 0.0;
    for (int j = 0; j < N; ++j) slope += grad[j].dot(step[j]);
    // Armijo backtracking on the functional value.
    double t = 1.0;
    Trajectory trial = y;
    for (int bt = 0; bt < 60; ++bt) {
      for (int j = 1; j <= N; ++j) trial.at(j) = y.at(j) + t * step[j - 1];
      const double ftrial = wed_value(p, trial, u);
      if (ftrial <= fval + 1e-4 * t * slope || ftrial <= fval) {
        break;
      }
      t *= 0.5;
    }
    for (int j = 1; j <= N; ++j) y.at(j) = y.at(j) + t * step[j - 1];
    fval = wed_value(p, y, u);
  }
  rep.functional_value = fval;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!rep.converged) {
    throw SolverError("wed_minimize: Newton did not reach tolerance (residual " +
                      std::to_string(rep.final_residual) + ")");
  }
  return {std::move(y), rep};
}

// ProxOnly path: diagonally scaled proximal gradient with Nesterov
// acceleration and function-value restart. The scaling majorizes the
// tridiagonal smooth Hessian row-wise (Gershgorin), which keeps the
// iteration well conditioned despite the exponential mass decay.
std::pair<Trajectory, SolveReport> minimize_prox_only(const WedProblem& p,
                                                      const ControlPoint& u,
                                                      Trajectory y,
                                                      const WedOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const TimeGrid& g = p.grid;
  const int N = g.N();
  const double h = g.h();
  const double eh2 = p.epsilon / (h * h);
  const auto un = control_nodes(u, g);

  // Row-wise curvature bounds (Gershgorin) for the smooth part.
  const double curv = p.energy->smooth_part_curvature();
  std::vector<double> dscale(N);
  for (int j = 1; j <= N; ++j) {
    double dj = p.mu[j - 1] * (eh2 + 0.5 * curv);
    if (j < N) dj += p.mu[j] * (2.0 * eh2 + 0.5 * curv);
    if (j > 1) dj += p.mu[j - 1] * eh2;
    dscale[j - 1] = dj;
  }
  for (int j = 1; j <= N; ++j) y.at(j) = p.energy->project_domain(y.at(j));

  SolveReport rep;
  Trajectory y_prev = y;
  double fval = wed_value(p, y, u);
  const double scale = residual_scale(y, un);
  double theta = 1.0;
  for (int it = 0; it < opts.max_prox_iter; ++it) {
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const double beta = (theta - 1.0) / theta_next;
    Trajectory z = y;
    for (int j = 1; j <= N; ++j) z.at(j) = y.at(j) + beta * (y.at(j) - y_prev.at(j));
    auto grad = smooth_gradient(p, z, un, true);
    Trajectory y_next = z;
    for (int j = 1; j <= N; ++j) {
      y_next.at(j) =
          p.energy->project_domain(z.at(j) - grad[j - 1] / dscale[j - 1]);
    }
    const double fnext = wed_value(p, y_next, u);
    if (fnext > fval) {  // restart momentum
      theta = 1.0;
      auto g0 = smooth_gradient(p, y, un, true);
      Trajectory y_plain = y;
      for (int j = 1; j <= N; ++j) {
        y_plain.at(j) =
            p.energy->project_domain(y.at(j) - g0[j - 1] / dscale[j - 1]);
      }
      y_prev = y;
      y = y_plain;
      fval = wed_value(p, y, u);
    } else {
      theta = theta_next;
      y_prev = y;
      y = y_next;
      fval = fnext;
    }
    // Scaled projected-gradient mapping; at free nodes this equals the
    // Newton path's criterion |g_j|_inf / mu_{j-1}.
    auto gy = smooth_gradient(p, y, un, true);
    double r = 0.0;
    for (int j = 1; j <= N; ++j) {
      const Vec mapped =
          y.at(j) - p.energy->project_domain(y.at(j) - gy[j - 1] / dscale[j - 1]);
      r = std::max(r, dscale[j - 1] * mapped.lpNorm<Eigen::Infinity>() / p.mu[j - 1]);
    }
    rep.iterations = it + 1;
    rep.final_residual = r;
    if (r <= opts.tol * scale +
                 64.0 * std::numeric_limits<double>::epsilon() * eh2 * scale) {
      rep.converged = true;
      break;
    }
  }
  rep.functional_value = fval;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!rep.converged) {
    throw SolverError("wed_minimize: proximal gradient did not reach tolerance "
                      "(residual " + std::to_string(rep.final_residual) + ")");
  }
  return {std::move(y), rep};
}

}  // namespace

double wed_value(const WedProblem& p, const Trajectory& y, const ControlPoint& u) {
  if (y.grid() != p.grid) throw InputError("wed_value: trajectory grid mismatch");
  if (y.d() != p.y0.size()) throw InputError("wed_value: state dimension mismatch");
  if (!initial_value_pinned(p, y)) return kInf;
  const double h = p.grid.h();
  // Velocity on cell k is midpoint-accurate; pairing it with the cell
  // trapezoid of phi - (u,y) makes the whole sum second order, which the
  // right-endpoint rule is not (its EL error is (h/2eps)(phi'(y)-u)).
  double phi_left = p.energy->value(y.at(0));
  if (!std::isfinite(phi_left)) return kInf;
  double s = 0.0;
  for (int k = 0; k < p.grid.N(); ++k) {
    const double phi_right = p.energy->value(y.at(k + 1));
    if (!std::isfinite(phi_right)) return kInf;
    const Vec ul = u.eval(p.grid.node(k));
    const Vec ur = u.eval(p.grid.node(k + 1));
    s += p.mu[k] * (0.5 * p.epsilon * ((y.at(k + 1) - y.at(k)) / h).squaredNorm() +
                    0.5 * (phi_left + phi_right) -
                    0.5 * (ul.dot(y.at(k)) + ur.dot(y.at(k + 1))));
    phi_left = phi_right;
  }
  return s;
}

std::pair<Trajectory, SolveReport> wed_minimize_from(const WedProblem& p,
                                                     const ControlPoint& u,
                                                     const Trajectory& y_init,
                                                     const WedOptions& opts) {
  Trajectory y = y_init;
  y.at(0) = p.y0;
  if (p.energy->smoothness() == Smoothness::Smooth) {
    return minimize_smooth(p, u, std::move(y), opts);
  }
  return minimize_prox_only(p, u, std::move(y), opts);
}

std::pair<Trajectory, SolveReport> wed_minimize(const WedProblem& p,
                                                const ControlPoint& u,
                                                const WedOptions& opts) {
  Trajectory y(p.grid, static_cast<int>(p.y0.size()));
  for (int k = 0; k <= p.grid.N(); ++k) y.at(k) = p.y0;
  return wed_minimize_from(p, u, y, opts);
}

std::vector<Vec> el_residual(const WedProblem& p, const Trajectory& y,
                             const ControlPoint& u) {
  const auto un = control_nodes(u, p.grid);
  const bool prox_only = p.energy->smoothness() == Smoothness::ProxOnly;
  auto grad = smooth_gradient(p, y, un, prox_only);
  for (size_t j = 0; j < grad.size(); ++j) grad[j] /= p.mu[j];
  return grad;
}

double m_eps(const WedProblem& p, const ControlPoint& u, const WedOptions& opts) {
  auto [y, rep] = wed_minimize(p, u, opts);
  return wed_value(p, y, u);
}

double MepsCache::get(const WedProblem& p, const ControlPoint& u,
                      const WedOptions& opts) {
  std::vector<double> key;
  key.reserve(5 + p.y0.size() + u.params.size());
  key.push_back(p.epsilon);
  key.push_back(p.grid.T());
  key.push_back(static_cast<double>(p.grid.N()));
  key.push_back(static_cast<double>(reinterpret_cast<uintptr_t>(p.energy.get())));
  for (int i = 0; i < p.y0.size(); ++i) key.push_back(p.y0[i]);
  for (int i = 0; i < u.params.size(); ++i) key.push_back(u.params[i]);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const double val = m_eps(p, u, opts);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_[key] = val;  // last write wins on identical keys
  return val;
}

void MepsCache::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.clear();
}

double lemma1_value(const WedProblem& p, const ControlPoint& u,
                    const WedOptions& opts) {
  auto [y, rep] = wed_minimize(p, u, opts);
  const TimeGrid& g = p.grid;
  const double h = g.h(), eps = p.epsilon;
  // One-sided second-order initial velocity.
  const Vec yd0 = (-3.0 * y.at(0) + 4.0 * y.at(1) - y.at(2)) / (2.0 * h);
  double int_u_dy = 0.0, int_u_y = 0.0;
  for (int k = 0; k < g.N(); ++k) {
    const Vec um = u.eval(g.node(k) + 0.5 * h);  // midpoint, like the velocity
    const Vec ul = u.eval(g.node(k));
    const Vec ur = u.eval(g.node(k + 1));
    int_u_dy += p.mu[k] * um.dot((y.at(k + 1) - y.at(k)) / h);
    int_u_y += p.mu[k] * 0.5 * (ul.dot(y.at(k)) + ur.dot(y.at(k + 1)));
  }
  return -0.5 * eps * eps * yd0.squaredNorm() -
         eps * std::exp(-g.T() / eps) * p.energy->value(y.at(g.N())) +
         eps * p.energy->value(y.at(0)) + eps * int_u_dy - int_u_y;
}

std::pair<double, double> coercivity_gap(const WedProblem& p, const Trajectory& y,
                                         const ControlPoint& u,
                                         const WedOptions& opts) {
  auto [y_min, rep] = wed_minimize(p, u, opts);
  const double M = wed_value(p, y_min, u);
  const double diff_h1 = norm_h1(y - y_min);
  const double lhs = std::pow(p.epsilon, 3) * std::exp(-p.grid.T() / p.epsilon) *
                     diff_h1 * diff_h1;
  const double rhs = wed_value(p, y, u) - M;
  return {lhs, rhs};
}

}  // namespace wedflow
