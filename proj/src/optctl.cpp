#include "wedflow/optctl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace wedflow {

TargetFunctional TargetFunctional::zero(int d) {
  TargetFunctional J;
  J.w_f = 0.0;
  J.yT_ref = Vec::Zero(d);
  J.w_y = [](double) { return 0.0; };
  J.w_u = [](double) { return 0.0; };
  J.y_ref = [d](double) { return Vec::Zero(d); };
  J.u_ref = [d](double) { return Vec::Zero(d); };
  return J;
}

TargetFunctional TargetFunctional::sec21() {
  TargetFunctional J;
  J.w_f = 0.0;
  J.yT_ref = Vec::Zero(1);
  J.w_y = [](double) { return 1.0; };
  J.w_u = [](double t) { return t * t; };
  J.y_ref = [](double t) { return Vec::Constant(1, std::exp(-t)); };
  J.u_ref = [](double t) { return Vec::Constant(1, std::exp(-t)); };
  return J;
}

double eval_J(const TargetFunctional& J, const Trajectory& y, const ControlPoint& u) {
  const TimeGrid& g = y.grid();
  double s = 0.0;
  for (int k = 0; k <= g.N(); ++k) {
    const double t = g.node(k);
    const double w = trap_weight(g, k);
    s += 0.5 * w * J.w_y(t) * (y.at(k) - J.y_ref(t)).squaredNorm();
    s += 0.5 * w * J.w_u(t) * (u.eval(t) - J.u_ref(t)).squaredNorm();
  }
  if (J.w_f > 0.0) {
    if (J.yT_ref.size() != y.d()) throw InputError("eval_J: yT_ref dimension mismatch");
    s += 0.5 * J.w_f * (y.at(g.N()) - J.yT_ref).squaredNorm();
  }
  return s;
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

struct Candidate {
  Vec params;
  double value;
};

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n < 4) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  const int nt = std::min(threads, n);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

Candidate nelder_mead(const ControlFamily& U, const std::function<double(const Vec&)>& f,
                      Vec x0, double step0, const OuterOptions& opts) {
  const int m = U.dim();
  struct Vertex {
    Vec x;
    double v;
  };
  std::vector<Vertex> simplex;
  simplex.push_back({x0, f(x0)});
  for (int i = 0; i < m; ++i) {
    Vec xi = x0;
    const double span = U.upper()[i] - U.lower()[i];
    double st = step0 > 0.0 ? step0 : std::max(1e-6, 0.1 * span);
    xi[i] = x0[i] + st;
    if (xi[i] > U.upper()[i]) xi[i] = x0[i] - st;
    simplex.push_back({U.clamp(xi), f(U.clamp(xi))});
  }
  auto by_value = [](const Vertex& a, const Vertex& b) {
    if (a.v != b.v) return a.v < b.v;
    return lex_less(a.x, b.x);
  };
  for (int it = 0; it < opts.nm_max_iter; ++it) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    double diam = 0.0;
    for (int i = 1; i <= m; ++i) {
      diam = std::max(diam,
                      (simplex[i].x - simplex[0].x).lpNorm<Eigen::Infinity>());
    }
    if (diam < opts.nm_xtol &&
        std::abs(simplex[m].v - simplex[0].v) < opts.nm_ftol) {
      break;
    }
    Vec centroid = Vec::Zero(m);
    for (int i = 0; i < m; ++i) centroid += simplex[i].x;
    centroid /= m;
    const Vec xr = U.clamp(centroid + (centroid - simplex[m].x));
    const double fr = f(xr);
    if (fr < simplex[0].v) {
      const Vec xe = U.clamp(centroid + 2.0 * (centroid - simplex[m].x));
      const double fe = f(xe);
      simplex[m] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[m - 1].v) {
      simplex[m] = {xr, fr};
    } else {
      const Vec xc = U.clamp(centroid + 0.5 * (simplex[m].x - centroid));
      const double fc = f(xc);
      if (fc < simplex[m].v) {
        simplex[m] = {xc, fc};
      } else {
        for (int i = 1; i <= m; ++i) {
          simplex[i].x = U.clamp(simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x));
          simplex[i].v = f(simplex[i].x);
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(), by_value);
  return {simplex[0].x, simplex[0].v};
}

}  // namespace

std::pair<Vec, double> minimize_over_box(const ControlFamily& U,
                                         const std::function<double(const Vec&)>& f,
                                         const OuterOptions& opts) {
  const int m = U.dim();
  if (m > 16) throw ParameterError("minimize_over_box: control dimension above 16");

  // Coarse lattice, capped at ~2e5 total evaluations.
  int L = std::max(2, opts.lattice);
  double total = std::pow(static_cast<double>(L), m);
  while (total > 2e5 && L > 2) {
    --L;
    total = std::pow(static_cast<double>(L), m);
  }
  std::vector<Vec> points;
  const long npts = static_cast<long>(std::round(std::pow(L, m)));
  points.reserve(npts);
  for (long idx = 0; idx < npts; ++idx) {
    Vec x(m);
    long rem = idx;
    for (int i = 0; i < m; ++i) {
      const int q = static_cast<int>(rem % L);
      rem /= L;
      const double lo = U.lower()[i], hi = U.upper()[i];
      x[i] = hi > lo ? lo + (hi - lo) * q / (L - 1) : lo;
    }
    points.push_back(std::move(x));
  }
  std::vector<double> vals(points.size());
  parallel_for(static_cast<int>(points.size()), opts.threads,
               [&](int i) { vals[i] = f(points[i]); });

  int best = -1;
  int ok_count = 0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(vals[i])) continue;  // failed inner solves are skipped
    ++ok_count;
    if (best < 0 || vals[i] < vals[best] - 1e-12) {
      best = static_cast<int>(i);
    } else if (vals[i] <= vals[best] + 1e-12 && lex_less(points[i], points[best])) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw SolverError("minimize_over_box: every lattice point failed");
  }

  double spacing = 0.0;
  for (int i = 0; i < m; ++i) {
    spacing = std::max(spacing, (U.upper()[i] - U.lower()[i]) / (L - 1));
  }
  Candidate c = nelder_mead(U, f, points[best], 0.5 * spacing, opts);
  if (vals[best] < c.value) c = {points[best], vals[best]};

  // Per-axis quadratic polish.
  for (int i = 0; i < m; ++i) {
    const double span = U.upper()[i] - U.lower()[i];
    if (span <= 0.0) continue;
    const double delta = std::max(1e-7, 1e-4 * span);
    Vec xp = c.params, xm = c.params;
    xp[i] = std::min(U.upper()[i], c.params[i] + delta);
    xm[i] = std::max(U.lower()[i], c.params[i] - delta);
    const double fp = f(xp), fm = f(xm), f0 = c.value;
    const double denom = fp - 2.0 * f0 + fm;
    if (std::isfinite(fp) && std::isfinite(fm) && denom > 0.0) {
      Vec xq = c.params;
      xq[i] = c.params[i] - 0.5 * delta * (fp - fm) / denom;
      xq = U.clamp(xq);
      const double fq = f(xq);
      if (std::isfinite(fq) && fq < c.value) c = {xq, fq};
    }
    if (std::isfinite(fp) && fp < c.value) c = {xp, fp};
    if (std::isfinite(fm) && fm < c.value) c = {xm, fm};
  }
  return {c.params, c.value};
}

namespace {

double guarded(const std::function<double()>& f) {
  try {
    return f();
  } catch (const SolverError&) {
    return kInf;
  }
}

}  // namespace

OptimalPair solve_P(const TargetFunctional& J, const FlowProblem& flow,
                    const ControlFamily& U, const OuterOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  auto objective = [&](const Vec& params) {
    return guarded([&] {
      ControlPoint u{&U, params};
      auto [y, rep] = solve_gradient_flow(flow, u);
      return eval_J(J, y, u);
    });
  };
  auto [params, value] = minimize_over_box(U, objective, opts);
  ControlPoint u{&U, params};
  auto [y, rep] = solve_gradient_flow(flow, u);
  OptimalPair out{std::move(y), u, value, value, 0.0, rep};
  out.report.functional_value = value;
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

OptimalPair solve_P_eps(const TargetFunctional& J, const WedProblem& wed,
                        const ControlFamily& U, const OuterOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  auto objective = [&](const Vec& params) {
    return guarded([&] {
      ControlPoint u{&U, params};
      auto [y, rep] = wed_minimize(wed, u, opts.inner);
      return eval_J(J, y, u);
    });
  };
  auto [params, value] = minimize_over_box(U, objective, opts);
  ControlPoint u{&U, params};
  auto [y, rep] = wed_minimize(wed, u, opts.inner);
  OptimalPair out{std::move(y), u, value, value, 0.0, rep};
  out.report.functional_value = value;
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

std::pair<Trajectory, SolveReport> penalized_inner_minimize(
    const TargetFunctional& J, const WedProblem& p, const ControlPoint& u,
    double lambda, double M, const Trajectory& warm_start, const WedOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  const TimeGrid& g = p.grid;
  const int N = g.N(), d = static_cast<int>(p.y0.size());
  const double h = g.h();
  const double eh2 = p.epsilon / (h * h);
  const Mat I = Mat::Identity(d, d);
  const bool prox_only = p.energy->smoothness() == Smoothness::ProxOnly;

  std::vector<Vec> un(g.num_nodes());
  for (int k = 0; k <= g.N(); ++k) un[k] = u.eval(g.node(k));

  Trajectory y = warm_start;
  y.at(0) = p.y0;

  auto total_value = [&](const Trajectory& yy) {
    return eval_J(J, yy, u) + (wed_value(p, yy, u) - M) / lambda;
  };
  // Gradient of the full objective with respect to y_1..y_N.
  auto gradient = [&](const Trajectory& yy) {
    std::vector<Vec> grad(N);
    for (int j = 1; j <= N; ++j) {
      const Vec phig =
          prox_only ? p.energy->smooth_part_grad(yy.at(j)) : p.energy->grad(yy.at(j));
      const double mpot = 0.5 * (p.mu[j - 1] + (j < N ? p.mu[j] : 0.0));
      Vec gj = p.mu[j - 1] * eh2 * (yy.at(j) - yy.at(j - 1)) + mpot * (phig - un[j]);
      if (j < N) gj -= p.mu[j] * eh2 * (yy.at(j + 1) - yy.at(j));
      gj /= lambda;
      const double t = g.node(j);
      gj += trap_weight(g, j) * J.w_y(t) * (yy.at(j) - J.y_ref(t));
      if (j == N && J.w_f > 0.0) gj += J.w_f * (yy.at(N) - J.yT_ref);
      grad[j - 1] = std::move(gj);
    }
    return grad;
  };
  auto node_scale = [&](int j) {  // diagonal magnitude, for scaled residuals
    double s = p.mu[j - 1] * eh2 / lambda;
    s += trap_weight(g, j) * std::abs(J.w_y(g.node(j)));
    return std::max(s, 1e-300);
  };

  SolveReport rep;
  double cond_lo = kInf, cond_hi = 0.0;
  for (int j = 1; j <= N; ++j) {
    const double s = node_scale(j);
    cond_lo = std::min(cond_lo, s);
    cond_hi = std::max(cond_hi, s);
  }
  rep.cond_estimate = cond_hi / cond_lo;

  double scale = 1.0;
  for (int k = 0; k <= N; ++k) {
    scale = std::max(scale, y.at(k).lpNorm<Eigen::Infinity>());
    scale = std::max(scale, un[k].lpNorm<Eigen::Infinity>());
  }

  if (!prox_only) {
    double fval = total_value(y);
    for (int it = 0; it < opts.max_iter; ++it) {
      auto grad = gradient(y);
      double res = 0.0;
      for (int j = 1; j <= N; ++j) {
        res = std::max(res, grad[j - 1].lpNorm<Eigen::Infinity>() / node_scale(j));
      }
      rep.iterations = it;
      rep.final_residual = res;
      if (res <= opts.tol * scale) {
        rep.converged = true;
        break;
      }
      std::vector<Mat> diag(N), off(N - 1);
      for (int j = 1; j <= N; ++j) {
        const double mpot = 0.5 * (p.mu[j - 1] + (j < N ? p.mu[j] : 0.0));
        Mat Dj = p.mu[j - 1] * eh2 * I + mpot * p.energy->hess(y.at(j));
        if (j < N) Dj += p.mu[j] * eh2 * I;
        Dj /= lambda;
        Dj += trap_weight(g, j) * J.w_y(g.node(j)) * I;
        if (j == N && J.w_f > 0.0) Dj += J.w_f * I;
        if (j < N) {
          Mat Oj = -p.mu[j] * eh2 * I / lambda;
          off[j - 1] = std::move(Oj);
        }
        diag[j - 1] = std::move(Dj);
      }
      // Block Thomas elimination.
      for (int i = 1; i < N; ++i) {
        const Mat L = off[i - 1] *
                      diag[i - 1].ldlt().solve(Mat::Identity(d, d));
        diag[i] -= L * off[i - 1].transpose();
        grad[i] -= L * grad[i - 1];  // rhs is -grad
      }
      std::vector<Vec> step(N);
      step[N - 1] = diag[N - 1].ldlt().solve(-grad[N - 1]);
      for (int i = N - 1; i-- > 0;) {
        step[i] = diag[i].ldlt().solve(-grad[i] - off[i].transpose() * step[i + 1]);
      }
      double slope = 0.0;
      for (int j = 0; j < N; ++j) slope += grad[j].dot(step[j]);
      double t = 1.0;
      Trajectory trial = y;
      for (int bt = 0; bt < 60; ++bt) {
        for (int j = 1; j <= N; ++j) trial.at(j) = y.at(j) + t * step[j - 1];
        const double ft = total_value(trial);
        if (ft <= fval + 1e-4 * t * slope || ft <= fval) break;
        t *= 0.5;
      }
      for (int j = 1; j <= N; ++j) y.at(j) = y.at(j) + t * step[j - 1];
      fval = total_value(y);
    }
  } else {
    // Scaled proximal gradient on the smooth part, box projection.
    const double curv = p.energy->smooth_part_curvature();
    std::vector<double> dscale(N);
    for (int j = 1; j <= N; ++j) {
      double dj = p.mu[j - 1] * (eh2 + 0.5 * curv);
      if (j < N) dj += p.mu[j] * (2.0 * eh2 + 0.5 * curv);
      if (j > 1) dj += p.mu[j - 1] * eh2;
      dj /= lambda;
      dj += trap_weight(g, j) * J.w_y(g.node(j));
      if (j == N && J.w_f > 0.0) dj += J.w_f;
      dscale[j - 1] = dj;
    }
    for (int j = 1; j <= N; ++j) y.at(j) = p.energy->project_domain(y.at(j));
    Trajectory y_prev = y;
    double fval = total_value(y);
    double theta = 1.0;
    for (int it = 0; it < opts.max_prox_iter; ++it) {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double beta = (theta - 1.0) / theta_next;
      Trajectory z = y;
      for (int j = 1; j <= N; ++j) z.at(j) = y.at(j) + beta * (y.at(j) - y_prev.at(j));
      auto grad = gradient(z);
      Trajectory y_next = z;
      for (int j = 1; j <= N; ++j) {
        y_next.at(j) = p.energy->project_domain(z.at(j) - grad[j - 1] / dscale[j - 1]);
      }
      const double fnext = total_value(y_next);
      if (fnext > fval) {
        theta = 1.0;
        auto g0 = gradient(y);
        Trajectory y_plain = y;
        for (int j = 1; j <= N; ++j) {
          y_plain.at(j) =
              p.energy->project_domain(y.at(j) - g0[j - 1] / dscale[j - 1]);
        }
        y_prev = y;
        y = y_plain;
        fval = total_value(y);
      } else {
        theta = theta_next;
        y_prev = y;
        y = y_next;
        fval = fnext;
      }
      // Projected-gradient mapping residual, matching the Newton criterion
      // at free nodes (iterate differences understate optimality under
      // momentum).
      auto gy = gradient(y);
      double r = 0.0;
      for (int j = 1; j <= N; ++j) {
        const Vec mapped =
            y.at(j) -
            p.energy->project_domain(y.at(j) - gy[j - 1] / dscale[j - 1]);
        r = std::max(r, dscale[j - 1] * mapped.lpNorm<Eigen::Infinity>() /
                            node_scale(j));
      }
      rep.iterations = it + 1;
      rep.final_residual = r;
      if (r <= opts.tol * scale) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.functional_value = total_value(y);
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!rep.converged) {
    throw SolverError("penalized_inner_minimize: did not reach tolerance (residual " +
                      std::to_string(rep.final_residual) + ", cond est " +
                      std::to_string(rep.cond_estimate) + ")");
  }
  return {std::move(y), rep};
}

OptimalPair solve_P_eps_lambda(const TargetFunctional& J, const WedProblem& wed,
                               const ControlFamily& U, double lambda,
                               const OuterOptions& opts, MepsCache* cache) {
  if (!(lambda > 0.0)) {
    throw ParameterError("solve_P_eps_lambda: lambda must be positive");
  }
  const auto t_start = std::chrono::steady_clock::now();
  MepsCache local_cache;
  MepsCache& mc = cache ? *cache : local_cache;

  auto inner = [&](const Vec& params) -> std::pair<Trajectory, double> {
    ControlPoint u{&U, params};
    auto [y_w, rep_w] = wed_minimize(wed, u, opts.inner);
    const double M = mc.get(wed, u, opts.inner);
    auto [y, rep] = penalized_inner_minimize(J, wed, u, lambda, M, y_w, opts.inner);
    return {std::move(y), rep.functional_value};
  };
  auto objective = [&](const Vec& params) {
    return guarded([&] { return inner(params).second; });
  };
  auto [params, value] = minimize_over_box(U, objective, opts);
  ControlPoint u{&U, params};
  auto [y_w, rep_w] = wed_minimize(wed, u, opts.inner);
  const double M = mc.get(wed, u, opts.inner);
  auto [y, rep] = penalized_inner_minimize(J, wed, u, lambda, M, y_w, opts.inner);
  OptimalPair out{std::move(y), u, rep.functional_value, 0.0, 0.0, rep};
  out.J_part = eval_J(J, out.y, u);
  out.penalty_part = (wed_value(wed, out.y, u) - M) / lambda;
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace wedflow
