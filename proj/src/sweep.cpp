#include "wedflow/sweep.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wedflow {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double deriv_l2_distance(const Trajectory& a, const Trajectory& b) {
  const TimeGrid& g = a.grid();
  const double h = g.h();
  double s = 0.0;
  for (int k = 0; k < g.N(); ++k) {
    const Vec da = (a.at(k + 1) - a.at(k)) / h;
    const Vec db = (b.at(k + 1) - b.at(k)) / h;
    s += h * (da - db).squaredNorm();
  }
  return std::sqrt(s);
}
}  // namespace

std::string Table::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) os << ",";
    os << header[i];
  }
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      os << row[i];
    }
    os << "\n";
  }
  return os.str();
}

std::vector<double> Table::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      std::vector<double> col;
      for (const auto& row : rows) col.push_back(row[i]);
      return col;
    }
  }
  throw InputError("Table: no column named " + name);
}

void SweepPlan::validate() const {
  if (!U) throw InputError("SweepPlan: null control family");
  auto check_list = [](const std::vector<double>& v, const char* what) {
    for (size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0)) throw ParameterError(std::string(what) + ": entries must be positive");
      if (i > 0 && !(v[i] < v[i - 1])) {
        throw ParameterError(std::string(what) + ": list must be strictly decreasing");
      }
    }
  };
  check_list(epsilon_list, "epsilon_list");
  check_list(lambda_list, "lambda_list");
  // The joint schedule must drive lambda * eps^-3 * e^{T/eps} to zero along
  // the sweep; checked numerically as a strict decrease.
  if (epsilon_list.size() >= 2) {
    double prev = kNaN;
    for (double eps : epsilon_list) {
      const double q = schedule(eps) * std::pow(eps, -3) * std::exp(grid.T() / eps);
      if (!std::isnan(prev) && !(q < prev)) {
        throw ParameterError("SweepPlan: lambda schedule does not satisfy "
                             "lambda*eps^-3*e^{T/eps} -> 0 along the list");
      }
      prev = q;
    }
  }
}

double SweepPlan::schedule(double eps) const {
  if (lambda_schedule) return lambda_schedule(eps);
  return std::pow(eps, 4) * std::exp(-grid.T() / eps);
}

Table sweep_eps(const SweepPlan& plan) {
  plan.validate();
  const int m = plan.U->dim();
  Table t;
  t.header = {"eps", "ok"};
  for (int i = 0; i < m; ++i) t.header.push_back("u_star_" + std::to_string(i));
  t.header.insert(t.header.end(), {"value", "dist_c0", "dist_hsigma", "dist_h1deriv"});
  for (double eps : plan.epsilon_list) {
    std::vector<double> row{eps, 1.0};
    try {
      WedProblem wp(plan.energy, plan.y0, plan.grid, eps);
      OptimalPair best = solve_P_eps(plan.J, wp, *plan.U, plan.outer);
      FlowProblem fp(plan.energy, plan.y0, plan.grid);
      auto [y_flow, frep] = solve_gradient_flow(fp, best.u);
      const Trajectory diff = best.y - y_flow;
      for (int i = 0; i < m; ++i) row.push_back(best.u.params[i]);
      row.push_back(best.value);
      row.push_back(norm_c0(diff));
      row.push_back(norm_hsigma(diff, plan.sigma));
      row.push_back(deriv_l2_distance(best.y, y_flow));
    } catch (const std::runtime_error&) {
      row.resize(2 + m + 4, kNaN);
      row[1] = 0.0;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sweep_lambda(const SweepPlan& plan, double eps_fixed) {
  plan.validate();
  const int m = plan.U->dim();
  Table t;
  t.header = {"lambda", "ok"};
  for (int i = 0; i < m; ++i) t.header.push_back("u_star_" + std::to_string(i));
  t.header.insert(t.header.end(), {"value", "dist_h1", "penalty_residual"});
  WedProblem wp(plan.energy, plan.y0, plan.grid, eps_fixed);
  MepsCache cache;
  for (double lambda : plan.lambda_list) {
    std::vector<double> row{lambda, 1.0};
    try {
      OptimalPair best =
          solve_P_eps_lambda(plan.J, wp, *plan.U, lambda, plan.outer, &cache);
      auto [y_wed, rep] = wed_minimize(wp, best.u, plan.outer.inner);
      for (int i = 0; i < m; ++i) row.push_back(best.u.params[i]);
      row.push_back(best.value);
      row.push_back(norm_h1(best.y - y_wed));
      row.push_back(best.penalty_part * lambda);  // W - M
    } catch (const std::runtime_error&) {
      row.resize(2 + m + 3, kNaN);
      row[1] = 0.0;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sweep_joint(const SweepPlan& plan) {
  plan.validate();
  const int m = plan.U->dim();
  Table t;
  t.header = {"eps", "lambda", "ok"};
  for (int i = 0; i < m; ++i) t.header.push_back("u_star_" + std::to_string(i));
  t.header.insert(t.header.end(),
                  {"value", "dist_c0", "dist_hsigma", "dist_h1_sq", "coercivity_bound"});
  for (double eps : plan.epsilon_list) {
    const double lambda = plan.schedule(eps);
    std::vector<double> row{eps, lambda, 1.0};
    if (lambda < 1e-14) {  // 1/lambda would wreck Newton scaling
      row.resize(3 + m + 5, kNaN);
      row[2] = 0.0;
      t.rows.push_back(std::move(row));
      continue;
    }
    try {
      WedProblem wp(plan.energy, plan.y0, plan.grid, eps);
      MepsCache cache;
      OptimalPair best =
          solve_P_eps_lambda(plan.J, wp, *plan.U, lambda, plan.outer, &cache);
      FlowProblem fp(plan.energy, plan.y0, plan.grid);
      auto [y_flow, frep] = solve_gradient_flow(fp, best.u);
      auto [y_wed, wrep] = wed_minimize(wp, best.u, plan.outer.inner);
      const Trajectory diff_flow = best.y - y_flow;
      const double d_h1 = norm_h1(best.y - y_wed);
      for (int i = 0; i < m; ++i) row.push_back(best.u.params[i]);
      row.push_back(best.value);
      row.push_back(norm_c0(diff_flow));
      row.push_back(norm_hsigma(diff_flow, plan.sigma));
      row.push_back(d_h1 * d_h1);
      row.push_back(lambda * std::pow(eps, -3) * std::exp(plan.grid.T() / eps) *
                    best.value);
    } catch (const std::runtime_error&) {
      row.resize(3 + m + 5, kNaN);
      row[2] = 0.0;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table gamma_liminf_probe(const SweepPlan& plan, const Vec& u_hat_params) {
  plan.validate();
  ControlPoint u_hat{plan.U, u_hat_params};
  FlowProblem fp(plan.energy, plan.y0, plan.grid);
  auto [y_flow, frep] = solve_gradient_flow(fp, u_hat);
  const double p_limit = eval_J(plan.J, y_flow, u_hat);
  Table t;
  t.header = {"eps", "p_eps", "p_limit", "gap"};
  for (double eps : plan.epsilon_list) {
    WedProblem wp(plan.energy, plan.y0, plan.grid, eps);
    auto [y_eps, rep] = wed_minimize(wp, u_hat, plan.outer.inner);
    const double p_eps = eval_J(plan.J, y_eps, u_hat);
    t.rows.push_back({eps, p_eps, p_limit, std::abs(p_eps - p_limit)});
  }
  return t;
}

bool monotone_trend(const std::vector<double>& v) {
  if (v.empty()) return false;
  if (!(v.back() <= v.front())) return false;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1] + 0.1 * std::abs(v[i])) return false;
  }
  return true;
}

}  // namespace wedflow
