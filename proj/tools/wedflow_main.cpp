#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wedflow/config.hpp"
#include "wedflow/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wedflow;

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  double tol = 0.0;
};

RunConfig load(const CliArgs& a) {
  RunConfig cfg = load_config(a.config_path);
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.tol > 0.0) cfg.solver.inner.tol = a.tol;
  if (a.threads > 0) cfg.solver.threads = a.threads;
  if (const char* env = std::getenv("WEDFLOW_THREADS")) {
    cfg.solver.threads = std::max(1, std::atoi(env));
  }
  if (!fs::exists(cfg.out_dir)) {
    throw ConfigError("output directory does not exist: " + cfg.out_dir);
  }
  return cfg;
}

json report_json(const SolveReport& r) {
  return json{{"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"functional_value", r.functional_value},
              {"converged", r.converged},
              {"wall_time", r.wall_time}};
}

void write_summary(const RunConfig& cfg, const std::string& name, json body) {
  body["config_hash"] = cfg.hash;
  atomic_write((fs::path(cfg.out_dir) / (name + ".json")).string(), body.dump(2) + "\n");
}

json pair_json(const OptimalPair& p) {
  std::vector<double> params(p.u.params.data(), p.u.params.data() + p.u.params.size());
  return json{{"u_params", params},
              {"value", p.value},
              {"J_part", p.J_part},
              {"penalty_part", p.penalty_part},
              {"iterations", p.report.iterations},
              {"wall_time", p.report.wall_time}};
}

ControlPoint control_point(const RunConfig& cfg) {
  Vec params = cfg.u_params.size() ? cfg.u_params
                                   : Vec(Vec::Zero(cfg.family.dim()));
  if (!cfg.family.contains(params, 1e-12)) {
    throw ConfigError("u_params outside the control box");
  }
  return {&cfg.family, params};
}

int run_gradient_flow(const CliArgs& a) {
  RunConfig cfg = load(a);
  FlowProblem fp(cfg.energy, cfg.y0, cfg.grid());
  ControlPoint u = control_point(cfg);
  auto [y, rep] = solve_gradient_flow(fp, u);
  atomic_write((fs::path(cfg.out_dir) / "gradient_flow.csv").string(), y.to_csv());
  write_summary(cfg, "gradient_flow", json{{"report", report_json(rep)}});
  return 0;
}

int run_wed_min(const CliArgs& a) {
  RunConfig cfg = load(a);
  if (!cfg.epsilon) throw ConfigError("wed-min requires 'epsilon'");
  WedProblem wp(cfg.energy, cfg.y0, cfg.grid(), *cfg.epsilon);
  ControlPoint u = control_point(cfg);
  auto [y, rep] = wed_minimize(wp, u, cfg.solver.inner);
  atomic_write((fs::path(cfg.out_dir) / "wed_min.csv").string(), y.to_csv());
  write_summary(cfg, "wed_min",
                json{{"epsilon", *cfg.epsilon},
                     {"m_eps", wed_value(wp, y, u)},
                     {"report", report_json(rep)}});
  return 0;
}

int run_solve_p(const CliArgs& a) {
  RunConfig cfg = load(a);
  FlowProblem fp(cfg.energy, cfg.y0, cfg.grid());
  OptimalPair best = solve_P(cfg.target, fp, cfg.family, cfg.solver);
  atomic_write((fs::path(cfg.out_dir) / "solve_p.csv").string(), best.y.to_csv());
  write_summary(cfg, "solve_p", pair_json(best));
  return 0;
}

int run_solve_p_eps(const CliArgs& a) {
  RunConfig cfg = load(a);
  if (!cfg.epsilon) throw ConfigError("solve-p-eps requires 'epsilon'");
  WedProblem wp(cfg.energy, cfg.y0, cfg.grid(), *cfg.epsilon);
  OptimalPair best = solve_P_eps(cfg.target, wp, cfg.family, cfg.solver);
  atomic_write((fs::path(cfg.out_dir) / "solve_p_eps.csv").string(), best.y.to_csv());
  json body = pair_json(best);
  body["epsilon"] = *cfg.epsilon;
  write_summary(cfg, "solve_p_eps", body);
  return 0;
}

int run_solve_p_eps_lambda(const CliArgs& a) {
  RunConfig cfg = load(a);
  if (!cfg.epsilon) throw ConfigError("solve-p-eps-lambda requires 'epsilon'");
  if (!cfg.lambda) throw ConfigError("solve-p-eps-lambda requires 'lambda'");
  WedProblem wp(cfg.energy, cfg.y0, cfg.grid(), *cfg.epsilon);
  OptimalPair best =
      solve_P_eps_lambda(cfg.target, wp, cfg.family, *cfg.lambda, cfg.solver);
  atomic_write((fs::path(cfg.out_dir) / "solve_p_eps_lambda.csv").string(),
               best.y.to_csv());
  json body = pair_json(best);
  body["epsilon"] = *cfg.epsilon;
  body["lambda"] = *cfg.lambda;
  write_summary(cfg, "solve_p_eps_lambda", body);
  return 0;
}

int run_table(const CliArgs& a, const std::string& name,
              const std::function<Table(const RunConfig&)>& make) {
  RunConfig cfg = load(a);
  Table t = make(cfg);
  atomic_write((fs::path(cfg.out_dir) / (name + ".csv")).string(), t.to_csv());
  write_summary(cfg, name, json{{"rows", t.rows.size()}});
  return 0;
}

int run_verify_oracle(const CliArgs& a) {
  bool pass = false;
  const std::string report = oracle::certification_report(&pass);
  std::cout << report;
  if (!a.config_path.empty()) {
    RunConfig cfg = load(a);
    atomic_write((fs::path(cfg.out_dir) / "verify_oracle.txt").string(), report);
    write_summary(cfg, "verify_oracle", json{{"pass", pass}});
  }
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted-energy-dissipation gradient-flow control toolkit"};
  app.require_subcommand(1);
  CliArgs args;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    sub->add_option("--config", args.config_path, "config file (json)")
        ->required(config_required);
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--threads", args.threads, "worker threads");
    sub->add_option("--tol", args.tol, "inner solver tolerance override");
  };

  std::function<int()> action;
  auto bind = [&](const std::string& name, const std::string& desc,
                  std::function<int()> fn, bool config_required = true) {
    auto* sub = app.add_subcommand(name, desc);
    add_common(sub, config_required);
    sub->callback([&action, fn] { action = fn; });
    return sub;
  };

  bind("gradient-flow", "solve the controlled gradient flow",
       [&] { return run_gradient_flow(args); });
  bind("wed-min", "minimize the weighted trajectory functional",
       [&] { return run_wed_min(args); });
  bind("solve-p", "optimal control with the flow constraint",
       [&] { return run_solve_p(args); });
  bind("solve-p-eps", "bilevel regularized optimal control",
       [&] { return run_solve_p_eps(args); });
  bind("solve-p-eps-lambda", "penalized optimal control",
       [&] { return run_solve_p_eps_lambda(args); });
  bind("sweep-eps", "epsilon convergence sweep", [&] {
    return run_table(args, "sweep_eps",
                     [](const RunConfig& c) { return sweep_eps(c.plan()); });
  });
  bind("sweep-lambda", "lambda convergence sweep at fixed epsilon", [&] {
    return run_table(args, "sweep_lambda", [](const RunConfig& c) {
      if (!c.epsilon) throw ConfigError("sweep-lambda requires 'epsilon'");
      return sweep_lambda(c.plan(), *c.epsilon);
    });
  });
  bind("sweep-joint", "joint epsilon-lambda sweep", [&] {
    return run_table(args, "sweep_joint",
                     [](const RunConfig& c) { return sweep_joint(c.plan()); });
  });
  bind("gamma-probe", "recovery-sequence gap probe", [&] {
    return run_table(args, "gamma_probe", [](const RunConfig& c) {
      if (!c.u_hat.size()) throw ConfigError("gamma-probe requires 'u_hat'");
      return gamma_liminf_probe(c.plan(), c.u_hat);
    });
  });
  bind("verify-oracle", "closed-form certification table",
       [&] { return run_verify_oracle(args); }, false);

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
