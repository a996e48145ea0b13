#include "wedflow/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace wedflow {

using nlohmann::json;

namespace {

void check_known_fields(const json& j, const std::set<std::string>& valid,
                        const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!valid.count(it.key())) {
      std::string fields;
      for (const auto& f : valid) fields += (fields.empty() ? "" : ", ") + f;
      throw ConfigError("unknown field '" + it.key() + "' in " + where +
                        "; valid fields: " + fields);
    }
  }
}

Vec to_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

EnergyPtr parse_energy(const json& j) {
  check_known_fields(j, {"type", "Q", "d", "a", "b"}, "problem.energy");
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    const json& qj = j.at("Q");
    const int n = static_cast<int>(qj.size());
    Mat Q(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) Q(r, c) = qj[r][c].get<double>();
    }
    return make_quadratic(Q);
  }
  if (type == "double_well") return make_double_well(j.value("d", 1));
  if (type == "obstacle") {
    return make_obstacle(j.at("a").get<double>(), j.at("b").get<double>(),
                         j.value("d", 1));
  }
  throw ConfigError("energy.type must be one of quadratic, double_well, obstacle");
}

std::function<double(double)> parse_weight(const json& j, const std::string& where) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (v < 0.0) throw ConfigError(where + " must be nonnegative");
    return [v](double) { return v; };
  }
  check_known_fields(j, {"kind", "value"}, where);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") {
    const double v = j.at("value").get<double>();
    if (v < 0.0) throw ConfigError(where + " must be nonnegative");
    return [v](double) { return v; };
  }
  if (kind == "t_squared") return [](double t) { return t * t; };
  throw ConfigError(where + ".kind must be const or t_squared");
}

std::function<Vec(double)> parse_ref(const json& j, int d, const std::string& where) {
  check_known_fields(j, {"kind", "value", "scale"}, where);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") {
    Vec v = to_vec(j.at("value"), where + ".value");
    if (v.size() != d) throw ConfigError(where + ".value has wrong dimension");
    return [v](double) { return v; };
  }
  if (kind == "exp_decay") {
    Vec s = j.contains("scale") ? to_vec(j.at("scale"), where + ".scale")
                                : Vec(Vec::Ones(d));
    if (s.size() != d) throw ConfigError(where + ".scale has wrong dimension");
    return [s](double t) { return Vec(s * std::exp(-t)); };
  }
  throw ConfigError(where + ".kind must be const or exp_decay");
}

TargetFunctional parse_target(const json& j, int d) {
  if (j.contains("preset")) {
    check_known_fields(j, {"preset"}, "target");
    const std::string p = j.at("preset").get<std::string>();
    if (p == "sec21") return TargetFunctional::sec21();
    if (p == "zero") return TargetFunctional::zero(d);
    throw ConfigError("target.preset must be sec21 or zero");
  }
  check_known_fields(j, {"w_f", "yT_ref", "w_y", "w_u", "y_ref", "u_ref"}, "target");
  TargetFunctional t = TargetFunctional::zero(d);
  t.w_f = j.value("w_f", 0.0);
  if (t.w_f < 0.0) throw ConfigError("target.w_f must be nonnegative");
  if (j.contains("yT_ref")) t.yT_ref = to_vec(j.at("yT_ref"), "target.yT_ref");
  if (j.contains("w_y")) t.w_y = parse_weight(j.at("w_y"), "target.w_y");
  if (j.contains("w_u")) t.w_u = parse_weight(j.at("w_u"), "target.w_u");
  if (j.contains("y_ref")) t.y_ref = parse_ref(j.at("y_ref"), d, "target.y_ref");
  if (j.contains("u_ref")) t.u_ref = parse_ref(j.at("u_ref"), d, "target.u_ref");
  return t;
}

ControlFamily parse_control(const json& j, int d) {
  check_known_fields(j, {"family", "d", "basis", "lower", "upper"}, "control");
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "example_exp") return ControlFamily::example_exp();
  if (fam != "basis_box") {
    throw ConfigError("control.family must be example_exp or basis_box");
  }
  const int cd = j.value("d", d);
  std::vector<std::function<Vec(double)>> basis;
  for (const auto& bj : j.at("basis")) {
    const std::string kind = bj.at("kind").get<std::string>();
    Vec dir = bj.contains("dir") ? to_vec(bj.at("dir"), "control.basis.dir")
                                 : Vec(Vec::Ones(cd));
    if (dir.size() != cd) throw ConfigError("control.basis.dir has wrong dimension");
    if (kind == "const") {
      basis.push_back([dir](double) { return dir; });
    } else if (kind == "exp_decay") {
      basis.push_back([dir](double t) { return Vec(dir * std::exp(-t)); });
    } else if (kind == "linear") {
      basis.push_back([dir](double t) { return Vec(dir * t); });
    } else {
      throw ConfigError("control.basis.kind must be const, exp_decay, or linear");
    }
  }
  return ControlFamily::basis_box(std::move(basis),
                                  to_vec(j.at("lower"), "control.lower"),
                                  to_vec(j.at("upper"), "control.upper"), cd);
}

std::vector<double> parse_list(const json& j, const std::string& what) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  check_known_fields(j,
                     {"problem", "control", "target", "solver", "epsilon", "lambda",
                      "epsilon_list", "lambda_list", "sigma", "u_hat", "u_params",
                      "out"},
                     "config");
  RunConfig cfg;

  const json& pj = j.at("problem");
  check_known_fields(pj, {"energy", "y0", "T", "N"}, "problem");
  cfg.energy = parse_energy(pj.at("energy"));
  cfg.y0 = to_vec(pj.at("y0"), "problem.y0");
  cfg.T = pj.at("T").get<double>();
  if (!(cfg.T > 0.0)) throw ConfigError("problem.T must be positive");
  cfg.N = pj.at("N").get<int>();
  if (cfg.N < 2) throw ConfigError("problem.N must be >= 2 (grid invariant)");
  const int d = static_cast<int>(cfg.y0.size());

  cfg.family = j.contains("control") ? parse_control(j.at("control"), d)
                                     : ControlFamily::example_exp();
  cfg.target = j.contains("target") ? parse_target(j.at("target"), d)
                                    : TargetFunctional::zero(d);

  if (j.contains("solver")) {
    const json& sj = j.at("solver");
    check_known_fields(sj, {"tol", "max_iter", "max_prox_iter", "lattice", "threads"},
                       "solver");
    cfg.solver.inner.tol = sj.value("tol", 1e-10);
    if (!(cfg.solver.inner.tol > 0.0)) throw ConfigError("solver.tol must be positive");
    cfg.solver.inner.max_iter = sj.value("max_iter", 200);
    cfg.solver.inner.max_prox_iter = sj.value("max_prox_iter", 100000);
    cfg.solver.lattice = sj.value("lattice", 11);
    if (cfg.solver.lattice < 2) throw ConfigError("solver.lattice must be >= 2");
    cfg.solver.threads = sj.value("threads", 1);
  }

  if (j.contains("epsilon")) {
    cfg.epsilon = j.at("epsilon").get<double>();
    if (!(*cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  }
  if (j.contains("lambda")) {
    cfg.lambda = j.at("lambda").get<double>();
    if (!(*cfg.lambda > 0.0)) throw ConfigError("lambda must be positive");
  }
  if (j.contains("epsilon_list")) {
    cfg.epsilon_list = parse_list(j.at("epsilon_list"), "epsilon_list");
  }
  if (j.contains("lambda_list")) {
    cfg.lambda_list = parse_list(j.at("lambda_list"), "lambda_list");
  }
  cfg.sigma = j.value("sigma", 0.5);
  if (!(cfg.sigma > 0.0 && cfg.sigma < 1.0)) {
    throw ConfigError("sigma must lie in (0,1)");
  }
  if (j.contains("u_hat")) cfg.u_hat = to_vec(j.at("u_hat"), "u_hat");
  if (j.contains("u_params")) cfg.u_params = to_vec(j.at("u_params"), "u_params");
  cfg.out_dir = j.value("out", ".");

  cfg.canonical = j.dump(2);
  cfg.hash = fnv1a_hex(cfg.canonical);

  // Round-trip invariant: the canonical form must reparse identically.
  if (json::parse(cfg.canonical) != j) {
    throw ConfigError("config failed to round-trip");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

SweepPlan RunConfig::plan() const {
  SweepPlan p;
  p.energy = energy;
  p.y0 = y0;
  p.grid = grid();
  p.J = target;
  p.U = &family;
  p.epsilon_list = epsilon_list;
  p.lambda_list = lambda_list;
  p.sigma = sigma;
  p.outer = solver;
  return p;
}

std::string fnv1a_hex(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !fs::exists(target.parent_path())) {
    throw ConfigError("output directory does not exist: " +
                      target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ConfigError("cannot write: " + tmp.string());
    out << content;
    if (!out.good()) {
      fs::remove(tmp);
      throw ConfigError("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

}  // namespace wedflow
