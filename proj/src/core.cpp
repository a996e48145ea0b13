#include "wedflow/core.hpp"

#include <cmath>
#include <sstream>

namespace wedflow {

TimeGrid::TimeGrid(double T, int N) : T_(T), N_(N) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw ParameterError("TimeGrid: final time T must be positive and finite");
  }
  if (N < 2) {
    throw ParameterError("TimeGrid: number of cells N must be >= 2");
  }
  h_ = T_ / N_;
}

Trajectory::Trajectory(TimeGrid grid, int d)
    : grid_(grid), d_(d), values_(grid.num_nodes(), Vec::Zero(d)) {
  if (d < 1) throw InputError("Trajectory: state dimension must be >= 1");
}

Trajectory::Trajectory(TimeGrid grid, std::vector<Vec> values)
    : grid_(grid), d_(0), values_(std::move(values)) {
  if (values_.size() != static_cast<size_t>(grid_.num_nodes())) {
    throw InputError("Trajectory: expected " + std::to_string(grid_.num_nodes()) +
                     " nodal values, got " + std::to_string(values_.size()));
  }
  d_ = static_cast<int>(values_[0].size());
  for (const auto& v : values_) {
    if (v.size() != d_) throw InputError("Trajectory: inconsistent state dimension");
  }
}

bool Trajectory::all_finite() const {
  for (const auto& v : values_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

Trajectory Trajectory::operator-(const Trajectory& o) const {
  if (grid_ != o.grid_ || d_ != o.d_) throw InputError("Trajectory: grid/dim mismatch");
  std::vector<Vec> out(values_.size());
  for (size_t k = 0; k < values_.size(); ++k) out[k] = values_[k] - o.values_[k];
  return Trajectory(grid_, std::move(out));
}

Trajectory Trajectory::operator+(const Trajectory& o) const {
  if (grid_ != o.grid_ || d_ != o.d_) throw InputError("Trajectory: grid/dim mismatch");
  std::vector<Vec> out(values_.size());
  for (size_t k = 0; k < values_.size(); ++k) out[k] = values_[k] + o.values_[k];
  return Trajectory(grid_, std::move(out));
}

Trajectory Trajectory::scaled(double a) const {
  std::vector<Vec> out(values_.size());
  for (size_t k = 0; k < values_.size(); ++k) out[k] = a * values_[k];
  return Trajectory(grid_, std::move(out));
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (int i = 0; i < d_; ++i) os << ",y_" << i;
  os << "\n";
  for (int k = 0; k <= grid_.N(); ++k) {
    os << grid_.node(k);
    for (int i = 0; i < d_; ++i) os << "," << values_[k][i];
    os << "\n";
  }
  return os.str();
}

Trajectory Trajectory::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InputError("Trajectory csv: empty input");
  int d = 0;
  for (char c : line) {
    if (c == ',') ++d;
  }
  if (d < 1) throw InputError("Trajectory csv: header must be t,y_0,...");
  std::vector<double> times;
  std::vector<Vec> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (static_cast<int>(row.size()) != d + 1) {
      throw InputError("Trajectory csv: row width mismatch");
    }
    times.push_back(row[0]);
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = row[i + 1];
    vals.push_back(v);
  }
  if (times.size() < 3) throw InputError("Trajectory csv: need at least 3 nodes");
  const int N = static_cast<int>(times.size()) - 1;
  TimeGrid grid(times.back(), N);
  return Trajectory(grid, std::move(vals));
}

ControlFamily ControlFamily::example_exp() {
  ControlFamily f;
  f.kind_ = FamilyKind::ExampleExp;
  f.m_ = 1;
  f.d_ = 1;
  f.lower_ = Vec::Zero(1);
  f.upper_ = Vec::Ones(1);
  return f;
}

ControlFamily ControlFamily::basis_box(std::vector<std::function<Vec(double)>> basis,
                                       Vec lower, Vec upper, int d) {
  if (basis.empty()) throw InputError("ControlFamily: empty basis");
  if (lower.size() != upper.size() ||
      lower.size() != static_cast<Eigen::Index>(basis.size())) {
    throw InputError("ControlFamily: bound/basis size mismatch");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) {
      throw InputError("ControlFamily: empty box (lower > upper at index " +
                       std::to_string(i) + ")");
    }
  }
  ControlFamily f;
  f.kind_ = FamilyKind::BasisBox;
  f.m_ = static_cast<int>(basis.size());
  f.d_ = d;
  f.lower_ = std::move(lower);
  f.upper_ = std::move(upper);
  f.basis_ = std::move(basis);
  return f;
}

bool ControlFamily::contains(const Vec& params, double slack) const {
  if (params.size() != m_) return false;
  for (int i = 0; i < m_; ++i) {
    if (params[i] < lower_[i] - slack || params[i] > upper_[i] + slack) return false;
  }
  return true;
}

Vec ControlFamily::clamp(const Vec& params) const {
  Vec p = params;
  for (int i = 0; i < m_; ++i) p[i] = std::min(upper_[i], std::max(lower_[i], p[i]));
  return p;
}

Vec ControlFamily::eval(const Vec& params, double t) const {
  if (params.size() != m_) throw InputError("ControlFamily: wrong parameter count");
  if (kind_ == FamilyKind::ExampleExp) {
    Vec v(1);
    v[0] = params[0] * std::exp(-t);
    return v;
  }
  Vec v = Vec::Zero(d_);
  for (int i = 0; i < m_; ++i) v += params[i] * basis_[i](t);
  return v;
}

namespace {

void require_finite(const Trajectory& y, const char* op) {
  if (!y.all_finite()) {
    throw InputError(std::string(op) + ": trajectory contains non-finite values");
  }
}

}  // namespace

double norm_l2(const Trajectory& y) {
  require_finite(y, "norm_l2");
  const TimeGrid& g = y.grid();
  double s = 0.0;
  for (int k = 0; k <= g.N(); ++k) s += trap_weight(g, k) * y.at(k).squaredNorm();
  return std::sqrt(s);
}

double norm_h1(const Trajectory& y) {
  require_finite(y, "norm_h1");
  const TimeGrid& g = y.grid();
  const double h = g.h();
  double s = 0.0;
  for (int k = 0; k <= g.N(); ++k) s += trap_weight(g, k) * y.at(k).squaredNorm();
  for (int k = 0; k < g.N(); ++k) {
    s += ((y.at(k + 1) - y.at(k)) / h).squaredNorm() * h;
  }
  return std::sqrt(s);
}

double norm_hsigma(const Trajectory& y, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    throw ParameterError("norm_hsigma: sigma must lie in (0,1)");
  }
  require_finite(y, "norm_hsigma");
  const TimeGrid& g = y.grid();
  const double h = g.h();
  double s = 0.0;
  for (int k = 0; k <= g.N(); ++k) s += trap_weight(g, k) * y.at(k).squaredNorm();
  // Gagliardo double sum, diagonal excluded.
  double semi = 0.0;
  for (int j = 0; j <= g.N(); ++j) {
    for (int k = j + 1; k <= g.N(); ++k) {
      const double dt = (k - j) * h;
      semi += (y.at(j) - y.at(k)).squaredNorm() / std::pow(dt, 1.0 + 2.0 * sigma);
    }
  }
  s += 2.0 * h * h * semi;
  return std::sqrt(s);
}

double norm_c0(const Trajectory& y) {
  require_finite(y, "norm_c0");
  double m = 0.0;
  for (int k = 0; k <= y.grid().N(); ++k) {
    m = std::max(m, y.at(k).lpNorm<Eigen::Infinity>());
  }
  return m;
}

Trajectory render_control(const ControlPoint& u, const TimeGrid& grid) {
  if (!u.family->contains(u.params, 1e-12)) {
    throw ConstraintError("render_control: parameters outside the coefficient box");
  }
  std::vector<Vec> vals(grid.num_nodes());
  for (int k = 0; k <= grid.N(); ++k) vals[k] = u.eval(grid.node(k));
  Trajectory out(grid, std::move(vals));
  if (!out.all_finite()) {
    throw ConstraintError("render_control: basis produced non-finite values");
  }
  return out;
}

std::string control_to_text(const ControlPoint& u) {
  std::ostringstream os;
  os.precision(17);
  os << "{family: "
     << (u.family->kind() == FamilyKind::ExampleExp ? "example_exp" : "basis_box")
     << ", params: [";
  for (int i = 0; i < u.params.size(); ++i) {
    if (i) os << ", ";
    os << u.params[i];
  }
  os << "]}";
  return os.str();
}

}  // namespace wedflow
