#ifndef WEDFLOW_CONFIG_HPP_
#define WEDFLOW_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "wedflow/optctl.hpp"
#include "wedflow/sweep.hpp"

namespace wedflow {

/// Parsed and validated run configuration. Holds the control family by
/// value; ControlPoints returned by helpers reference it.
struct RunConfig {
  EnergyPtr energy;
  Vec y0;
  double T = 1.0;
  int N = 100;
  ControlFamily family = ControlFamily::example_exp();
  TargetFunctional target;
  OuterOptions solver;
  std::optional<double> epsilon;
  std::optional<double> lambda;
  std::vector<double> epsilon_list;
  std::vector<double> lambda_list;
  double sigma = 0.5;
  Vec u_hat;
  Vec u_params;  // control evaluation point for gradient-flow / wed-min
  std::string out_dir = ".";

  std::string canonical;  // normalized config text
  std::string hash;       // provenance hash of the canonical text

  TimeGrid grid() const { return TimeGrid(T, N); }
  SweepPlan plan() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// FNV-1a 64-bit, hex encoded.
std::string fnv1a_hex(const std::string& s);

/// Write via temp file + rename so failures never leave partial output.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace wedflow

#endif  // WEDFLOW_CONFIG_HPP_
