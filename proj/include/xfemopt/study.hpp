#ifndef XFEMOPT_STUDY_HPP
#define XFEMOPT_STUDY_HPP

#include <string>
#include <vector>

#include "xfemopt/analysis.hpp"

namespace xfemopt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One refinement study: a benchmark case discretized by one method over a
/// list of levels (N for the crack square, 1/h for the disk).
struct StudyConfig {
  std::string case_name = "example1";  // example1|example2|example3|example3alt|file
  Method method = Method::cut_xfem;
  std::vector<int> levels;
  double r_s = 0.5;
  double r0 = 0.01;
  double r1 = 0.99;
  double gamma = 100.0;
  CrackFaceBC crack_bc = CrackFaceBC::nitsche;
  std::string out;  // output stem for CSV/plots; empty keeps results in memory
  bool emit_plots = false;
  bool parallel = false;
  std::string mesh_file;           // case "file": mesh to import
  std::string like = "example1";   // case "file": benchmark data to reuse

  bool operator==(const StudyConfig&) const = default;
};

/// Canonical key=value form; parse(print(c)) == c.
std::string print_config(const StudyConfig& config);
StudyConfig parse_config(const std::string& text);
void apply_config_override(StudyConfig& config, const std::string& key, const std::string& value);

void validate(const StudyConfig& config);

struct CaseReport {
  int level = 0;
  double h_key = 0.0;  // h for crack cases, ND^(-1/2) for the disk
  int node_count = 0;
  int dofs = 0;
  int free_dofs = 0;
  int ssn_iters = 0;
  bool converged = false;
  int n_inactive = 0, n_lower = 0, n_upper = 0;
  ErrorNorms errors;
  double t_mesh = 0, t_assemble = 0, t_ssn = 0, t_errors = 0;  // seconds
  std::vector<std::string> warnings;
};

struct StudyReport {
  StudyConfig config;
  std::vector<CaseReport> rows;
};

CaseReport run_case(const StudyConfig& config, int level);

/// Runs all levels in order. A level failure writes the partial CSV (when an
/// output stem is set) with an abort marker, then rethrows.
StudyReport run_study(const StudyConfig& config);

/// Fixed column layout:
/// level,e_y_h1,ord_y_h1,e_y_l2,ord_y_l2,e_p_h1,ord_p_h1,e_p_l2,ord_p_l2,
/// e_u_l2,ord_u_l2,dofs,ssn_iters
std::string report_csv(const StudyReport& report);

/// One two-column gnuplot series per norm: <stem>_<norm>.dat with h (or node
/// count for the disk) against the relative error. Returns written paths.
std::vector<std::string> emit_plot_series(const StudyReport& report, const std::string& stem);

/// Least-squares slope of log(err) against log(x); used to summarize plots.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& err);

}  // namespace xfemopt

#endif
