#include "xfemopt/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xfemopt {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Method method_from_string(const std::string& s) {
  if (s == "cut") return Method::cut_xfem;
  if (s == "classic") return Method::classic_xfem;
  if (s == "p1") return Method::p1_plain;
  throw ConfigError("method: unknown value '" + s + "' (expected cut|classic|p1)");
}

std::string crack_bc_to_string(CrackFaceBC bc) {
  switch (bc) {
    case CrackFaceBC::nitsche: return "nitsche";
    case CrackFaceBC::penalty_only: return "penalty";
    case CrackFaceBC::none: return "none";
  }
  return "nitsche";
}

CrackFaceBC crack_bc_from_string(const std::string& s) {
  if (s == "nitsche") return CrackFaceBC::nitsche;
  if (s == "penalty") return CrackFaceBC::penalty_only;
  if (s == "none") return CrackFaceBC::none;
  throw ConfigError("crack_bc: unknown value '" + s + "' (expected nitsche|penalty|none)");
}

bool is_disk_case(const std::string& case_name, const std::string& like) {
  const std::string effective = case_name == "file" ? like : case_name;
  const auto c = benchmark_case_from_string(effective);
  if (!c)
    throw ConfigError("case: unknown value '" + effective +
                      "' (valid: example1, example2, example3, example3alt, file)");
  return *c == BenchmarkCase::example3 || *c == BenchmarkCase::example3alt;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

std::string print_config(const StudyConfig& c) {
  std::ostringstream os;
  os << "case=" << c.case_name << "\n";
  os << "method=" << to_string(c.method) << "\n";
  os << "levels=";
  for (size_t i = 0; i < c.levels.size(); ++i) os << (i ? "," : "") << c.levels[i];
  os << "\n";
  os << "rs=" << format_double(c.r_s) << "\n";
  os << "r0=" << format_double(c.r0) << "\n";
  os << "r1=" << format_double(c.r1) << "\n";
  os << "gamma=" << format_double(c.gamma) << "\n";
  os << "crack_bc=" << crack_bc_to_string(c.crack_bc) << "\n";
  os << "out=" << c.out << "\n";
  os << "plots=" << (c.emit_plots ? 1 : 0) << "\n";
  os << "parallel=" << (c.parallel ? 1 : 0) << "\n";
  os << "mesh=" << c.mesh_file << "\n";
  os << "like=" << c.like << "\n";
  return os.str();
}

void apply_config_override(StudyConfig& c, const std::string& key, const std::string& value) {
  try {
    if (key == "case") c.case_name = value;
    else if (key == "method") c.method = method_from_string(value);
    else if (key == "levels") {
      c.levels.clear();
      std::istringstream ls(value);
      std::string item;
      while (std::getline(ls, item, ','))
        if (!item.empty()) c.levels.push_back(std::stoi(item));
    } else if (key == "rs") c.r_s = std::stod(value);
    else if (key == "r0") c.r0 = std::stod(value);
    else if (key == "r1") c.r1 = std::stod(value);
    else if (key == "gamma") c.gamma = std::stod(value);
    else if (key == "crack_bc") c.crack_bc = crack_bc_from_string(value);
    else if (key == "out") c.out = value;
    else if (key == "plots") c.emit_plots = value == "1" || value == "true";
    else if (key == "parallel") c.parallel = value == "1" || value == "true";
    else if (key == "mesh") c.mesh_file = value;
    else if (key == "like") c.like = value;
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError(key + ": cannot parse value '" + value + "'");
  }
}

StudyConfig parse_config(const std::string& text) {
  StudyConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_config_override(c, line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

void validate(const StudyConfig& c) {
  const bool disk = is_disk_case(c.case_name, c.like);
  if (c.case_name == "file" && c.mesh_file.empty())
    throw ConfigError("mesh: required for case=file");
  if (c.levels.empty() && c.case_name != "file") throw ConfigError("levels: must be non-empty");
  for (size_t i = 0; i + 1 < c.levels.size(); ++i)
    if (c.levels[i] >= c.levels[i + 1])
      throw ConfigError("levels: must be strictly increasing in refinement");
  for (int lvl : c.levels)
    if (lvl <= 0) throw ConfigError("levels: must be positive");
  if (!disk && c.case_name != "file") {
    for (int lvl : c.levels) {
      if (c.method == Method::p1_plain && lvl % 2 != 0)
        throw ConfigError("levels: p1 on crack cases runs on fitted meshes (even N), got " +
                          std::to_string(lvl));
      if (c.method != Method::p1_plain && lvl % 2 == 0)
        throw ConfigError("levels: XFEM on crack cases runs on unfitted meshes (odd N), got " +
                          std::to_string(lvl));
    }
  }
  if (!(c.r_s > 0.0)) throw ConfigError("rs: must be positive");
  if (!(c.r0 > 0.0 && c.r0 < c.r1)) throw ConfigError("r0/r1: need 0 < r0 < r1");
}

CaseReport run_case(const StudyConfig& config, int level) {
  validate(config);
  const std::string effective = config.case_name == "file" ? config.like : config.case_name;
  const Benchmark bench = builtin_benchmark(*benchmark_case_from_string(effective));

  CaseReport rep;
  rep.level = level;

  EnrichmentConfig ec;
  ec.method = config.method;
  ec.r_s = config.r_s;
  ec.cutoff = {config.r0, config.r1};

  double t0 = now_seconds();
  Mesh mesh;
  if (config.case_name == "file") {
    std::ifstream in(config.mesh_file);
    if (!in) throw ConfigError("mesh: cannot open '" + config.mesh_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    mesh = import_mesh(ss.str());
  } else if (bench.crack_domain) {
    mesh = build_structured_crack_mesh(level, config.method == Method::p1_plain);
  } else {
    mesh = build_three_quarter_disk_mesh(1.0 / level);
  }
  rep.t_mesh = now_seconds() - t0;
  rep.node_count = mesh.num_nodes();
  rep.h_key = bench.crack_domain ? 2.0 / level : 1.0 / std::sqrt(double(mesh.num_nodes()));

  AssemblyOptions options;
  options.crack_bc = config.crack_bc;
  options.nitsche_gamma = config.gamma;
  options.parallel = config.parallel;

  t0 = now_seconds();
  AssembledSystem sys = assemble_system(mesh, bench.problem(ec), options);
  rep.t_assemble = now_seconds() - t0;
  rep.dofs = sys.dofmap.size();
  rep.free_dofs = sys.dofmap.num_free();
  rep.warnings = sys.warnings;

  t0 = now_seconds();
  Solution sol = ssn_solve(sys);
  rep.t_ssn = now_seconds() - t0;
  rep.ssn_iters = sol.iterations;
  rep.converged = sol.converged;
  rep.n_inactive = sol.count(PointLabel::inactive);
  rep.n_lower = sol.count(PointLabel::lower);
  rep.n_upper = sol.count(PointLabel::upper);
  rep.warnings.insert(rep.warnings.end(), sol.warnings.begin(), sol.warnings.end());
  if (!sol.converged)
    throw ControlError("active-set iteration failed at level " + std::to_string(level));

  t0 = now_seconds();
  rep.errors = error_norms(mesh, sys.dofmap, sys.geom, sys.config, sol.Y, sol.P, sys.alpha,
                           sys.bounds, bench.exact, options);
  rep.t_errors = now_seconds() - t0;
  return rep;
}

namespace {

void append_row(std::ostringstream& os, const CaseReport& row, const CaseReport* prev) {
  char buf[64];
  auto err = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  auto ord = [&](double e_prev, double e_now) -> std::string {
    if (!prev) return "";
    const auto o = estimate_order(e_prev, e_now, prev->h_key, row.h_key);
    if (!o) return "";
    std::snprintf(buf, sizeof buf, "%.3f", *o);
    return buf;
  };
  const ErrorNorms& e = row.errors;
  const ErrorNorms* pe = prev ? &prev->errors : nullptr;
  os << row.level << ',' << err(e.rel_y_h1()) << ',' << (pe ? ord(pe->rel_y_h1(), e.rel_y_h1()) : "")
     << ',' << err(e.rel_y_l2()) << ',' << (pe ? ord(pe->rel_y_l2(), e.rel_y_l2()) : "") << ','
     << err(e.rel_p_h1()) << ',' << (pe ? ord(pe->rel_p_h1(), e.rel_p_h1()) : "") << ','
     << err(e.rel_p_l2()) << ',' << (pe ? ord(pe->rel_p_l2(), e.rel_p_l2()) : "") << ','
     << err(e.rel_u_l2()) << ',' << (pe ? ord(pe->rel_u_l2(), e.rel_u_l2()) : "") << ','
     << row.dofs << ',' << row.ssn_iters << '\n';
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace

std::string report_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "level,e_y_h1,ord_y_h1,e_y_l2,ord_y_l2,e_p_h1,ord_p_h1,e_p_l2,ord_p_l2,"
        "e_u_l2,ord_u_l2,dofs,ssn_iters\n";
  for (size_t i = 0; i < report.rows.size(); ++i)
    append_row(os, report.rows[i], i ? &report.rows[i - 1] : nullptr);
  return os.str();
}

StudyReport run_study(const StudyConfig& config) {
  validate(config);
  StudyReport report;
  report.config = config;
  std::vector<int> levels = config.levels;
  if (config.case_name == "file" && levels.empty()) levels = {0};
  for (int level : levels) {
    try {
      report.rows.push_back(run_case(config, level));
    } catch (const std::exception& e) {
      if (!config.out.empty()) {
        std::string csv = report_csv(report);
        csv += "# aborted at level " + std::to_string(level) + ": " + e.what() + "\n";
        write_file(config.out + ".csv", csv);
      }
      throw;
    }
  }
  if (!config.out.empty()) {
    write_file(config.out + ".csv", report_csv(report));
    if (config.emit_plots) emit_plot_series(report, config.out);
  }
  return report;
}

std::vector<std::string> emit_plot_series(const StudyReport& report, const std::string& stem) {
  std::vector<std::string> written;
  if (report.rows.empty()) {
    std::fprintf(stderr, "warning: empty report, no plot series written\n");
    return written;
  }
  const bool disk = is_disk_case(report.config.case_name, report.config.like);
  const std::pair<std::string, double ErrorNorms::*> norms_abs[5] = {
      {"y_h1", &ErrorNorms::y_h1},
      {"y_l2", &ErrorNorms::y_l2},
      {"p_h1", &ErrorNorms::p_h1},
      {"p_l2", &ErrorNorms::p_l2},
      {"u_l2", &ErrorNorms::u_l2},
  };
  const double ErrorNorms::*norms_ref[5] = {&ErrorNorms::ny_h1, &ErrorNorms::ny_l2,
                                            &ErrorNorms::np_h1, &ErrorNorms::np_l2,
                                            &ErrorNorms::nu_l2};
  for (int n = 0; n < 5; ++n) {
    std::ostringstream os;
    char buf[80];
    for (const auto& row : report.rows) {
      const double x = disk ? double(row.node_count) : row.h_key;
      const double rel = row.errors.*(norms_abs[n].second) / (row.errors.*(norms_ref[n]));
      std::snprintf(buf, sizeof buf, "%.10e %.10e\n", x, rel);
      os << buf;
    }
    const std::string path = stem + "_" + norms_abs[n].first + ".dat";
    write_file(path, os.str());
    written.push_back(path);
  }
  return written;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& err) {
  const size_t n = std::min(x.size(), err.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace xfemopt
