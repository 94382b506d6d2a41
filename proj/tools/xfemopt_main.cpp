#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "xfemopt/study.hpp"

namespace {

using namespace xfemopt;

StudyConfig load_base_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

struct CliOverrides {
  std::string config_path, case_name, method, levels, crack_bc, out, mesh, like;
  double rs = 0, r0 = 0, r1 = 0, gamma = 0;
  bool plots = false, parallel = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "key=value config file (CLI flags win)");
  cmd->add_option("--case", o.case_name, "example1|example2|example3|example3alt|file");
  cmd->add_option("--method", o.method, "cut|classic|p1");
  cmd->add_option("--rs", o.rs, "enrichment radius (classic XFEM)");
  cmd->add_option("--r0", o.r0, "cut-off inner radius");
  cmd->add_option("--r1", o.r1, "cut-off outer radius");
  cmd->add_option("--gamma", o.gamma, "Nitsche penalty parameter");
  cmd->add_option("--crack-bc", o.crack_bc, "nitsche|penalty|none (embedded crack faces)");
  cmd->add_option("--out", o.out, "output stem for CSV and plot series");
  cmd->add_flag("--plots", o.plots, "emit gnuplot series per norm");
  cmd->add_flag("--parallel", o.parallel, "element-parallel assembly");
  cmd->add_option("--mesh", o.mesh, "mesh file (case=file)");
  cmd->add_option("--like", o.like, "benchmark data for case=file");
}

StudyConfig merge_config(const CLI::App* cmd, const CliOverrides& o) {
  StudyConfig cfg = load_base_config(o.config_path);
  auto set = [&](const char* flag, const std::string& key, const std::string& value) {
    if (cmd->count(flag)) apply_config_override(cfg, key, value);
  };
  set("--case", "case", o.case_name);
  set("--method", "method", o.method);
  set("--levels", "levels", o.levels);
  set("--rs", "rs", std::to_string(o.rs));
  set("--r0", "r0", std::to_string(o.r0));
  set("--r1", "r1", std::to_string(o.r1));
  set("--gamma", "gamma", std::to_string(o.gamma));
  set("--crack-bc", "crack_bc", o.crack_bc);
  set("--out", "out", o.out);
  if (cmd->count("--plots")) cfg.emit_plots = o.plots;
  if (cmd->count("--parallel")) cfg.parallel = o.parallel;
  set("--mesh", "mesh", o.mesh);
  set("--like", "like", o.like);
  return cfg;
}

void print_report(const StudyReport& report) {
  std::printf("case=%s method=%s\n", report.config.case_name.c_str(),
              to_string(report.config.method).c_str());
  std::printf("%6s %12s %12s %12s %12s %12s %7s %6s\n", "level", "e_y_h1", "e_y_l2", "e_p_h1",
              "e_p_l2", "e_u_l2", "dofs", "iters");
  for (const auto& r : report.rows) {
    std::printf("%6d %12.4e %12.4e %12.4e %12.4e %12.4e %7d %6d\n", r.level,
                r.errors.rel_y_h1(), r.errors.rel_y_l2(), r.errors.rel_p_h1(),
                r.errors.rel_p_l2(), r.errors.rel_u_l2(), r.dofs, r.ssn_iters);
    for (const auto& w : r.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
  }
}

int run_mesh_command(const std::string& emit, int n, bool fitted, double h,
                     const std::string& out, const std::string& check) {
  if (!check.empty()) {
    std::ifstream in(check);
    if (!in) throw ConfigError("cannot open mesh file '" + check + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const Mesh m = import_mesh(ss.str());
    std::printf("ok: %d nodes, %d triangles, %zu boundary edges\n", m.num_nodes(),
                m.num_triangles(), m.boundary_edges.size());
    return 0;
  }
  Mesh m;
  if (emit == "crack")
    m = build_structured_crack_mesh(n, fitted);
  else if (emit == "disk")
    m = build_three_quarter_disk_mesh(h);
  else
    throw ConfigError("mesh: expected --emit crack|disk or --check <file>");
  const std::string text = export_mesh(m);
  if (out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write '" + out + "'");
    os << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Box-constrained optimal control of elliptic PDEs on cracked/non-convex "
               "domains via enriched finite elements"};
  app.require_subcommand(1);

  CliOverrides so, co;
  auto* study_cmd = app.add_subcommand("study", "run a refinement study");
  add_common_options(study_cmd, so);
  study_cmd->add_option("--levels", so.levels, "comma-separated refinement levels");

  auto* case_cmd = app.add_subcommand("case", "run a single level");
  add_common_options(case_cmd, co);
  int case_level = 0;
  case_cmd->add_option("--level", case_level, "refinement level (N or 1/h)")->required();

  auto* mesh_cmd = app.add_subcommand("mesh", "emit or check mesh files");
  std::string mesh_emit, mesh_out, mesh_check;
  int mesh_n = 9;
  bool mesh_fitted = false;
  double mesh_h = 0.25;
  mesh_cmd->add_option("--emit", mesh_emit, "crack|disk");
  mesh_cmd->add_option("--n", mesh_n, "crack mesh size N");
  mesh_cmd->add_flag("--fitted", mesh_fitted, "fitted crack mesh (even N)");
  mesh_cmd->add_option("--h", mesh_h, "disk target edge length");
  mesh_cmd->add_option("--out", mesh_out, "output path (stdout if omitted)");
  mesh_cmd->add_option("--check", mesh_check, "import and validate a mesh file");

  try {
    app.parse(argc, argv);
    if (study_cmd->parsed()) {
      const StudyConfig cfg = merge_config(study_cmd, so);
      print_report(run_study(cfg));
      return 0;
    }
    if (case_cmd->parsed()) {
      StudyConfig cfg = merge_config(case_cmd, co);
      cfg.levels = {case_level};
      validate(cfg);
      StudyReport report;
      report.config = cfg;
      report.rows.push_back(run_case(cfg, case_level));
      print_report(report);
      const auto& r = report.rows.back();
      std::printf("nodes=%d free_dofs=%d active(lower/upper/inactive)=%d/%d/%d\n", r.node_count,
                  r.free_dofs, r.n_lower, r.n_upper, r.n_inactive);
      std::printf("timing: mesh %.2fs assemble %.2fs solve %.2fs errors %.2fs\n", r.t_mesh,
                  r.t_assemble, r.t_ssn, r.t_errors);
      if (!cfg.out.empty()) {
        std::ofstream os(cfg.out + ".csv");
        os << report_csv(report);
      }
      return 0;
    }
    if (mesh_cmd->parsed())
      return run_mesh_command(mesh_emit, mesh_n, mesh_fitted, mesh_h, mesh_out, mesh_check);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const xfemopt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
