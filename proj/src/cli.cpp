#include "wg/cli.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "wg/format.hpp"
#include "wg/study.hpp"

namespace wg {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

const ProblemSpec& require_problem(const std::string& name) {
  const ProblemSpec* p = find_problem(name);
  if (!p) {
    std::string known;
    for (const auto& q : builtin_problems())
      known += (known.empty() ? "" : "|") + q.name;
    throw UsageError("unknown problem '" + name + "' (expected " + known + ")");
  }
  return *p;
}

MeshFamily require_family(const std::string& name) {
  try {
    return parse_family(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

SolverMethod require_method(const std::string& name) {
  if (name == "auto")
    return SolverMethod::Automatic;
  if (name == "cg")
    return SolverMethod::ConjugateGradient;
  if (name == "dense")
    return SolverMethod::DenseCholesky;
  throw UsageError("unknown solver '" + name + "' (expected auto|cg|dense)");
}

const CLI::Validator kEpsRange(
    [](std::string& s) -> std::string {
      double v = 0.0;
      try {
        v = std::stod(s);
      } catch (...) {
        return "eps must be a number";
      }
      return (v > 0.0 && v < 0.5) ? std::string() : "eps must lie strictly between 0 and 1/2";
    },
    "EPS in (0, 1/2)");

nlohmann::ordered_json errors_json(const ErrorReport& r) {
  nlohmann::ordered_json j;
  j["h"] = r.h;
  j["err_wgrad"] = r.err_wgrad;
  j["err_grad0"] = r.err_grad0;
  j["err_l2"] = r.err_l2;
  j["err_edge"] = r.err_edge;
  j["weak_norm_eh"] = r.weak_norm_eh;
  return j;
}

struct MeshGenArgs {
  std::string family;
  int n = 0;
  double eps = 0.25;
  std::string out;
};

int cmd_mesh_gen(const MeshGenArgs& a, std::ostream& out) {
  const Mesh mesh = generate_mesh(require_family(a.family), a.n, a.eps);
  write_file_atomic(a.out, write_mesh(mesh));
  const double h = mesh.mesh_size();
  out << "wrote " << a.out << "\n"
      << "cells " << mesh.num_cells() << "\n"
      << "edges " << mesh.num_edges() << " (interior " << mesh.num_interior_edges()
      << ", boundary " << mesh.num_boundary_edges() << ")\n"
      << "h " << format_double(h) << "\n"
      << "min_edge " << format_double(mesh.min_edge_length()) << "\n"
      << "min_edge/h " << format_double(mesh.min_edge_length() / h) << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::string mesh;
  int k = 1;
  std::string problem;
  std::string out;
  std::string solver = "auto";
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const ProblemSpec& problem = require_problem(a.problem);
  const SolverMethod method = require_method(a.solver);
  const Mesh mesh = read_mesh_file(a.mesh);
  const SolveResult res = solve_problem(mesh, a.k, problem, method);

  write_file_atomic(a.out + ".field", write_field(res.field));
  nlohmann::ordered_json j;
  j["problem"] = problem.name;
  j["k"] = a.k;
  j["mesh"] = {{"cells", mesh.num_cells()},
               {"edges", mesh.num_edges()},
               {"h", mesh.mesh_size()},
               {"min_edge", mesh.min_edge_length()}};
  j["dofs"] = res.field.dofs().total_dofs();
  j["solver"] = {{"method", res.stats.direct ? "dense-cholesky" : "cg-jacobi"},
                 {"cg_iters", res.stats.iterations},
                 {"relative_residual", res.stats.relative_residual}};
  j["errors"] = errors_json(res.errors);
  write_file_atomic(a.out + ".json", j.dump(2) + "\n");

  out << "dofs " << res.field.dofs().total_dofs() << "\n"
      << "err_wgrad " << format_double(res.errors.err_wgrad) << "\n"
      << "err_grad0 " << format_double(res.errors.err_grad0) << "\n"
      << "err_l2 " << format_double(res.errors.err_l2) << "\n"
      << "err_edge " << format_double(res.errors.err_edge) << "\n";
  return kExitOk;
}

struct ConvergenceArgs {
  std::string family;
  int levels = 4;
  int k = 1;
  double eps = 0.25;
  std::string problem;
  std::string out;
  int base_n = 4;
};

void print_report(const ConvergenceReport& report, std::ostream& out) {
  out << convergence_csv(report);
  for (const std::string& name : norm_names()) {
    auto it = report.slopes.find(name);
    if (it == report.slopes.end())
      continue;
    out << "slope " << name << " "
        << (it->second.exact ? std::string("exact") : format_double(it->second.slope)) << "\n";
  }
}

int cmd_convergence(const ConvergenceArgs& a, std::ostream& out, std::ostream& err) {
  StudyConfig cfg;
  cfg.problem = &require_problem(a.problem);
  cfg.family = require_family(a.family);
  cfg.k = a.k;
  cfg.eps = a.eps;
  cfg.levels = a.levels;
  cfg.base_n = a.base_n;

  ConvergenceReport report;
  try {
    run_convergence(cfg, report);
  } catch (...) {
    write_file_atomic(a.out + ".csv", convergence_csv(report));
    err << "level " << report.rows.size() << " failed; partial results in " << a.out
        << ".csv\n";
    throw;
  }
  write_file_atomic(a.out + ".csv", convergence_csv(report));
  write_file_atomic(a.out + ".json", convergence_json(report));
  write_file_atomic(a.out + ".svg", convergence_svg(report));
  print_report(report, out);
  return kExitOk;
}

struct RobustnessArgs {
  std::vector<double> eps{0.25, 1e-3, 1e-6, 1e-8};
  int levels = 4;
  int k = 1;
  std::string problem = "sinsin";
  std::string out;
};

int cmd_robustness(const RobustnessArgs& a, std::ostream& out) {
  for (double e : a.eps)
    if (!(e > 0.0 && e < 0.5))
      throw UsageError("eps must lie strictly between 0 and 1/2");
  StudyConfig cfg;
  cfg.problem = &require_problem(a.problem);
  cfg.family = MeshFamily::SmallEdge;
  cfg.k = a.k;
  cfg.levels = a.levels;

  std::vector<ConvergenceReport> reports;
  for (double e : a.eps) {
    cfg.eps = e;
    reports.push_back(run_convergence(cfg));
  }

  const ConvergenceReport& base = reports.front();
  std::string csv = "eps,level,h,dofs,err_wgrad,err_grad0,err_l2,err_edge,cg_iters\n";
  nlohmann::ordered_json j;
  j["problem"] = cfg.problem->name;
  j["k"] = cfg.k;
  j["baseline_eps"] = a.eps.front();
  j["runs"] = nlohmann::ordered_json::array();
  out << "eps,max_slope_shift,max_iter_ratio\n";
  for (const ConvergenceReport& r : reports) {
    for (const ConvergenceRow& row : r.rows)
      csv += format_double(r.eps) + "," + std::to_string(row.level) + "," + format_double(row.h) +
             "," + std::to_string(row.dofs) + "," + format_double(row.errors.err_wgrad) + "," +
             format_double(row.errors.err_grad0) + "," + format_double(row.errors.err_l2) + "," +
             format_double(row.errors.err_edge) + "," + std::to_string(row.cg_iters) + "\n";
    double shift = 0.0;
    for (const auto& [name, fit] : r.slopes)
      shift = std::max(shift, std::abs(fit.slope - base.slopes.at(name).slope));
    double ratio = 0.0;
    for (std::size_t i = 0; i < r.rows.size(); ++i)
      if (base.rows[i].cg_iters > 0)
        ratio = std::max(ratio,
                         double(r.rows[i].cg_iters) / double(base.rows[i].cg_iters));
    nlohmann::ordered_json run;
    run["eps"] = r.eps;
    nlohmann::ordered_json slopes;
    for (const std::string& name : norm_names())
      if (auto it = r.slopes.find(name); it != r.slopes.end())
        slopes[name] = it->second.slope;
    run["slopes"] = slopes;
    run["max_slope_shift"] = shift;
    run["max_iter_ratio"] = ratio;
    j["runs"].push_back(run);
    out << format_double(r.eps) << "," << format_double(shift) << "," << format_double(ratio)
        << "\n";
  }
  write_file_atomic(a.out + ".csv", csv);
  write_file_atomic(a.out + ".json", j.dump(2) + "\n");
  return kExitOk;
}

const char* exit_label(int code) {
  switch (code) {
  case kExitUsage:
    return "usage error";
  case kExitValidation:
    return "invalid input";
  case kExitSolver:
    return "solver error";
  default:
    return "error";
  }
}

} // namespace

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::invalid_argument&) {
    return kExitUsage;
  } catch (const ParseError&) {
    return kExitValidation;
  } catch (const ValidationError&) {
    return kExitValidation;
  } catch (const GeometryError&) {
    return kExitValidation;
  } catch (const SolverError&) {
    return kExitSolver;
  } catch (...) {
    return kExitFailure;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak Galerkin Poisson solver on polygonal meshes", "wg"};
  app.require_subcommand(1);

  MeshGenArgs mesh_args;
  auto* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* gen = mesh_cmd->add_subcommand("gen", "Generate a mesh family member");
  gen->add_option("--family", mesh_args.family, "squares | small-edge")->required();
  gen->add_option("--n", mesh_args.n, "subdivisions per side")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--eps", mesh_args.eps, "relative length of the short edges")
      ->check(kEpsRange);
  gen->add_option("--out", mesh_args.out, "output mesh file")->required();

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a built-in problem on a mesh file");
  solve_cmd->add_option("--mesh", solve_args.mesh, "mesh file")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--k", solve_args.k, "polynomial degree")
      ->required()
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--problem", solve_args.problem, "problem name")->required();
  solve_cmd->add_option("--out", solve_args.out, "output prefix")->required();
  solve_cmd->add_option("--solver", solve_args.solver, "auto | cg | dense");

  ConvergenceArgs conv_args;
  auto* conv_cmd = app.add_subcommand("convergence", "Mesh-refinement study");
  conv_cmd->add_option("--family", conv_args.family, "squares | small-edge")->required();
  conv_cmd->add_option("--levels", conv_args.levels, "number of refinement levels")
      ->required()
      ->check(CLI::PositiveNumber);
  conv_cmd->add_option("--k", conv_args.k, "polynomial degree")
      ->required()
      ->check(CLI::PositiveNumber);
  conv_cmd->add_option("--eps", conv_args.eps, "small-edge parameter")->check(kEpsRange);
  conv_cmd->add_option("--problem", conv_args.problem, "problem name")->required();
  conv_cmd->add_option("--out", conv_args.out, "output prefix")->required();
  conv_cmd->add_option("--base-n", conv_args.base_n, "subdivisions on the coarsest level")
      ->check(CLI::PositiveNumber);

  RobustnessArgs rob_args;
  auto* rob_cmd = app.add_subcommand("robustness", "Small-edge sweep over eps");
  rob_cmd->add_option("--eps-list", rob_args.eps, "eps values; the first is the baseline")
      ->delimiter(',');
  rob_cmd->add_option("--levels", rob_args.levels, "number of refinement levels")
      ->check(CLI::PositiveNumber);
  rob_cmd->add_option("--k", rob_args.k, "polynomial degree")->check(CLI::PositiveNumber);
  rob_cmd->add_option("--problem", rob_args.problem, "problem name");
  rob_cmd->add_option("--out", rob_args.out, "output prefix")->required();

  std::vector<const char*> argv{"wg"};
  for (const std::string& a : args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed())
      return cmd_mesh_gen(mesh_args, out);
    if (solve_cmd->parsed())
      return cmd_solve(solve_args, out);
    if (conv_cmd->parsed())
      return cmd_convergence(conv_args, out, err);
    if (rob_cmd->parsed())
      return cmd_robustness(rob_args, out);
  } catch (const std::exception& e) {
    const int code = exit_code_for(std::current_exception());
    err << exit_label(code) << ": " << e.what() << "\n";
    return code;
  }
  return kExitUsage;
}

} // namespace wg
