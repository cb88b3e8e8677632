#include "wg/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "wg/format.hpp"

namespace wg {

std::string family_name(MeshFamily f) {
  return f == MeshFamily::Squares ? "squares" : "small-edge";
}

MeshFamily parse_family(const std::string& name) {
  if (name == "squares")
    return MeshFamily::Squares;
  if (name == "small-edge")
    return MeshFamily::SmallEdge;
  throw std::invalid_argument("unknown mesh family '" + name + "' (expected squares|small-edge)");
}

Mesh generate_mesh(MeshFamily family, int n, double eps) {
  return family == MeshFamily::Squares ? gen_uniform_squares(n) : gen_small_edge_family(n, eps);
}

SolveResult solve_problem(const Mesh& mesh, int k, const ProblemSpec& problem,
                          SolverMethod method) {
  DofMap dofs(mesh, k);
  std::vector<LocalOperators> ops = local_operators(mesh, k);
  const LinearSystem sys = assemble(mesh, dofs, ops, problem.f);
  const ReducedSystem red = apply_dirichlet(sys, mesh, dofs, problem.g);
  SolveStats stats;
  Eigen::VectorXd coeffs = solve(red, &stats, method);
  WeakField field(mesh, std::move(dofs), std::move(coeffs));
  ErrorReport errors = compute_errors(problem.u, problem.grad, field, ops);
  return SolveResult{std::move(field), std::move(ops), stats, errors};
}

const std::vector<std::string>& norm_names() {
  static const std::vector<std::string> names{"err_wgrad", "err_grad0", "err_l2", "err_edge"};
  return names;
}

double norm_value(const ErrorReport& r, const std::string& name) {
  if (name == "err_wgrad")
    return r.err_wgrad;
  if (name == "err_grad0")
    return r.err_grad0;
  if (name == "err_l2")
    return r.err_l2;
  if (name == "err_edge")
    return r.err_edge;
  throw std::invalid_argument("unknown norm '" + name + "'");
}

void compute_slopes(ConvergenceReport& report) {
  report.slopes.clear();
  if (report.rows.size() < 3)
    return;
  for (const std::string& name : norm_names()) {
    std::vector<std::pair<double, double>> levels;
    for (const ConvergenceRow& row : report.rows)
      levels.emplace_back(row.h, norm_value(row.errors, name));
    report.slopes[name] = fit_rates(levels);
  }
}

void run_convergence(const StudyConfig& config, ConvergenceReport& report) {
  if (!config.problem)
    throw std::invalid_argument("run_convergence: no problem given");
  if (config.levels < 1)
    throw std::invalid_argument("run_convergence: need at least one level");
  report.problem = config.problem->name;
  report.k = config.k;
  report.family = config.family;
  report.eps = config.eps;
  report.rows.clear();
  report.slopes.clear();
  for (int level = 0; level < config.levels; ++level) {
    const int n = config.base_n << level;
    const Mesh mesh = generate_mesh(config.family, n, config.eps);
    const SolveResult res = solve_problem(mesh, config.k, *config.problem, config.method);
    ConvergenceRow row;
    row.level = level;
    row.n = n;
    row.h = mesh.mesh_size();
    row.dofs = res.field.dofs().total_dofs();
    row.errors = res.errors;
    row.cg_iters = res.stats.iterations;
    report.rows.push_back(row);
  }
  compute_slopes(report);
}

ConvergenceReport run_convergence(const StudyConfig& config) {
  ConvergenceReport report;
  run_convergence(config, report);
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::string out = "level,h,dofs,err_wgrad,err_grad0,err_l2,err_edge,cg_iters\n";
  for (const ConvergenceRow& r : report.rows) {
    out += std::to_string(r.level) + "," + format_double(r.h) + "," + std::to_string(r.dofs) +
           "," + format_double(r.errors.err_wgrad) + "," + format_double(r.errors.err_grad0) +
           "," + format_double(r.errors.err_l2) + "," + format_double(r.errors.err_edge) + "," +
           std::to_string(r.cg_iters) + "\n";
  }
  return out;
}

std::string convergence_json(const ConvergenceReport& report) {
  nlohmann::ordered_json j;
  j["problem"] = report.problem;
  j["k"] = report.k;
  j["family"] = family_name(report.family);
  if (report.family == MeshFamily::SmallEdge)
    j["eps"] = report.eps;
  j["rows"] = nlohmann::ordered_json::array();
  for (const ConvergenceRow& r : report.rows) {
    nlohmann::ordered_json row;
    row["level"] = r.level;
    row["n"] = r.n;
    row["h"] = r.h;
    row["dofs"] = r.dofs;
    row["err_wgrad"] = r.errors.err_wgrad;
    row["err_grad0"] = r.errors.err_grad0;
    row["err_l2"] = r.errors.err_l2;
    row["err_edge"] = r.errors.err_edge;
    row["weak_norm_eh"] = r.errors.weak_norm_eh;
    row["cg_iters"] = r.cg_iters;
    j["rows"].push_back(row);
  }
  nlohmann::ordered_json slopes = nlohmann::ordered_json::object();
  for (const std::string& name : norm_names()) {
    auto it = report.slopes.find(name);
    if (it == report.slopes.end())
      continue;
    nlohmann::ordered_json s;
    if (it->second.exact) {
      s["slope"] = "exact";
    } else {
      s["slope"] = it->second.slope;
      s["pairwise"] = it->second.pairwise;
    }
    slopes[name] = s;
  }
  j["slopes"] = slopes;
  return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct LogAxis {
  double lo = 0.0, hi = 1.0;
  double pixel_lo = 0.0, pixel_hi = 1.0;
  double map(double v) const {
    return pixel_lo + (std::log10(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

void fit_axis(LogAxis& axis, double vmin, double vmax) {
  axis.lo = std::floor(std::log10(vmin));
  axis.hi = std::ceil(std::log10(vmax));
  if (axis.hi <= axis.lo)
    axis.hi = axis.lo + 1.0;
}

} // namespace

std::string convergence_svg(const ConvergenceReport& report) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  const double left = 90, right = 620, top = 50, bottom = 530;

  struct Triangle {
    int order;
    double h_coarse, h_fine, e_base;
  };
  std::vector<Triangle> triangles;
  double hmin = INFINITY, hmax = 0.0, emin = INFINITY, emax = 0.0;
  for (const ConvergenceRow& r : report.rows) {
    hmin = std::min(hmin, r.h);
    hmax = std::max(hmax, r.h);
    for (const std::string& name : norm_names()) {
      const double e = norm_value(r.errors, name);
      if (e > 0.0) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
      }
    }
  }
  if (report.rows.size() >= 2 && emax > 0.0) {
    const ConvergenceRow& fine = report.rows.back();
    const ConvergenceRow& coarse = report.rows[report.rows.size() - 2];
    const std::pair<int, const char*> refs[] = {{report.k, "err_wgrad"},
                                                {report.k + 1, "err_l2"}};
    for (const auto& [order, anchor] : refs) {
      const double e = norm_value(fine.errors, anchor);
      if (!(e > 0.0))
        continue;
      Triangle t{order, coarse.h, fine.h, 0.5 * e};
      triangles.push_back(t);
      emin = std::min(emin, t.e_base);
      emax = std::max(emax, t.e_base * std::pow(t.h_coarse / t.h_fine, order));
    }
  }

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">" +
       report.problem + ", k=" + std::to_string(report.k) + ", " + family_name(report.family) +
       "</text>\n";
  if (hmax <= 0.0 || emax <= 0.0) {
    s += "</svg>\n";
    return s;
  }

  LogAxis xa, ya;
  fit_axis(xa, hmin, hmax);
  fit_axis(ya, emin, emax);
  xa.pixel_lo = left;
  xa.pixel_hi = right;
  ya.pixel_lo = bottom;
  ya.pixel_hi = top;

  s += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(right - left) +
       "\" height=\"" + fixed(bottom - top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = xa.lo; d <= xa.hi + 1e-9; d += 1.0) {
    const double x = xa.map(std::pow(10.0, d));
    s += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(bottom) + "\" x2=\"" + fixed(x) +
         "\" y2=\"" + fixed(bottom + 6) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(bottom + 22) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" +
         std::to_string(static_cast<int>(d)) + "</text>\n";
  }
  for (double d = ya.lo; d <= ya.hi + 1e-9; d += 1.0) {
    const double y = ya.map(std::pow(10.0, d));
    s += "<line x1=\"" + fixed(left - 6) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) +
         "\" y2=\"" + fixed(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(left - 10) + "\" y=\"" + fixed(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" +
         std::to_string(static_cast<int>(d)) + "</text>\n";
  }
  s += "<text x=\"" + fixed(0.5 * (left + right)) + "\" y=\"" + fixed(bottom + 45) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">h</text>\n";
  s += "<text x=\"25\" y=\"" + fixed(0.5 * (top + bottom)) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
       "transform=\"rotate(-90 25 " +
       fixed(0.5 * (top + bottom)) + ")\">error</text>\n";

  const auto& names = norm_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string pts;
    for (const ConvergenceRow& r : report.rows) {
      const double e = norm_value(r.errors, names[i]);
      if (!(e > 0.0))
        continue;
      if (!pts.empty())
        pts += " ";
      pts += fixed(xa.map(r.h)) + "," + fixed(ya.map(e));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colors[i]) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = top + 20 + 22.0 * static_cast<double>(i);
    s += "<line x1=\"640\" y1=\"" + fixed(ly) + "\" x2=\"670\" y2=\"" + fixed(ly) +
         "\" stroke=\"" + colors[i] + "\" stroke-width=\"2\"/>\n";
    std::string label = names[i];
    if (auto it = report.slopes.find(names[i]); it != report.slopes.end() && !it->second.exact)
      label += " (" + fixed(it->second.slope) + ")";
    s += "<text x=\"678\" y=\"" + fixed(ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + label + "</text>\n";
  }

  for (const Triangle& t : triangles) {
    const double xf = xa.map(t.h_fine), xc = xa.map(t.h_coarse);
    const double yb = ya.map(t.e_base);
    const double yt = ya.map(t.e_base * std::pow(t.h_coarse / t.h_fine, t.order));
    s += "<polygon fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 3\" points=\"" + fixed(xf) +
         "," + fixed(yb) + " " + fixed(xc) + "," + fixed(yb) + " " + fixed(xc) + "," + fixed(yt) +
         "\"/>\n";
    s += "<text x=\"" + fixed(xc - 6) + "\" y=\"" + fixed(0.5 * (yb + yt) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"gray\">" +
         std::to_string(t.order) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush())
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, target);
}

} // namespace wg
