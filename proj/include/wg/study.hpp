#pragma once

// Manufactured-solution solves and mesh-refinement studies, plus their
// CSV / JSON / SVG renderings.

#include <map>
#include <string>
#include <vector>

#include "wg/assembly.hpp"
#include "wg/errors.hpp"
#include "wg/problems.hpp"

namespace wg {

enum class MeshFamily { Squares, SmallEdge };

std::string family_name(MeshFamily f);
MeshFamily parse_family(const std::string& name); // throws std::invalid_argument

Mesh generate_mesh(MeshFamily family, int n, double eps);

struct SolveResult {
  WeakField field;
  std::vector<LocalOperators> ops;
  SolveStats stats;
  ErrorReport errors;
};

/// Assemble, impose u = Q_b g on the boundary, solve, and measure all errors.
SolveResult solve_problem(const Mesh& mesh, int k, const ProblemSpec& problem,
                          SolverMethod method = SolverMethod::Automatic);

struct ConvergenceRow {
  int level = 0;
  int n = 0;
  double h = 0.0;
  std::size_t dofs = 0;
  ErrorReport errors;
  int cg_iters = 0;
};

struct ConvergenceReport {
  std::string problem;
  int k = 1;
  MeshFamily family = MeshFamily::Squares;
  double eps = 0.0;
  std::vector<ConvergenceRow> rows;
  /// Keyed by err_wgrad, err_grad0, err_l2, err_edge; filled once rows >= 3.
  std::map<std::string, RateFit> slopes;
};

/// The four norms reported per level, in CSV column order.
const std::vector<std::string>& norm_names();
double norm_value(const ErrorReport& r, const std::string& name);

struct StudyConfig {
  const ProblemSpec* problem = nullptr;
  int k = 1;
  MeshFamily family = MeshFamily::Squares;
  double eps = 0.25;
  int levels = 4;
  /// Levels use n = base_n * 2^level.
  int base_n = 4;
  SolverMethod method = SolverMethod::ConjugateGradient;
};

/// Runs each level and appends to `report`; a failing level throws with the
/// completed rows already in `report`.
void run_convergence(const StudyConfig& config, ConvergenceReport& report);
ConvergenceReport run_convergence(const StudyConfig& config);

void compute_slopes(ConvergenceReport& report);

std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_json(const ConvergenceReport& report);
/// Log-log plot, SVG 1.1 with an 800x600 viewBox: one polyline per norm and
/// reference slope triangles for k and k+1.
std::string convergence_svg(const ConvergenceReport& report);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace wg
