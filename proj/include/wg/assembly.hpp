#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wg/mesh.hpp"
#include "wg/wgcore.hpp"

namespace wg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Global numbering of V_h: all interior blocks in cell order, then all edge
/// blocks in global edge order.
class DofMap {
public:
  DofMap(const Mesh& mesh, int k);

  int degree() const { return degree_; }
  std::size_t interior_size() const { return static_cast<std::size_t>(poly_dim(degree_)); }
  std::size_t edge_size() const { return static_cast<std::size_t>(degree_) + 1; }
  std::size_t cell_offset(std::size_t cell) const { return cell * interior_size(); }
  std::size_t edge_offset(std::size_t edge) const {
    return num_cells_ * interior_size() + edge * edge_size();
  }
  std::size_t total_dofs() const { return total_; }
  const std::vector<std::size_t>& boundary_edge_dofs() const { return boundary_; }

  /// Global indices of a cell's local DOFs, in LocalDofLayout order.
  std::vector<std::size_t> local_to_global(const Mesh& mesh, std::size_t cell) const;

private:
  int degree_;
  std::size_t num_cells_;
  std::size_t total_;
  std::vector<std::size_t> boundary_;
};

DofMap build_dof_map(const Mesh& mesh, int k);

/// A function in V_h: coefficients over a DofMap on a given mesh.
/// Holds a reference; the mesh must outlive the field.
class WeakField {
public:
  WeakField(const Mesh& mesh, DofMap dofs, Eigen::VectorXd coeffs);

  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dofs() const { return dofs_; }
  int degree() const { return dofs_.degree(); }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  Eigen::VectorXd local(std::size_t cell) const;
  Eigen::VectorXd interior(std::size_t cell) const;
  Eigen::VectorXd edge(std::size_t edge) const;

private:
  const Mesh* mesh_;
  DofMap dofs_;
  Eigen::VectorXd coeffs_;
};

/// Q_h u: interior and edge L2 projections of u.
WeakField project_weak(const Mesh& mesh, const DofMap& dofs, const ScalarField& u,
                       int quad_degree = -1);

struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// a_s(u, v) = sum over cells of the local A + S, and b_i = (f, phi_i) on
/// interior DOFs (zero on edge DOFs).
LinearSystem assemble(const Mesh& mesh, const DofMap& dofs,
                      std::span<const LocalOperators> ops, const ScalarField& f);
LinearSystem assemble(const Mesh& mesh, int k, const ScalarField& f);

struct ReducedSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<std::size_t> free_dofs;
  /// Full-length vector carrying Q_b g on boundary DOFs and zero elsewhere.
  Eigen::VectorXd boundary_values;
};

/// Sets boundary edge DOFs to the edge projection of g and eliminates them.
ReducedSystem apply_dirichlet(const LinearSystem& system, const Mesh& mesh, const DofMap& dofs,
                              const ScalarField& g);

enum class SolverMethod { Automatic, ConjugateGradient, DenseCholesky };

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool direct = false;
};

inline constexpr double kSolverTolerance = 1e-11;
inline constexpr std::size_t kDenseThreshold = 2000;

/// Jacobi-preconditioned CG to relative residual 1e-11 within 20 sqrt(n)
/// iterations. Automatic selects dense Cholesky below 2000 unknowns.
/// Throws SolverError on failure. Returns the full coefficient vector.
Eigen::VectorXd solve(const ReducedSystem& system, SolveStats* stats = nullptr,
                      SolverMethod method = SolverMethod::Automatic);

/// Sparse Cholesky succeeds.
bool is_positive_definite(const SparseMatrix& m);

/// Largest entry of |K - K^T|.
double asymmetry(const SparseMatrix& m);

// Solution file: header `wgfield k=<k> dofs=<n>`, then one coefficient per line.
std::string write_field(const WeakField& field);
Eigen::VectorXd read_field(std::string_view text, int* degree = nullptr);

} // namespace wg
