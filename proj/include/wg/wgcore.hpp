#pragma once

// Local weak Galerkin operators: L2 projections onto cell and edge
// polynomials, the discrete weak gradient into [P_{k-1}(D)]^2, and the
// per-cell stiffness and stabilization matrices.
//
// A local DOF vector on cell D is laid out as
//   [ v0 (dim P_k(D)) | vb on side 0 (k+1) | vb on side 1 (k+1) | ... ]
// with sides in the cell's CCW order starting at its first vertex. Each edge
// block is expressed in the EdgeBasis of the global edge, so both neighbours
// of an interior edge address the same coefficients.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "wg/mesh.hpp"
#include "wg/polybasis.hpp"

namespace wg {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

/// Quadrature exactness used when building operators and load vectors.
constexpr int assembly_quadrature_degree(int k) { return 2 * k + 2; }
/// Quadrature exactness used when measuring errors against smooth fields.
constexpr int error_quadrature_degree(int k) { return 2 * k + 4; }

struct LocalDofLayout {
  std::size_t cell = 0;
  int degree = 1;
  int interior = 0;
  std::vector<std::size_t> edges;
  std::vector<bool> aligned;

  int edge_size() const { return degree + 1; }
  int edge_offset(std::size_t side) const {
    return interior + static_cast<int>(side) * edge_size();
  }
  int total() const { return interior + static_cast<int>(edges.size()) * edge_size(); }
};

LocalDofLayout local_layout(const Mesh& mesh, std::size_t cell, int k);

/// The discrete weak gradient as a matrix from local DOFs to coefficients of
/// [P_{k-1}(D)]^2, stacked as (x-component block, y-component block) in the
/// degree k-1 CellBasis of the cell.
struct WeakGradient {
  Eigen::MatrixXd matrix;      // G
  Eigen::MatrixXd vector_mass; // block-diagonal mass matrix of [P_{k-1}(D)]^2
};

WeakGradient weak_gradient_matrix(const Mesh& mesh, std::size_t cell, int k);

/// A = G^T M_vec G.
Eigen::MatrixXd local_stiffness(const WeakGradient& wg);

/// S = h_D^{-1} T^T M_boundary T, where T v is the jump v0|_e - vb on each side.
Eigen::MatrixXd local_stabilization(const Mesh& mesh, std::size_t cell, int k);

struct LocalOperators {
  LocalDofLayout layout;
  WeakGradient gradient;
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd stabilization;

  Eigen::MatrixXd system() const { return stiffness + stabilization; }
};

LocalOperators local_operators(const Mesh& mesh, std::size_t cell, int k);
std::vector<LocalOperators> local_operators(const Mesh& mesh, int k);

// L2 projections. quad_degree < 0 selects assembly_quadrature_degree(k).

Eigen::VectorXd project_interior(const ScalarField& f, const Mesh& mesh, std::size_t cell, int k,
                                 int quad_degree = -1);
Eigen::VectorXd project_edge(const ScalarField& g, const Mesh& mesh, std::size_t edge, int k,
                             int quad_degree = -1);
/// Componentwise projection onto [P_degree(D)]^2, stacked (x block, y block).
Eigen::VectorXd project_gradient(const VectorField& grad, const Mesh& mesh, std::size_t cell,
                                 int degree, int quad_degree = -1);
/// Q_h f restricted to one cell, in LocalDofLayout order.
Eigen::VectorXd project_local(const ScalarField& f, const Mesh& mesh, std::size_t cell, int k,
                              int quad_degree = -1);

/// Number of eigenvalues below rel_tol * lambda_max of the symmetric matrix after
/// symmetric diagonal scaling D^-1/2 M D^-1/2 (rows with zero diagonal unscaled).
int kernel_dimension(const Eigen::MatrixXd& m, double rel_tol = 1e-9);

/// ||grad v0||^2 / (v^T A v + v^T S v) for one local DOF vector.
double gradient_bound_ratio(const Mesh& mesh, const LocalOperators& ops,
                            const Eigen::VectorXd& local);

/// (h_D ||q||^2_{dD} + h_D^2 ||div q||^2_D) / ||q||^2_D for q in [P_k(D)]^2
/// given as stacked coefficients in the degree-k CellBasis.
double inverse_inequality_ratio(const Mesh& mesh, std::size_t cell, int k,
                                const Eigen::VectorXd& q);

} // namespace wg
