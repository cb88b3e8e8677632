#pragma once

// Scaled monomial bases on cells, Legendre bases on edges, and quadrature.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wg/mesh.hpp"

namespace wg {

/// Dimension of P_k in two variables.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// Monomials ((x - cx)/h)^a ((y - cy)/h)^b, a + b <= k, in graded lexicographic
/// order: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
class CellBasis {
public:
  CellBasis(int degree, Point center, double scale);
  CellBasis(const Mesh& mesh, std::size_t cell, int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(terms_.size()); }
  const Point& center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<int, int>>& terms() const { return terms_; }

  Eigen::VectorXd values(const Point& p) const;
  /// Row 0 holds d/dx, row 1 holds d/dy of every basis function.
  Eigen::Matrix<double, 2, Eigen::Dynamic> gradients(const Point& p) const;

  double evaluate(const Eigen::VectorXd& coeffs, const Point& p) const;
  Eigen::Vector2d evaluate_gradient(const Eigen::VectorXd& coeffs, const Point& p) const;

private:
  int degree_;
  Point center_;
  double scale_;
  std::vector<std::pair<int, int>> terms_;
};

/// Legendre polynomials P_0..P_k in t in [-1, 1], where t = -1 is the first
/// endpoint and t = +1 the second.
class EdgeBasis {
public:
  EdgeBasis(int degree, Point first, Point second);
  /// Basis on mesh edge e, oriented along the edge's stored vertex order.
  EdgeBasis(const Mesh& mesh, std::size_t edge, int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  const Point& first() const { return first_; }
  const Point& second() const { return second_; }
  double length() const { return (second_ - first_).norm(); }

  Point point(double t) const;
  double parameter(const Point& p) const;

  Eigen::VectorXd values_at(double t) const;
  Eigen::VectorXd values(const Point& p) const { return values_at(parameter(p)); }
  double evaluate_at(const Eigen::VectorXd& coeffs, double t) const;

private:
  int degree_;
  Point first_;
  Point second_;
};

/// Points and positive weights. Edge rules also record the edge parameter of
/// each point so edge bases can be evaluated without re-projecting.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<double> params;

  std::size_t size() const { return weights.size(); }
  double measure() const;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int npoints);

/// Collapsed (Duffy) Gauss rule on a triangle, exact through the given degree.
QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree);

/// Fan triangulation from the cell centroid; throws GeometryError when the
/// cell is not star-shaped about its centroid.
QuadratureRule cell_quadrature(const Mesh& mesh, std::size_t cell, int degree);

/// Gauss-Legendre on the segment first -> second with ceil((degree+1)/2) points.
QuadratureRule edge_quadrature(const Point& first, const Point& second, int degree);
QuadratureRule edge_quadrature(const Mesh& mesh, std::size_t edge, int degree);

/// M_ij = sum_q w_q phi_i(x_q) phi_j(x_q). Throws GeometryError unless SPD.
Eigen::MatrixXd mass_matrix(const CellBasis& basis, const QuadratureRule& rule);
Eigen::MatrixXd mass_matrix(const EdgeBasis& basis, const QuadratureRule& rule);

/// Ratio of the extreme eigenvalues of a symmetric matrix.
double condition_number(const Eigen::MatrixXd& m);

} // namespace wg
