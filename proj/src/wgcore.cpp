#include "wg/wgcore.hpp"

#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace wg {

namespace {

int resolve_degree(int quad_degree, int k) {
  return quad_degree < 0 ? assembly_quadrature_degree(k) : quad_degree;
}

// Outward unit normal of side `edge` as seen from a cell traversing it
// with the given alignment.
Point outward_normal(const Mesh& mesh, std::size_t edge, bool aligned) {
  const Edge& e = mesh.edge(edge);
  const Point d = mesh.vertex(e.vertices[1]) - mesh.vertex(e.vertices[0]);
  const Point n = Point(d.y(), -d.x()) / d.norm();
  return aligned ? n : Point(-n);
}

Eigen::VectorXd solve_mass(const Eigen::MatrixXd& mass, const Eigen::VectorXd& rhs,
                           std::size_t cell) {
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success)
    throw GeometryError("Cholesky factorization of a mass matrix failed", cell);
  return llt.solve(rhs);
}

} // namespace

LocalDofLayout local_layout(const Mesh& mesh, std::size_t cell, int k) {
  LocalDofLayout l;
  l.cell = cell;
  l.degree = k;
  l.interior = poly_dim(k);
  l.edges = mesh.cell_edges(cell);
  l.aligned = mesh.cell_edge_aligned(cell);
  return l;
}

WeakGradient weak_gradient_matrix(const Mesh& mesh, std::size_t cell, int k) {
  if (k < 1)
    throw std::invalid_argument("weak_gradient_matrix: k must be >= 1");
  const LocalDofLayout layout = local_layout(mesh, cell, k);
  const CellBasis interior(mesh, cell, k);
  const CellBasis vec(mesh, cell, k - 1);
  const int m = vec.size();
  const int qdeg = assembly_quadrature_degree(k);

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * m, layout.total());
  Eigen::MatrixXd mass;
  try {
    const QuadratureRule rule = cell_quadrature(mesh, cell, qdeg);
    mass = mass_matrix(vec, rule);
    // -(v0, div q_j)_D; div (phi_j, 0) = d/dx phi_j and div (0, phi_j) = d/dy phi_j.
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd phi = interior.values(rule.points[q]);
      const auto dq = vec.gradients(rule.points[q]);
      const double w = rule.weights[q];
      b.block(0, 0, m, layout.interior).noalias() -= w * dq.row(0).transpose() * phi.transpose();
      b.block(m, 0, m, layout.interior).noalias() -= w * dq.row(1).transpose() * phi.transpose();
    }
  } catch (const GeometryError& e) {
    throw GeometryError(e.what(), cell);
  }

  // <vb, q_j . n>_e on each side.
  for (std::size_t s = 0; s < layout.edges.size(); ++s) {
    const std::size_t e = layout.edges[s];
    const EdgeBasis eb(mesh, e, k);
    const Point n = outward_normal(mesh, e, layout.aligned[s]);
    const QuadratureRule rule = edge_quadrature(mesh, e, qdeg);
    const int off = layout.edge_offset(s);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd psi = eb.values_at(rule.params[q]);
      const Eigen::VectorXd phi = vec.values(rule.points[q]);
      const double w = rule.weights[q];
      b.block(0, off, m, layout.edge_size()).noalias() += (w * n.x()) * phi * psi.transpose();
      b.block(m, off, m, layout.edge_size()).noalias() += (w * n.y()) * phi * psi.transpose();
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success)
    throw GeometryError("Cholesky factorization of the gradient mass matrix failed", cell);
  WeakGradient out;
  out.matrix.resize(2 * m, layout.total());
  out.matrix.topRows(m) = llt.solve(b.topRows(m));
  out.matrix.bottomRows(m) = llt.solve(b.bottomRows(m));
  out.vector_mass = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  out.vector_mass.topLeftCorner(m, m) = mass;
  out.vector_mass.bottomRightCorner(m, m) = mass;
  return out;
}

Eigen::MatrixXd local_stiffness(const WeakGradient& wg) {
  Eigen::MatrixXd a = wg.matrix.transpose() * wg.vector_mass * wg.matrix;
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd local_stabilization(const Mesh& mesh, std::size_t cell, int k) {
  if (k < 1)
    throw std::invalid_argument("local_stabilization: k must be >= 1");
  const LocalDofLayout layout = local_layout(mesh, cell, k);
  const CellBasis interior(mesh, cell, k);
  const double h = mesh.geometry(cell).diameter;
  const int qdeg = assembly_quadrature_degree(k);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(layout.total(), layout.total());
  Eigen::RowVectorXd jump(layout.total());
  for (std::size_t side = 0; side < layout.edges.size(); ++side) {
    const std::size_t e = layout.edges[side];
    const EdgeBasis eb(mesh, e, k);
    const QuadratureRule rule = edge_quadrature(mesh, e, qdeg);
    const int off = layout.edge_offset(side);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      jump.setZero();
      jump.head(layout.interior) = interior.values(rule.points[q]).transpose();
      jump.segment(off, layout.edge_size()) = -eb.values_at(rule.params[q]).transpose();
      s.noalias() += (rule.weights[q] / h) * jump.transpose() * jump;
    }
  }
  return s;
}

LocalOperators local_operators(const Mesh& mesh, std::size_t cell, int k) {
  LocalOperators ops;
  ops.layout = local_layout(mesh, cell, k);
  ops.gradient = weak_gradient_matrix(mesh, cell, k);
  ops.stiffness = local_stiffness(ops.gradient);
  ops.stabilization = local_stabilization(mesh, cell, k);
  return ops;
}

std::vector<LocalOperators> local_operators(const Mesh& mesh, int k) {
  std::vector<LocalOperators> all;
  all.reserve(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    all.push_back(local_operators(mesh, c, k));
  return all;
}

Eigen::VectorXd project_interior(const ScalarField& f, const Mesh& mesh, std::size_t cell, int k,
                                 int quad_degree) {
  const CellBasis basis(mesh, cell, k);
  const QuadratureRule rule = cell_quadrature(mesh, cell, resolve_degree(quad_degree, k));
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    mass.noalias() += rule.weights[q] * phi * phi.transpose();
    rhs += (rule.weights[q] * f(rule.points[q])) * phi;
  }
  return solve_mass(mass, rhs, cell);
}

Eigen::VectorXd project_edge(const ScalarField& g, const Mesh& mesh, std::size_t edge, int k,
                             int quad_degree) {
  const EdgeBasis basis(mesh, edge, k);
  const QuadratureRule rule = edge_quadrature(mesh, edge, resolve_degree(quad_degree, k));
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd psi = basis.values_at(rule.params[q]);
    mass.noalias() += rule.weights[q] * psi * psi.transpose();
    rhs += (rule.weights[q] * g(rule.points[q])) * psi;
  }
  return solve_mass(mass, rhs, npos);
}

Eigen::VectorXd project_gradient(const VectorField& grad, const Mesh& mesh, std::size_t cell,
                                 int degree, int quad_degree) {
  const CellBasis basis(mesh, cell, degree);
  const int m = basis.size();
  const QuadratureRule rule =
      cell_quadrature(mesh, cell, quad_degree < 0 ? 2 * degree + 4 : quad_degree);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    const Eigen::Vector2d gv = grad(rule.points[q]);
    mass.noalias() += rule.weights[q] * phi * phi.transpose();
    rhs.noalias() += rule.weights[q] * phi * gv.transpose();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success)
    throw GeometryError("Cholesky factorization of a mass matrix failed", cell);
  const Eigen::MatrixXd c = llt.solve(rhs);
  Eigen::VectorXd out(2 * m);
  out << c.col(0), c.col(1);
  return out;
}

Eigen::VectorXd project_local(const ScalarField& f, const Mesh& mesh, std::size_t cell, int k,
                              int quad_degree) {
  const LocalDofLayout layout = local_layout(mesh, cell, k);
  Eigen::VectorXd v(layout.total());
  v.head(layout.interior) = project_interior(f, mesh, cell, k, quad_degree);
  for (std::size_t s = 0; s < layout.edges.size(); ++s)
    v.segment(layout.edge_offset(s), layout.edge_size()) =
        project_edge(f, mesh, layout.edges[s], k, quad_degree);
  return v;
}

int kernel_dimension(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::VectorXd d = m.diagonal();
  for (auto& x : d)
    x = x > 0.0 ? 1.0 / std::sqrt(x) : 1.0;
  const Eigen::MatrixXd scaled = d.asDiagonal() * m * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double cutoff = rel_tol * ev.cwiseAbs().maxCoeff();
  return static_cast<int>((ev.array().abs() <= cutoff).count());
}

double gradient_bound_ratio(const Mesh& mesh, const LocalOperators& ops,
                            const Eigen::VectorXd& local) {
  const int k = ops.layout.degree;
  const CellBasis basis(mesh, ops.layout.cell, k);
  const QuadratureRule rule =
      cell_quadrature(mesh, ops.layout.cell, assembly_quadrature_degree(k));
  const Eigen::VectorXd v0 = local.head(ops.layout.interior);
  double grad2 = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    grad2 += rule.weights[q] * basis.evaluate_gradient(v0, rule.points[q]).squaredNorm();
  const double energy = local.dot(ops.system() * local);
  return grad2 / energy;
}

double inverse_inequality_ratio(const Mesh& mesh, std::size_t cell, int k,
                                const Eigen::VectorXd& q) {
  const CellBasis basis(mesh, cell, k);
  const int m = basis.size();
  if (q.size() != 2 * m)
    throw std::invalid_argument("inverse_inequality_ratio: coefficient size mismatch");
  const Eigen::VectorXd qx = q.head(m);
  const Eigen::VectorXd qy = q.tail(m);
  const double h = mesh.geometry(cell).diameter;
  const int qdeg = 2 * k + 2;

  double vol = 0.0, div = 0.0, bnd = 0.0;
  const QuadratureRule cell_rule = cell_quadrature(mesh, cell, qdeg);
  for (std::size_t i = 0; i < cell_rule.size(); ++i) {
    const Point& p = cell_rule.points[i];
    const double vx = basis.evaluate(qx, p);
    const double vy = basis.evaluate(qy, p);
    const double d = basis.evaluate_gradient(qx, p).x() + basis.evaluate_gradient(qy, p).y();
    vol += cell_rule.weights[i] * (vx * vx + vy * vy);
    div += cell_rule.weights[i] * d * d;
  }
  for (std::size_t e : mesh.cell_edges(cell)) {
    const QuadratureRule rule = edge_quadrature(mesh, e, qdeg);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double vx = basis.evaluate(qx, rule.points[i]);
      const double vy = basis.evaluate(qy, rule.points[i]);
      bnd += rule.weights[i] * (vx * vx + vy * vy);
    }
  }
  return (h * bnd + h * h * div) / vol;
}

} // namespace wg
