#include "wg/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wg {

double weak_norm(const WeakField& field, std::span<const LocalOperators> ops) {
  double sum = 0.0;
  for (std::size_t c = 0; c < field.mesh().num_cells(); ++c) {
    const Eigen::VectorXd v = field.local(c);
    sum += v.dot(ops[c].stiffness * v) + v.dot(ops[c].stabilization * v);
  }
  return std::sqrt(std::max(sum, 0.0));
}

std::pair<double, double> gradient_errors(const VectorField& exact_grad, const WeakField& field,
                                          std::span<const LocalOperators> ops) {
  const Mesh& mesh = field.mesh();
  const int k = field.degree();
  double wgrad = 0.0, grad0 = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis interior(mesh, c, k);
    const CellBasis vec(mesh, c, k - 1);
    const int m = vec.size();
    const Eigen::VectorXd g = ops[c].gradient.matrix * field.local(c);
    const Eigen::VectorXd gx = g.head(m);
    const Eigen::VectorXd gy = g.tail(m);
    const Eigen::VectorXd u0 = field.interior(c);
    const QuadratureRule rule = cell_quadrature(mesh, c, error_quadrature_degree(k));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& p = rule.points[q];
      const Eigen::Vector2d exact = exact_grad(p);
      const Eigen::VectorXd phi = vec.values(p);
      const Eigen::Vector2d weak(phi.dot(gx), phi.dot(gy));
      wgrad += rule.weights[q] * (exact - weak).squaredNorm();
      grad0 += rule.weights[q] * (exact - interior.evaluate_gradient(u0, p)).squaredNorm();
    }
  }
  return {std::sqrt(wgrad), std::sqrt(grad0)};
}

double l2_error(const ScalarField& exact, const WeakField& field) {
  const Mesh& mesh = field.mesh();
  const int k = field.degree();
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const CellBasis basis(mesh, c, k);
    const Eigen::VectorXd u0 = field.interior(c);
    const QuadratureRule rule = cell_quadrature(mesh, c, error_quadrature_degree(k));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double d = exact(rule.points[q]) - basis.evaluate(u0, rule.points[q]);
      sum += rule.weights[q] * d * d;
    }
  }
  return std::sqrt(sum);
}

std::vector<double> edge_error_terms(const ScalarField& exact, const WeakField& field) {
  const Mesh& mesh = field.mesh();
  const int k = field.degree();
  std::vector<double> terms(mesh.num_edges(), 0.0);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const EdgeBasis basis(mesh, e, k);
    const Eigen::VectorXd ub = field.edge(e);
    const QuadratureRule rule = edge_quadrature(mesh, e, error_quadrature_degree(k));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double d = exact(rule.points[q]) - basis.evaluate_at(ub, rule.params[q]);
      s += rule.weights[q] * d * d;
    }
    terms[e] = mesh.edge_length(e) * s;
  }
  return terms;
}

double edge_error(const ScalarField& exact, const WeakField& field) {
  double sum = 0.0;
  for (double t : edge_error_terms(exact, field))
    sum += t;
  return std::sqrt(sum);
}

double gradient_projection_error(const VectorField& exact_grad, const Mesh& mesh, int k) {
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const int qdeg = error_quadrature_degree(k);
    const Eigen::VectorXd coeffs = project_gradient(exact_grad, mesh, c, k - 1, qdeg);
    const CellBasis vec(mesh, c, k - 1);
    const int m = vec.size();
    const QuadratureRule rule = cell_quadrature(mesh, c, qdeg);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd phi = vec.values(rule.points[q]);
      const Eigen::Vector2d proj(phi.dot(coeffs.head(m)), phi.dot(coeffs.tail(m)));
      sum += rule.weights[q] * (exact_grad(rule.points[q]) - proj).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

ErrorReport compute_errors(const ScalarField& exact, const VectorField& exact_grad,
                           const WeakField& field, std::span<const LocalOperators> ops) {
  const Mesh& mesh = field.mesh();
  const int k = field.degree();
  ErrorReport r;
  r.h = mesh.mesh_size();
  std::tie(r.err_wgrad, r.err_grad0) = gradient_errors(exact_grad, field, ops);
  r.err_l2 = l2_error(exact, field);
  r.err_edge = edge_error(exact, field);

  const WeakField qh = project_weak(mesh, field.dofs(), exact, error_quadrature_degree(k));
  const WeakField eh(mesh, field.dofs(), qh.coeffs() - field.coeffs());
  r.weak_norm_eh = weak_norm(eh, ops);
  r.err_proj_grad = gradient_projection_error(exact_grad, mesh, k);
  return r;
}

RateFit fit_rates(std::span<const std::pair<double, double>> levels) {
  if (levels.size() < 2)
    throw std::invalid_argument("fit_rates: need at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i].first < levels[i - 1].first))
      throw std::invalid_argument("fit_rates: h must be strictly decreasing");

  RateFit fit;
  for (const auto& [h, err] : levels)
    if (!(err > 0.0))
      fit.exact = true;
  if (fit.exact) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.pairwise.assign(levels.size() - 1, std::numeric_limits<double>::quiet_NaN());
    return fit;
  }

  for (std::size_t i = 1; i < levels.size(); ++i)
    fit.pairwise.push_back(std::log(levels[i - 1].second / levels[i].second) /
                           std::log(levels[i - 1].first / levels[i].first));

  const double n = static_cast<double>(levels.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [h, err] : levels) {
    sx += std::log(h);
    sy += std::log(err);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [h, err] : levels) {
    const double dx = std::log(h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err) - my);
  }
  fit.slope = sxy / sxx;
  return fit;
}

} // namespace wg
