#include "wg/polybasis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace wg {

namespace {

Eigen::VectorXd powers(double x, int k) {
  Eigen::VectorXd p(k + 1);
  p[0] = 1.0;
  for (int i = 1; i <= k; ++i)
    p[i] = p[i - 1] * x;
  return p;
}

// Legendre P_0..P_k at t.
Eigen::VectorXd legendre(double t, int k) {
  Eigen::VectorXd p(k + 1);
  p[0] = 1.0;
  if (k >= 1)
    p[1] = t;
  for (int n = 1; n < k; ++n)
    p[n + 1] = ((2.0 * n + 1.0) * t * p[n] - n * p[n - 1]) / (n + 1.0);
  return p;
}

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

void require_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw GeometryError("mass matrix is not positive definite (under-integration or degenerate "
                        "geometry)");
}

} // namespace

CellBasis::CellBasis(int degree, Point center, double scale)
    : degree_(degree), center_(std::move(center)), scale_(scale) {
  if (degree < 0)
    throw std::invalid_argument("CellBasis: negative degree");
  if (!(scale > 0.0))
    throw std::invalid_argument("CellBasis: scale must be positive");
  terms_.reserve(poly_dim(degree));
  for (int l = 0; l <= degree; ++l)
    for (int a = l; a >= 0; --a)
      terms_.emplace_back(a, l - a);
}

CellBasis::CellBasis(const Mesh& mesh, std::size_t cell, int degree)
    : CellBasis(degree, mesh.geometry(cell).centroid, mesh.geometry(cell).diameter) {}

Eigen::VectorXd CellBasis::values(const Point& p) const {
  const Eigen::VectorXd px = powers((p.x() - center_.x()) / scale_, degree_);
  const Eigen::VectorXd py = powers((p.y() - center_.y()) / scale_, degree_);
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i)
    v[i] = px[terms_[i].first] * py[terms_[i].second];
  return v;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> CellBasis::gradients(const Point& p) const {
  const Eigen::VectorXd px = powers((p.x() - center_.x()) / scale_, degree_);
  const Eigen::VectorXd py = powers((p.y() - center_.y()) / scale_, degree_);
  Eigen::Matrix<double, 2, Eigen::Dynamic> g(2, size());
  for (int i = 0; i < size(); ++i) {
    const auto [a, b] = terms_[i];
    g(0, i) = a > 0 ? a * px[a - 1] * py[b] / scale_ : 0.0;
    g(1, i) = b > 0 ? b * px[a] * py[b - 1] / scale_ : 0.0;
  }
  return g;
}

double CellBasis::evaluate(const Eigen::VectorXd& coeffs, const Point& p) const {
  return values(p).dot(coeffs);
}

Eigen::Vector2d CellBasis::evaluate_gradient(const Eigen::VectorXd& coeffs, const Point& p) const {
  return gradients(p) * coeffs;
}

EdgeBasis::EdgeBasis(int degree, Point first, Point second)
    : degree_(degree), first_(std::move(first)), second_(std::move(second)) {
  if (degree < 0)
    throw std::invalid_argument("EdgeBasis: negative degree");
}

EdgeBasis::EdgeBasis(const Mesh& mesh, std::size_t edge, int degree)
    : EdgeBasis(degree, mesh.vertex(mesh.edge(edge).vertices[0]),
                mesh.vertex(mesh.edge(edge).vertices[1])) {}

Point EdgeBasis::point(double t) const {
  return 0.5 * (first_ + second_) + 0.5 * t * (second_ - first_);
}

double EdgeBasis::parameter(const Point& p) const {
  const Point d = second_ - first_;
  return 2.0 * (p - 0.5 * (first_ + second_)).dot(d) / d.squaredNorm();
}

Eigen::VectorXd EdgeBasis::values_at(double t) const { return legendre(t, degree_); }

double EdgeBasis::evaluate_at(const Eigen::VectorXd& coeffs, double t) const {
  return values_at(t).dot(coeffs);
}

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights)
    s += w;
  return s;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int npoints) {
  if (npoints < 1)
    throw std::invalid_argument("gauss_legendre: need at least one point");
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(npoints); it != cache.end())
    return it->second;

  const int n = npoints;
  std::vector<double> x(n), w(n);
  // Newton on P_n from the Chebyshev-like initial guesses; symmetric fill.
  auto legendre_pair = [n](double t) {
    double p0 = 1.0, p1 = t;
    for (int k = 1; k < n; ++k) {
      const double p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
    }
    return std::make_pair(p1, p0);
  };
  for (int i = 0; i < n / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [pn, pn1] = legendre_pair(t);
      const double dt = pn / (n * (t * pn - pn1) / (t * t - 1.0));
      t -= dt;
      if (std::abs(dt) < 1e-16)
        break;
    }
    const auto [pn, pn1] = legendre_pair(t);
    const double dp = n * (t * pn - pn1) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  if (n % 2 == 1) {
    // P_n'(0) = n P_{n-1}(0)
    const auto [pn, pn1] = legendre_pair(0.0);
    const double dp = n * pn1;
    x[n / 2] = 0.0;
    w[n / 2] = 2.0 / (dp * dp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

QuadratureRule triangle_quadrature(const Point& a, const Point& b, const Point& c, int degree) {
  const int m = std::max(1, (degree + 3) / 2);
  const auto& [x, w] = gauss_legendre(m);
  const double twice_area = cross(b - a, c - a);
  QuadratureRule rule;
  rule.points.reserve(m * m);
  rule.weights.reserve(m * m);
  for (int i = 0; i < m; ++i) {
    const double u = 0.5 * (1.0 + x[i]);
    for (int j = 0; j < m; ++j) {
      const double v = 0.5 * (1.0 + x[j]);
      rule.points.push_back(a + u * (b - a) + u * v * (c - b));
      rule.weights.push_back(0.25 * w[i] * w[j] * u * twice_area);
    }
  }
  return rule;
}

QuadratureRule cell_quadrature(const Mesh& mesh, std::size_t cell, int degree) {
  const CellGeometry& g = mesh.geometry(cell);
  if (!(g.rho_proxy > 0.0))
    throw GeometryError("cell is not star-shaped about its centroid", cell);
  const auto& loop = mesh.cell(cell);
  const std::size_t m = loop.size();
  QuadratureRule rule;
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = mesh.vertex(loop[i]);
    const Point& b = mesh.vertex(loop[(i + 1) % m]);
    if (!(cross(a - g.centroid, b - g.centroid) > 0.0))
      throw GeometryError("cell is not star-shaped about its centroid", cell);
    QuadratureRule tri = triangle_quadrature(g.centroid, a, b, degree);
    rule.points.insert(rule.points.end(), tri.points.begin(), tri.points.end());
    rule.weights.insert(rule.weights.end(), tri.weights.begin(), tri.weights.end());
  }
  return rule;
}

QuadratureRule edge_quadrature(const Point& first, const Point& second, int degree) {
  const double len = (second - first).norm();
  if (!(len > 0.0))
    throw GeometryError("zero-length edge");
  const int m = std::max(1, (degree + 2) / 2);
  const auto& [x, w] = gauss_legendre(m);
  const Point mid = 0.5 * (first + second);
  const Point half = 0.5 * (second - first);
  QuadratureRule rule;
  rule.points.reserve(m);
  rule.weights.reserve(m);
  rule.params.reserve(m);
  for (int i = 0; i < m; ++i) {
    rule.points.push_back(mid + x[i] * half);
    rule.weights.push_back(0.5 * len * w[i]);
    rule.params.push_back(x[i]);
  }
  return rule;
}

QuadratureRule edge_quadrature(const Mesh& mesh, std::size_t edge, int degree) {
  const Edge& e = mesh.edge(edge);
  return edge_quadrature(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]), degree);
}

Eigen::MatrixXd mass_matrix(const CellBasis& basis, const QuadratureRule& rule) {
  const int n = basis.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    m.noalias() += rule.weights[q] * phi * phi.transpose();
  }
  require_spd(m);
  return m;
}

Eigen::MatrixXd mass_matrix(const EdgeBasis& basis, const QuadratureRule& rule) {
  const int n = basis.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi =
        rule.params.empty() ? basis.values(rule.points[q]) : basis.values_at(rule.params[q]);
    m.noalias() += rule.weights[q] * phi * phi.transpose();
  }
  require_spd(m);
  return m;
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

} // namespace wg
