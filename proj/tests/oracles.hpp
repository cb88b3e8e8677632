#pragma once

// Reference computations that share no code with the library: closed-form
// polygon moments, Golub-Welsch Gauss rules, and a weak-norm evaluation that
// builds the weak gradient in a different polynomial basis.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec2 = Eigen::Vector2d;

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

/// Exact integral of x^a y^b over the triangle (p0, p1, p2), signed by its
/// orientation, through the barycentric expansion x = sum_i lambda_i x_i and
/// int_T lambda^alpha = 2|T| alpha! / (|alpha| + 2)!.
inline double triangle_monomial(const Vec2& p0, const Vec2& p1, const Vec2& p2, int a, int b) {
  using Poly = std::map<std::tuple<int, int, int>, double>;
  auto power = [](const std::array<double, 3>& c, int n) {
    Poly out;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const int l = n - i - j;
        const double coef =
            factorial(n) / (factorial(i) * factorial(j) * factorial(l)) *
            std::pow(c[0], i) * std::pow(c[1], j) * std::pow(c[2], l);
        out[{i, j, l}] += coef;
      }
    return out;
  };
  const Poly px = power({p0.x(), p1.x(), p2.x()}, a);
  const Poly py = power({p0.y(), p1.y(), p2.y()}, b);
  const double area =
      0.5 * ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  double sum = 0.0;
  for (const auto& [ex, cx] : px)
    for (const auto& [ey, cy] : py) {
      const int i = std::get<0>(ex) + std::get<0>(ey);
      const int j = std::get<1>(ex) + std::get<1>(ey);
      const int l = std::get<2>(ex) + std::get<2>(ey);
      sum += cx * cy * 2.0 * area * factorial(i) * factorial(j) * factorial(l) /
             factorial(i + j + l + 2);
    }
  return sum;
}

/// Exact integral of x^a y^b over a simple CCW polygon, fanned from vertex 0.
inline double polygon_monomial(const std::vector<Vec2>& poly, int a, int b) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    s += triangle_monomial(poly[0], poly[i], poly[i + 1], a, b);
  return s;
}

/// Gauss-Legendre nodes and weights on [-1, 1] from the eigen-decomposition of
/// the Jacobi matrix.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> golub_welsch(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double beta = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w};
}

inline double legendre(int n, double t) {
  double p0 = 1.0, p1 = t;
  if (n == 0)
    return p0;
  for (int i = 2; i <= n; ++i) {
    const double p2 = ((2.0 * i - 1.0) * t * p1 - (i - 1.0) * p0) / i;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// A cell described without the library: CCW vertices, the interior
/// polynomial in the scaled monomial basis about (center, scale), and one
/// trace polynomial per side. `side_coeffs[i]` are Legendre coefficients on
/// the segment from `side_from[i]` to `side_to[i]` (t = -1 at side_from).
struct CellData {
  std::vector<Vec2> vertices;
  Vec2 center;
  double scale;
  int k;
  Eigen::VectorXd interior;
  std::vector<Eigen::VectorXd> side_coeffs;
  std::vector<Vec2> side_from;
  std::vector<Vec2> side_to;
};

inline double eval_interior(const CellData& d, const Vec2& p) {
  const double x = (p.x() - d.center.x()) / d.scale, y = (p.y() - d.center.y()) / d.scale;
  double s = 0.0;
  int idx = 0;
  for (int deg = 0; deg <= d.k; ++deg)
    for (int b = 0; b <= deg; ++b) {
      const int a = deg - b;
      s += d.interior[idx++] * std::pow(x, a) * std::pow(y, b);
    }
  return s;
}

inline double eval_trace(const CellData& d, std::size_t side, const Vec2& p) {
  const Vec2 a = d.side_from[side], b = d.side_to[side];
  const double t = 2.0 * (p - a).dot(b - a) / (b - a).squaredNorm() - 1.0;
  double s = 0.0;
  for (int i = 0; i <= d.k; ++i)
    s += d.side_coeffs[side][i] * legendre(i, t);
  return s;
}

/// Integrates g over a convex polygon: fan triangles from vertex 0, split each
/// into three quadrilaterals about its centroid, and apply a tensor Gauss rule
/// through the bilinear map of every quadrilateral.
template <class F>
double integrate_polygon(const std::vector<Vec2>& poly, const F& g, int npts) {
  const auto [t, w] = golub_welsch(npts);
  auto quad = [&](const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& p3) {
    double s = 0.0;
    for (int i = 0; i < npts; ++i)
      for (int j = 0; j < npts; ++j) {
        const double u = 0.5 * (t[i] + 1.0), v = 0.5 * (t[j] + 1.0);
        const Vec2 x = (1 - u) * (1 - v) * p0 + u * (1 - v) * p1 + u * v * p2 + (1 - u) * v * p3;
        const Vec2 xu = (1 - v) * (p1 - p0) + v * (p2 - p3);
        const Vec2 xv = (1 - u) * (p3 - p0) + u * (p2 - p1);
        const double jac = std::abs(xu.x() * xv.y() - xu.y() * xv.x());
        s += 0.25 * w[i] * w[j] * jac * g(x);
      }
    return s;
  };
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Vec2 a = poly[0], b = poly[i], c = poly[i + 1];
    const Vec2 m = (a + b + c) / 3.0;
    const Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    s += quad(a, ab, m, ca) + quad(b, bc, m, ab) + quad(c, ca, m, bc);
  }
  return s;
}

template <class F>
double integrate_segment(const Vec2& a, const Vec2& b, const F& g, int npts) {
  const auto [t, w] = golub_welsch(npts);
  const double half = 0.5 * (b - a).norm();
  double s = 0.0;
  for (int i = 0; i < npts; ++i)
    s += w[i] * half * g(0.5 * (1 - t[i]) * a + 0.5 * (1 + t[i]) * b);
  return s;
}

/// Local weak-norm contribution int_D |grad_w v|^2 + h_D^{-1} ||v0 - vb||^2_{dD}.
/// The weak gradient is found in the unscaled monomial basis x^a y^b of
/// [P_{k-1}]^2 from (q, tau)_D = -(v0, div tau)_D + <vb, tau.n>_{dD}.
inline double local_weak_norm_sq(const CellData& d) {
  const int km = d.k - 1;
  std::vector<std::pair<int, int>> mono;
  for (int deg = 0; deg <= km; ++deg)
    for (int b = 0; b <= deg; ++b)
      mono.emplace_back(deg - b, b);
  const int m = static_cast<int>(mono.size());
  const int npts = d.k + 6;
  auto mon = [](const Vec2& p, int a, int b) { return std::pow(p.x(), a) * std::pow(p.y(), b); };
  auto dmon = [](const Vec2& p, int a, int b, int dir) {
    if (dir == 0)
      return a == 0 ? 0.0 : a * std::pow(p.x(), a - 1) * std::pow(p.y(), b);
    return b == 0 ? 0.0 : b * std::pow(p.x(), a) * std::pow(p.y(), b - 1);
  };

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      M(i, j) = integrate_polygon(
          d.vertices,
          [&](const Vec2& p) {
            return mon(p, mono[i].first, mono[i].second) * mon(p, mono[j].first, mono[j].second);
          },
          npts);

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  const std::size_t nv = d.vertices.size();
  for (int dir = 0; dir < 2; ++dir)
    for (int i = 0; i < m; ++i) {
      const auto [a, b] = mono[i];
      double r = -integrate_polygon(
          d.vertices, [&](const Vec2& p) { return eval_interior(d, p) * dmon(p, a, b, dir); },
          npts);
      for (std::size_t s = 0; s < nv; ++s) {
        const Vec2 p0 = d.vertices[s], p1 = d.vertices[(s + 1) % nv];
        const Vec2 tang = p1 - p0;
        const Vec2 normal = Vec2(tang.y(), -tang.x()) / tang.norm();
        r += integrate_segment(
            p0, p1, [&](const Vec2& p) { return eval_trace(d, s, p) * mon(p, a, b) * normal[dir]; },
            npts);
      }
      rhs(i, dir) = r;
    }
  const Eigen::MatrixXd q = M.colPivHouseholderQr().solve(rhs);

  double grad_sq = 0.0;
  for (int dir = 0; dir < 2; ++dir)
    grad_sq += q.col(dir).dot(M * q.col(dir));

  double diam = 0.0;
  for (const Vec2& a : d.vertices)
    for (const Vec2& b : d.vertices)
      diam = std::max(diam, (a - b).norm());
  double jump = 0.0;
  for (std::size_t s = 0; s < nv; ++s) {
    const Vec2 p0 = d.vertices[s], p1 = d.vertices[(s + 1) % nv];
    jump += integrate_segment(
        p0, p1,
        [&](const Vec2& p) {
          const double j = eval_interior(d, p) - eval_trace(d, s, p);
          return j * j;
        },
        npts);
  }
  return grad_sq + jump / diam;
}

/// Central-difference gradient and Laplacian.
template <class F>
Vec2 fd_gradient(const F& u, const Vec2& p, double h = 1e-5) {
  const Vec2 ex(h, 0.0), ey(0.0, h);
  return Vec2((u(p + ex) - u(p - ex)) / (2 * h), (u(p + ey) - u(p - ey)) / (2 * h));
}

template <class F>
double fd_laplacian(const F& u, const Vec2& p, double h = 1e-4) {
  const Vec2 ex(h, 0.0), ey(0.0, h);
  return (u(p + ex) + u(p - ex) + u(p + ey) + u(p - ey) - 4.0 * u(p)) / (h * h);
}

} // namespace oracle
