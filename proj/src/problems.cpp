#include "wg/problems.hpp"

#include <cmath>
#include <numbers>

namespace wg {

namespace {

using std::numbers::pi;

ProblemSpec sinsin() {
  ProblemSpec p;
  p.name = "sinsin";
  p.u = [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  p.grad = [](const Point& x) {
    return Eigen::Vector2d(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                           pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  p.f = [](const Point& x) {
    return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  p.g = [](const Point&) { return 0.0; };
  return p;
}

ProblemSpec poly1() {
  ProblemSpec p;
  p.name = "poly1";
  p.u = [](const Point& x) { return 1.0 + 2.0 * x.x() - x.y(); };
  p.grad = [](const Point&) { return Eigen::Vector2d(2.0, -1.0); };
  p.f = [](const Point&) { return 0.0; };
  p.g = p.u;
  p.polynomial_degree = 1;
  return p;
}

ProblemSpec poly2() {
  ProblemSpec p;
  p.name = "poly2";
  p.u = [](const Point& x) { return 1.0 + x.x() * x.x() + x.x() * x.y(); };
  p.grad = [](const Point& x) { return Eigen::Vector2d(2.0 * x.x() + x.y(), x.x()); };
  p.f = [](const Point&) { return -2.0; };
  p.g = p.u;
  p.polynomial_degree = 2;
  return p;
}

ProblemSpec poly3() {
  ProblemSpec p;
  p.name = "poly3";
  p.u = [](const Point& x) {
    return 1.0 + x.x() * x.x() * x.x() - 2.0 * x.x() * x.y() * x.y() + x.y() * x.y();
  };
  p.grad = [](const Point& x) {
    return Eigen::Vector2d(3.0 * x.x() * x.x() - 2.0 * x.y() * x.y(),
                           -4.0 * x.x() * x.y() + 2.0 * x.y());
  };
  // lap u = 6x - 4x + 2
  p.f = [](const Point& x) { return -(2.0 * x.x() + 2.0); };
  p.g = p.u;
  p.polynomial_degree = 3;
  return p;
}

ProblemSpec runge() {
  ProblemSpec p;
  p.name = "runge";
  auto w = [](const Point& x) {
    const double dx = x.x() - 0.5, dy = x.y() - 0.5;
    return 1.0 + 25.0 * (dx * dx + dy * dy);
  };
  p.u = [w](const Point& x) { return 1.0 / w(x); };
  p.grad = [w](const Point& x) {
    const double ww = w(x);
    return Eigen::Vector2d(-50.0 * (x.x() - 0.5) / (ww * ww), -50.0 * (x.y() - 0.5) / (ww * ww));
  };
  p.f = [w](const Point& x) {
    const double ww = w(x);
    const double dx = x.x() - 0.5, dy = x.y() - 0.5;
    const double r2 = dx * dx + dy * dy;
    return 100.0 / (ww * ww) - 5000.0 * r2 / (ww * ww * ww);
  };
  p.g = p.u;
  return p;
}

} // namespace

const std::vector<ProblemSpec>& builtin_problems() {
  static const std::vector<ProblemSpec> problems{sinsin(), poly1(), poly2(), poly3(), runge()};
  return problems;
}

const ProblemSpec* find_problem(std::string_view name) {
  for (const ProblemSpec& p : builtin_problems())
    if (p.name == name)
      return &p;
  return nullptr;
}

} // namespace wg
