#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wg/wgcore.hpp"

namespace wg {

/// Manufactured Poisson problem -lap u = f on the unit square with u = g on the boundary.
struct ProblemSpec {
  std::string name;
  ScalarField u;
  VectorField grad;
  ScalarField f;
  ScalarField g;
  int polynomial_degree = -1; // degree of u when it is a polynomial, else -1
};

/// sinsin, poly1, poly2, poly3, runge.
const std::vector<ProblemSpec>& builtin_problems();
/// nullptr when unknown.
const ProblemSpec* find_problem(std::string_view name);

} // namespace wg
