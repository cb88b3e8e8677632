#pragma once

#include <span>
#include <utility>
#include <vector>

#include "wg/assembly.hpp"
#include "wg/wgcore.hpp"

namespace wg {

struct ErrorReport {
  double h = 0.0;
  double err_wgrad = 0.0;     // ||grad u - grad_w u_h||_h
  double err_grad0 = 0.0;     // ||grad u - grad u_0||_h
  double err_l2 = 0.0;        // ||u - u_0||
  double err_edge = 0.0;      // (sum_e h_e ||u - u_b||^2_e)^(1/2)
  double weak_norm_eh = 0.0;  // |Q_h u - u_h|_{k-1,w}
  double err_proj_grad = 0.0; // ||grad u - Q_{k-1} grad u||_h
};

/// |v|_{k-1,w} = (sum_D v_D^T (A + S) v_D)^(1/2).
double weak_norm(const WeakField& field, std::span<const LocalOperators> ops);

/// (||grad u - grad_w u_h||_h, ||grad u - grad u_0||_h). The broken norm
/// squares each cell contribution before summing.
std::pair<double, double> gradient_errors(const VectorField& exact_grad, const WeakField& field,
                                          std::span<const LocalOperators> ops);

double l2_error(const ScalarField& exact, const WeakField& field);

/// Per-edge terms h_e * ||u - u_b||^2_{L2(e)}, in edge order.
std::vector<double> edge_error_terms(const ScalarField& exact, const WeakField& field);
double edge_error(const ScalarField& exact, const WeakField& field);

/// ||grad u - Q_{k-1} grad u||_h.
double gradient_projection_error(const VectorField& exact_grad, const Mesh& mesh, int k);

ErrorReport compute_errors(const ScalarField& exact, const VectorField& exact_grad,
                           const WeakField& field, std::span<const LocalOperators> ops);

struct RateFit {
  double slope = 0.0;          // least-squares slope of log(error) against log(h)
  std::vector<double> pairwise;
  bool exact = false;          // some level had zero error; slope undefined
};

/// Needs at least two levels with strictly decreasing h.
RateFit fit_rates(std::span<const std::pair<double, double>> levels);

} // namespace wg
