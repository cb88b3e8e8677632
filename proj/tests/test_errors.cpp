#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wg/errors.hpp"
#include "wg/problems.hpp"
#include "wg/study.hpp"

using namespace wg;

namespace {

oracle::CellData cell_data(const WeakField& f, std::size_t c) {
  const Mesh& m = f.mesh();
  oracle::CellData d;
  for (std::size_t v : m.cell(c))
    d.vertices.push_back(m.vertex(v));
  d.center = m.geometry(c).centroid;
  d.scale = m.geometry(c).diameter;
  d.k = f.degree();
  d.interior = f.interior(c);
  for (std::size_t e : m.cell_edges(c)) {
    d.side_coeffs.push_back(f.edge(e));
    d.side_from.push_back(m.vertex(m.edge(e).vertices[0]));
    d.side_to.push_back(m.vertex(m.edge(e).vertices[1]));
  }
  return d;
}

WeakField random_field(const Mesh& m, int k, unsigned seed) {
  DofMap d(m, k);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd c(static_cast<Eigen::Index>(d.total_dofs()));
  for (auto& x : c)
    x = nd(rng);
  return WeakField(m, std::move(d), std::move(c));
}

ErrorReport run(int n, int k) {
  return solve_problem(gen_uniform_squares(n), k, *find_problem("sinsin")).errors;
}

} // namespace

TEST_CASE("weak_norm examples") {
  const Mesh sq = gen_uniform_squares(1);
  const auto ops = local_operators(sq, 1);
  const DofMap d(sq, 1);

  const WeakField c = project_weak(sq, d, [](const Point&) { return 3.0; });
  CHECK(weak_norm(c, ops) <= 1e-12);

  const WeakField x = project_weak(sq, d, [](const Point& p) { return p.x(); });
  CHECK(weak_norm(x, ops) == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::VectorXd jump = Eigen::VectorXd::Zero(11);
  jump[0] = 1.0;
  const WeakField j(sq, d, jump);
  const double w = weak_norm(j, ops);
  CHECK(w * w == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("weak_norm agrees with direct quadrature of its definition") {
  for (const Mesh& m : {gen_uniform_squares(2), gen_small_edge_family(2, 1e-3)})
    for (int k = 1; k <= 3; ++k) {
      const WeakField f = random_field(m, k, 17u + static_cast<unsigned>(k));
      const auto ops = local_operators(m, k);
      double direct = 0.0;
      for (std::size_t c = 0; c < m.num_cells(); ++c)
        direct += oracle::local_weak_norm_sq(cell_data(f, c));
      const double w = weak_norm(f, ops);
      CHECK(std::abs(w * w - direct) <= 1e-10 * std::max(1.0, direct));
    }
}

TEST_CASE("rates on the sin-sin problem") {
  const ErrorReport a1 = run(8, 1), b1 = run(16, 1);
  const double g1 = a1.err_wgrad / b1.err_wgrad;
  CHECK(g1 >= 1.8);
  CHECK(g1 <= 2.2);
  const double l1 = a1.err_l2 / b1.err_l2;
  CHECK(l1 >= 3.6);
  CHECK(l1 <= 4.4);
  const double e1 = a1.err_edge / b1.err_edge;
  CHECK(e1 >= 3.6);
  CHECK(e1 <= 4.4);

  const ErrorReport a2 = run(8, 2), b2 = run(16, 2);
  const double g2 = a2.err_wgrad / b2.err_wgrad;
  CHECK(g2 >= 3.6);
  CHECK(g2 <= 4.4);
}

TEST_CASE("projection error bounds the L2 error from below within a factor 10") {
  const ProblemSpec& p = *find_problem("sinsin");
  for (int k = 1; k <= 2; ++k)
    for (int n : {4, 8, 16, 32}) {
      const Mesh m = gen_uniform_squares(n);
      const SolveResult r = solve_problem(m, k, p);
      const WeakField q = project_weak(m, r.field.dofs(), p.u, error_quadrature_degree(k));
      const double proj = l2_error(p.u, q);
      CHECK(proj < r.errors.err_l2);
      CHECK(r.errors.err_l2 <= 10.0 * proj);
    }
}

TEST_CASE("tiny edges contribute negligibly to the edge error") {
  const ProblemSpec& p = *find_problem("sinsin");
  for (int n : {4, 8}) {
    const Mesh m = gen_small_edge_family(n, 1e-8);
    const SolveResult r = solve_problem(m, 1, p);
    const std::vector<double> terms = edge_error_terms(p.u, r.field);
    double all = 0.0, kept = 0.0;
    int dropped = 0;
    for (std::size_t e = 0; e < terms.size(); ++e) {
      CHECK(terms[e] >= 0.0);
      all += terms[e];
      if (m.edge_length(e) >= 1e-8)
        kept += terms[e];
      else
        ++dropped;
    }
    CHECK(dropped == n * (n - 1));
    CHECK(std::sqrt(all) == doctest::Approx(r.errors.err_edge).epsilon(1e-14));
    CHECK(std::abs(std::sqrt(all) - std::sqrt(kept)) < 1e-12 * std::sqrt(all));
  }
}

TEST_CASE("property: triangle inequality for the weak gradient error") {
  for (const char* name : {"sinsin", "runge"})
    for (int k = 1; k <= 3; ++k)
      for (const Mesh& m : {gen_uniform_squares(4), gen_small_edge_family(8, 1e-6)}) {
        const ErrorReport e = solve_problem(m, k, *find_problem(name)).errors;
        CHECK(e.err_wgrad <= e.err_proj_grad + e.weak_norm_eh + 1e-12);
        CHECK(e.err_wgrad >= 0.0);
        CHECK(e.err_grad0 >= 0.0);
        CHECK(e.err_l2 >= 0.0);
        CHECK(e.err_edge >= 0.0);
      }
}

TEST_CASE("property: the projection of u has zero discrete error") {
  const ProblemSpec& p = *find_problem("sinsin");
  const Mesh m = gen_small_edge_family(4, 1e-3);
  const auto ops = local_operators(m, 2);
  const WeakField q = project_weak(m, DofMap(m, 2), p.u, error_quadrature_degree(2));
  const ErrorReport e = compute_errors(p.u, p.grad, q, ops);
  CHECK(e.weak_norm_eh < 1e-13);
  // with e_h = 0 the weak gradient error is exactly the projection error
  CHECK(e.err_wgrad == doctest::Approx(e.err_proj_grad).epsilon(1e-10));
  CHECK(e.err_proj_grad == doctest::Approx(gradient_projection_error(p.grad, m, 2)).epsilon(1e-14));
}

TEST_CASE("property: norms are invariant under renumbering") {
  const ProblemSpec& p = *find_problem("sinsin");
  const Mesh a = gen_small_edge_family(4, 1e-6);
  std::vector<std::vector<std::size_t>> cells = a.cells();
  std::mt19937 rng(5);
  std::shuffle(cells.begin(), cells.end(), rng);
  // renumber vertices as well
  std::vector<std::size_t> perm(a.num_vertices());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = perm.size() - 1 - i;
  std::vector<Point> verts(a.num_vertices());
  for (std::size_t i = 0; i < perm.size(); ++i)
    verts[perm[i]] = a.vertex(i);
  for (auto& loop : cells)
    for (auto& v : loop)
      v = perm[v];
  const Mesh b(verts, cells);
  for (int k = 1; k <= 2; ++k) {
    const ErrorReport ea = solve_problem(a, k, p, SolverMethod::DenseCholesky).errors;
    const ErrorReport eb = solve_problem(b, k, p, SolverMethod::DenseCholesky).errors;
    CHECK(eb.err_wgrad == doctest::Approx(ea.err_wgrad).epsilon(1e-10));
    CHECK(eb.err_grad0 == doctest::Approx(ea.err_grad0).epsilon(1e-10));
    CHECK(eb.err_l2 == doctest::Approx(ea.err_l2).epsilon(1e-10));
    CHECK(eb.err_edge == doctest::Approx(ea.err_edge).epsilon(1e-10));
  }
}

TEST_CASE("fit_rates") {
  const std::vector<std::pair<double, double>> two{{0.5, 0.1}, {0.25, 0.05}};
  const RateFit r = fit_rates(two);
  REQUIRE(r.pairwise.size() == 1);
  CHECK(r.pairwise[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<std::pair<double, double>> quarter;
  for (int i = 0; i < 4; ++i)
    quarter.emplace_back(std::ldexp(1.0, -i), 3.0 * std::ldexp(1.0, -2 * i));
  const RateFit q = fit_rates(quarter);
  CHECK(std::abs(q.slope - 2.0) <= 1e-12);
  CHECK_FALSE(q.exact);

  const std::vector<std::pair<double, double>> zero{{0.5, 1e-3}, {0.25, 0.0}, {0.125, 1e-5}};
  const RateFit z = fit_rates(zero);
  CHECK(z.exact);
  CHECK(std::isnan(z.slope));

  const std::vector<std::pair<double, double>> one{{0.5, 0.1}};
  CHECK_THROWS_AS(fit_rates(one), std::invalid_argument);
  const std::vector<std::pair<double, double>> up{{0.25, 0.1}, {0.5, 0.05}};
  CHECK_THROWS_AS(fit_rates(up), std::invalid_argument);
}
