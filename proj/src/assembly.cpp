#include "wg/assembly.hpp"
#include "wg/format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace wg {

DofMap::DofMap(const Mesh& mesh, int k) : degree_(k), num_cells_(mesh.num_cells()) {
  if (k < 1)
    throw std::invalid_argument("DofMap: k must be >= 1");
  total_ = num_cells_ * interior_size() + mesh.num_edges() * edge_size();
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge(e).is_boundary())
      for (std::size_t i = 0; i < edge_size(); ++i)
        boundary_.push_back(edge_offset(e) + i);
}

std::vector<std::size_t> DofMap::local_to_global(const Mesh& mesh, std::size_t cell) const {
  std::vector<std::size_t> idx;
  idx.reserve(interior_size() + mesh.cell_edges(cell).size() * edge_size());
  for (std::size_t i = 0; i < interior_size(); ++i)
    idx.push_back(cell_offset(cell) + i);
  for (std::size_t e : mesh.cell_edges(cell))
    for (std::size_t i = 0; i < edge_size(); ++i)
      idx.push_back(edge_offset(e) + i);
  return idx;
}

DofMap build_dof_map(const Mesh& mesh, int k) { return DofMap(mesh, k); }

WeakField::WeakField(const Mesh& mesh, DofMap dofs, Eigen::VectorXd coeffs)
    : mesh_(&mesh), dofs_(std::move(dofs)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != dofs_.total_dofs())
    throw std::invalid_argument("WeakField: coefficient vector length does not match the DofMap");
}

Eigen::VectorXd WeakField::local(std::size_t cell) const {
  const auto idx = dofs_.local_to_global(*mesh_, cell);
  Eigen::VectorXd v(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = coeffs_[static_cast<Eigen::Index>(idx[i])];
  return v;
}

Eigen::VectorXd WeakField::interior(std::size_t cell) const {
  return coeffs_.segment(static_cast<Eigen::Index>(dofs_.cell_offset(cell)),
                         static_cast<Eigen::Index>(dofs_.interior_size()));
}

Eigen::VectorXd WeakField::edge(std::size_t edge) const {
  return coeffs_.segment(static_cast<Eigen::Index>(dofs_.edge_offset(edge)),
                         static_cast<Eigen::Index>(dofs_.edge_size()));
}

WeakField project_weak(const Mesh& mesh, const DofMap& dofs, const ScalarField& u,
                       int quad_degree) {
  const int k = dofs.degree();
  Eigen::VectorXd c(static_cast<Eigen::Index>(dofs.total_dofs()));
  for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell)
    c.segment(static_cast<Eigen::Index>(dofs.cell_offset(cell)),
              static_cast<Eigen::Index>(dofs.interior_size())) =
        project_interior(u, mesh, cell, k, quad_degree);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e)
    c.segment(static_cast<Eigen::Index>(dofs.edge_offset(e)),
              static_cast<Eigen::Index>(dofs.edge_size())) =
        project_edge(u, mesh, e, k, quad_degree);
  return WeakField(mesh, dofs, std::move(c));
}

LinearSystem assemble(const Mesh& mesh, const DofMap& dofs,
                      std::span<const LocalOperators> ops, const ScalarField& f) {
  if (ops.size() != mesh.num_cells())
    throw std::invalid_argument("assemble: one LocalOperators entry per cell is required");
  const int k = dofs.degree();
  const auto n = static_cast<Eigen::Index>(dofs.total_dofs());

  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t reserve = 0;
  for (const auto& op : ops)
    reserve += static_cast<std::size_t>(op.layout.total() * op.layout.total());
  triplets.reserve(reserve);

  LinearSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto idx = dofs.local_to_global(mesh, cell);
    const Eigen::MatrixXd local = ops[cell].system();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        triplets.emplace_back(static_cast<int>(idx[i]), static_cast<int>(idx[j]),
                              local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));

    const CellBasis basis(mesh, cell, k);
    const QuadratureRule rule = cell_quadrature(mesh, cell, assembly_quadrature_degree(k));
    auto load = sys.rhs.segment(static_cast<Eigen::Index>(dofs.cell_offset(cell)), basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
      load += (rule.weights[q] * f(rule.points[q])) * basis.values(rule.points[q]);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

LinearSystem assemble(const Mesh& mesh, int k, const ScalarField& f) {
  const DofMap dofs(mesh, k);
  const auto ops = local_operators(mesh, k);
  return assemble(mesh, dofs, ops, f);
}

ReducedSystem apply_dirichlet(const LinearSystem& system, const Mesh& mesh, const DofMap& dofs,
                              const ScalarField& g) {
  const auto n = static_cast<Eigen::Index>(dofs.total_dofs());
  ReducedSystem red;
  red.boundary_values = Eigen::VectorXd::Zero(n);
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge(e).is_boundary())
      continue;
    const auto off = static_cast<Eigen::Index>(dofs.edge_offset(e));
    red.boundary_values.segment(off, static_cast<Eigen::Index>(dofs.edge_size())) =
        project_edge(g, mesh, e, dofs.degree());
  }
  for (std::size_t i : dofs.boundary_edge_dofs())
    fixed[i] = true;

  std::vector<Eigen::Index> reduced_index(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) {
      reduced_index[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(red.free_dofs.size());
      red.free_dofs.push_back(static_cast<std::size_t>(i));
    }

  const auto nf = static_cast<Eigen::Index>(red.free_dofs.size());
  red.rhs.resize(nf);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  for (Eigen::Index r = 0; r < nf; ++r) {
    const auto row = static_cast<Eigen::Index>(red.free_dofs[static_cast<std::size_t>(r)]);
    double b = system.rhs[row];
    for (SparseMatrix::InnerIterator it(system.matrix, row); it; ++it) {
      const Eigen::Index c = reduced_index[static_cast<std::size_t>(it.col())];
      if (c >= 0)
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
      else
        b -= it.value() * red.boundary_values[it.col()];
    }
    red.rhs[r] = b;
  }
  red.matrix.resize(nf, nf);
  red.matrix.setFromTriplets(triplets.begin(), triplets.end());
  red.matrix.makeCompressed();
  return red;
}

Eigen::VectorXd solve(const ReducedSystem& system, SolveStats* stats, SolverMethod method) {
  const Eigen::Index n = system.matrix.rows();
  SolveStats local_stats;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  if (method == SolverMethod::Automatic)
    method = static_cast<std::size_t>(n) < kDenseThreshold ? SolverMethod::DenseCholesky
                                                           : SolverMethod::ConjugateGradient;
  const double bnorm = system.rhs.norm();
  if (n > 0 && bnorm > 0.0) {
    if (method == SolverMethod::DenseCholesky) {
      Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(system.matrix)};
      if (llt.info() != Eigen::Success)
        throw SolverError("dense Cholesky failed: reduced matrix is not positive definite", 0.0,
                          0);
      x = llt.solve(system.rhs);
      local_stats.direct = true;
    } else {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      const int max_iter = std::max(1, static_cast<int>(std::ceil(20.0 * std::sqrt(double(n)))));
      cg.setTolerance(kSolverTolerance);
      cg.setMaxIterations(max_iter);
      cg.compute(system.matrix);
      x = cg.solve(system.rhs);
      local_stats.iterations = static_cast<int>(cg.iterations());
    }
    local_stats.relative_residual = (system.rhs - system.matrix * x).norm() / bnorm;
    if (!(local_stats.relative_residual <= kSolverTolerance) && !local_stats.direct)
      throw SolverError("conjugate gradient did not converge", local_stats.relative_residual,
                        local_stats.iterations);
  }

  Eigen::VectorXd full = system.boundary_values;
  for (Eigen::Index i = 0; i < n; ++i)
    full[static_cast<Eigen::Index>(system.free_dofs[static_cast<std::size_t>(i)])] = x[i];
  if (stats)
    *stats = local_stats;
  return full;
}

bool is_positive_definite(const SparseMatrix& m) {
  const Eigen::SparseMatrix<double> cm(m);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(cm);
  return llt.info() == Eigen::Success;
}

double asymmetry(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix d = m - t;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < d.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(d, r); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

std::string write_field(const WeakField& field) {
  std::string out = "wgfield k=" + std::to_string(field.degree()) +
                    " dofs=" + std::to_string(field.dofs().total_dofs()) + "\n";
  for (Eigen::Index i = 0; i < field.coeffs().size(); ++i)
    out += format_double(field.coeffs()[i]) + "\n";
  return out;
}

Eigen::VectorXd read_field(std::string_view text, int* degree) {
  std::size_t pos = text.find('\n');
  const std::string_view header = text.substr(0, pos);
  int k = 0;
  std::size_t n = 0;
  {
    constexpr std::string_view tag = "wgfield k=";
    if (header.substr(0, tag.size()) != tag)
      throw ParseError(1, "missing wgfield header");
    const char* p = header.data() + tag.size();
    const char* end = header.data() + header.size();
    auto r1 = std::from_chars(p, end, k);
    constexpr std::string_view dtag = " dofs=";
    if (r1.ec != std::errc() || std::string_view(r1.ptr, end - r1.ptr).substr(0, dtag.size()) != dtag)
      throw ParseError(1, "malformed wgfield header");
    auto r2 = std::from_chars(r1.ptr + dtag.size(), end, n);
    if (r2.ec != std::errc() || r2.ptr != end)
      throw ParseError(1, "malformed wgfield header");
  }
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  std::size_t line = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (pos == std::string_view::npos)
      throw ParseError(line, "expected " + std::to_string(n) + " coefficients");
    const std::size_t start = pos + 1;
    pos = text.find('\n', start);
    const std::string_view tok =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++line;
    double v = 0.0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      throw ParseError(line, "bad coefficient '" + std::string(tok) + "'");
    c[static_cast<Eigen::Index>(i)] = v;
  }
  if (degree)
    *degree = k;
  return c;
}

} // namespace wg
