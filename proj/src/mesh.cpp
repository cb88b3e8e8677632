#include "wg/mesh.hpp"
#include "wg/format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wg {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int d1 = sign(orient(q1, q2, p1));
  const int d2 = sign(orient(q1, q2, p2));
  const int d3 = sign(orient(p1, p2, q1));
  const int d4 = sign(orient(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0)
    return true;
  return (d1 == 0 && on_segment(q1, q2, p1)) || (d2 == 0 && on_segment(q1, q2, p2)) ||
         (d3 == 0 && on_segment(p1, p2, q1)) || (d4 == 0 && on_segment(p1, p2, q2));
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

bool point_in_polygon(const Point& p, const std::vector<Point>& loop) {
  bool inside = false;
  const std::size_t m = loop.size();
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point& a = loop[i];
    const Point& b = loop[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x)
        inside = !inside;
    }
  }
  return inside;
}

double signed_area(const std::vector<Point>& loop) {
  const Point& o = loop.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < loop.size(); ++i)
    twice += cross(loop[i] - o, loop[i + 1] - o);
  return 0.5 * twice;
}

std::vector<Point> loop_points(const std::vector<Point>& vertices,
                               const std::vector<std::size_t>& loop) {
  std::vector<Point> pts;
  pts.reserve(loop.size());
  for (std::size_t v : loop)
    pts.push_back(vertices[v]);
  return pts;
}


} // namespace

bool lex_less(const Point& a, const Point& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

CellGeometry polygon_geometry(const std::vector<Point>& loop) {
  if (loop.size() < 3)
    throw GeometryError("polygon needs at least 3 vertices");
  CellGeometry g;
  const std::size_t m = loop.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      g.diameter = std::max(g.diameter, (loop[i] - loop[j]).norm());

  // Shoelace and centroid relative to the first vertex.
  const Point& o = loop.front();
  double twice_area = 0.0;
  Point moment = Point::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const Point a = loop[i] - o;
    const Point b = loop[(i + 1) % m] - o;
    const double w = cross(a, b);
    twice_area += w;
    moment += w * (a + b);
    g.perimeter += (b - a).norm();
  }
  g.area = 0.5 * twice_area;
  if (!(g.area >= 1e-14 * g.diameter * g.diameter))
    throw GeometryError("degenerate polygon (area " + format_double(g.area) + ")");
  g.centroid = o + moment / (3.0 * twice_area);

  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i)
    dmin = std::min(dmin, point_segment_distance(g.centroid, loop[i], loop[(i + 1) % m]));
  g.rho_proxy = dmin / g.diameter;
  if (!point_in_polygon(g.centroid, loop))
    g.rho_proxy = -g.rho_proxy;
  return g;
}

CellGeometry cell_geometry(const Mesh& mesh, std::size_t cell) {
  if (cell >= mesh.num_cells())
    throw std::out_of_range("cell index " + std::to_string(cell) + " out of range");
  return mesh.geometry(cell);
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  if (cells_.empty())
    throw ValidationError("mesh has no cells");
  for (std::size_t v = 0; v < vertices_.size(); ++v)
    if (!vertices_[v].allFinite())
      throw ValidationError("vertex " + std::to_string(v) + " has non-finite coordinates");
  {
    std::vector<std::size_t> order(vertices_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return lex_less(vertices_[a], vertices_[b]); });
    for (std::size_t i = 1; i < order.size(); ++i)
      if (vertices_[order[i]] == vertices_[order[i - 1]])
        throw ValidationError("vertices " + std::to_string(order[i - 1]) + " and " +
                              std::to_string(order[i]) + " coincide");
  }
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& loop = cells_[c];
    if (loop.size() < 3)
      throw ValidationError("fewer than 3 vertices", c);
    for (std::size_t v : loop)
      if (v >= vertices_.size())
        throw ValidationError("vertex index " + std::to_string(v) + " out of range", c);
    std::vector<std::size_t> sorted = loop;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ValidationError("repeated vertex in loop", c);
  }

  resolve_hanging_nodes();
  validate_cells();
  build_edges();

  domain_.min = domain_.max = vertices_.front();
  for (const Point& p : vertices_) {
    domain_.min = domain_.min.cwiseMin(p);
    domain_.max = domain_.max.cwiseMax(p);
  }
  validate_tiling();
}

void Mesh::resolve_hanging_nodes() {
  std::vector<std::size_t> by_x(vertices_.size());
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(),
            [&](std::size_t a, std::size_t b) { return vertices_[a].x() < vertices_[b].x(); });

  for (auto& loop : cells_) {
    std::vector<std::size_t> refined;
    refined.reserve(loop.size());
    const std::size_t m = loop.size();
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t ia = loop[i];
      const std::size_t ib = loop[(i + 1) % m];
      const Point& a = vertices_[ia];
      const Point& b = vertices_[ib];
      refined.push_back(ia);

      const Point ab = b - a;
      const double len2 = ab.squaredNorm();
      const double xlo = std::min(a.x(), b.x());
      const double xhi = std::max(a.x(), b.x());
      const double ylo = std::min(a.y(), b.y());
      const double yhi = std::max(a.y(), b.y());
      auto first = std::lower_bound(by_x.begin(), by_x.end(), xlo, [&](std::size_t v, double x) {
        return vertices_[v].x() < x;
      });
      std::vector<std::pair<double, std::size_t>> inner;
      for (auto it = first; it != by_x.end() && vertices_[*it].x() <= xhi; ++it) {
        const std::size_t v = *it;
        if (v == ia || v == ib)
          continue;
        const Point& p = vertices_[v];
        if (p.y() < ylo || p.y() > yhi)
          continue;
        const Point ap = p - a;
        if (std::abs(cross(ab, ap)) > 1e-12 * len2)
          continue;
        const double t = ap.dot(ab) / len2;
        if (t > 1e-12 && t < 1.0 - 1e-12)
          inner.emplace_back(t, v);
      }
      std::sort(inner.begin(), inner.end());
      for (const auto& [t, v] : inner)
        refined.push_back(v);
    }
    loop = std::move(refined);
  }
}

void Mesh::validate_cells() const {
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const std::vector<Point> pts = loop_points(vertices_, cells_[c]);
    const std::size_t m = pts.size();
    if (signed_area(pts) <= 0.0)
      throw ValidationError("vertex loop is not counter-clockwise", c);
    for (std::size_t i = 0; i < m; ++i) {
      const Point& prev = pts[(i + m - 1) % m];
      const Point& cur = pts[i];
      const Point& next = pts[(i + 1) % m];
      if (orient(prev, cur, next) == 0.0 && (prev - cur).dot(next - cur) > 0.0)
        throw ValidationError("polygon folds back on itself at local vertex " + std::to_string(i),
                              c);
      for (std::size_t j = i + 2; j < m; ++j) {
        if (i == 0 && j == m - 1)
          continue;
        if (segments_intersect(cur, next, pts[j], pts[(j + 1) % m]))
          throw ValidationError("polygon is not simple (sides " + std::to_string(i) + " and " +
                                    std::to_string(j) + " intersect)",
                                c);
      }
    }
    try {
      (void)polygon_geometry(pts);
    } catch (const GeometryError& e) {
      throw ValidationError(e.what(), c);
    }
  }
}

void Mesh::build_edges() {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
  cell_edges_.assign(cells_.size(), {});
  cell_edge_aligned_.assign(cells_.size(), {});
  geometry_.clear();
  geometry_.reserve(cells_.size());

  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& loop = cells_[c];
    const std::size_t m = loop.size();
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t a = loop[i];
      std::size_t b = loop[(i + 1) % m];
      const bool aligned = lex_less(vertices_[a], vertices_[b]);
      if (!aligned)
        std::swap(a, b);
      auto [it, inserted] = lookup.try_emplace({a, b}, edges_.size());
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.cells = {c, npos};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] != npos)
          throw ValidationError("edge " + std::to_string(a) + "-" + std::to_string(b) +
                                    " is shared by more than two cells",
                                c);
        const std::size_t other = e.cells[0];
        const auto& oe = cell_edges_[other];
        const auto pos = std::find(oe.begin(), oe.end(), it->second) - oe.begin();
        if (cell_edge_aligned_[other][pos] == aligned)
          throw ValidationError("cell overlaps cell " + std::to_string(other) + " along edge " +
                                    std::to_string(a) + "-" + std::to_string(b),
                                c);
        e.cells[1] = c;
      }
      cell_edges_[c].push_back(it->second);
      cell_edge_aligned_[c].push_back(aligned);
    }
    geometry_.push_back(polygon_geometry(loop_points(vertices_, loop)));
  }
}

void Mesh::validate_tiling() const {
  std::vector<bool> used(vertices_.size(), false);
  for (const auto& loop : cells_)
    for (std::size_t v : loop)
      used[v] = true;
  for (std::size_t v = 0; v < used.size(); ++v)
    if (!used[v])
      throw ValidationError("vertex " + std::to_string(v) + " is not used by any cell");

  const double scale = (domain_.max - domain_.min).norm();
  const double tol = 1e-12 * scale;
  auto on_side = [&](const Point& p, const Point& q) {
    return (std::abs(p.x() - domain_.min.x()) <= tol && std::abs(q.x() - domain_.min.x()) <= tol) ||
           (std::abs(p.x() - domain_.max.x()) <= tol && std::abs(q.x() - domain_.max.x()) <= tol) ||
           (std::abs(p.y() - domain_.min.y()) <= tol && std::abs(q.y() - domain_.min.y()) <= tol) ||
           (std::abs(p.y() - domain_.max.y()) <= tol && std::abs(q.y() - domain_.max.y()) <= tol);
  };
  for (const Edge& e : edges_)
    if (e.is_boundary() && !on_side(vertices_[e.vertices[0]], vertices_[e.vertices[1]]))
      throw ValidationError("non-conforming edge " + std::to_string(e.vertices[0]) + "-" +
                                std::to_string(e.vertices[1]) +
                                " has one neighbour but is not on the domain boundary",
                            e.cells[0]);

  double total = 0.0;
  for (const CellGeometry& g : geometry_)
    total += g.area;
  const double box = domain_.area();
  if (std::abs(total - box) > 1e-12 * box)
    throw ValidationError("cells do not tile the bounding box (area " + format_double(total) +
                          " vs " + format_double(box) + ")");
}

std::size_t Mesh::num_boundary_edges() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.is_boundary(); }));
}

double Mesh::edge_length(std::size_t e) const {
  return (vertices_[edges_[e].vertices[1]] - vertices_[edges_[e].vertices[0]]).norm();
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (const CellGeometry& g : geometry_)
    h = std::max(h, g.diameter);
  return h;
}

double Mesh::min_edge_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < edges_.size(); ++e)
    m = std::min(m, edge_length(e));
  return m;
}

Mesh Mesh::scaled(double s) const {
  if (!(s > 0.0))
    throw std::invalid_argument("scale factor must be positive");
  std::vector<Point> v = vertices_;
  for (Point& p : v)
    p *= s;
  return Mesh(std::move(v), cells_);
}

Mesh load_mesh(std::string_view text) {
  std::vector<Point> vertices;
  std::vector<std::vector<std::size_t>> cells;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);

    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
        ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
        ++j;
      if (j > i)
        tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty())
      continue;

    auto parse_double = [&](std::string_view tok) {
      double v = 0.0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(lineno, "bad number '" + std::string(tok) + "'");
      return v;
    };
    auto parse_index = [&](std::string_view tok) {
      std::size_t v = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(lineno, "bad vertex index '" + std::string(tok) + "'");
      return v;
    };

    if (tokens[0] == "v") {
      if (tokens.size() != 3)
        throw ParseError(lineno, "vertex line needs exactly 2 coordinates");
      vertices.emplace_back(parse_double(tokens[1]), parse_double(tokens[2]));
    } else if (tokens[0] == "c") {
      if (tokens.size() < 4)
        throw ParseError(lineno, "cell line needs at least 3 vertex indices");
      std::vector<std::size_t> loop;
      for (std::size_t t = 1; t < tokens.size(); ++t)
        loop.push_back(parse_index(tokens[t]));
      cells.push_back(std::move(loop));
    } else {
      throw ParseError(lineno, "unknown record '" + std::string(tokens[0]) + "'");
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_mesh(ss.str());
}

std::string write_mesh(const Mesh& mesh) {
  std::string out;
  out += "# wg polygonal mesh: " + std::to_string(mesh.num_vertices()) + " vertices, " +
         std::to_string(mesh.num_cells()) + " cells\n";
  for (const Point& p : mesh.vertices())
    out += "v " + format_double(p.x()) + " " + format_double(p.y()) + "\n";
  for (const auto& loop : mesh.cells()) {
    out += "c";
    for (std::size_t v : loop)
      out += " " + std::to_string(v);
    out += "\n";
  }
  return out;
}

Mesh gen_uniform_squares(int n) {
  if (n < 1)
    throw std::invalid_argument("gen_uniform_squares: n must be >= 1");
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  std::vector<Point> vertices;
  vertices.reserve(stride * stride);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(static_cast<std::size_t>(n) * n);
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
      cells.push_back({j * stride + i, j * stride + i + 1, (j + 1) * stride + i + 1,
                       (j + 1) * stride + i});
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh gen_small_edge_family(int n, double eps) {
  if (n < 1)
    throw std::invalid_argument("gen_small_edge_family: n must be >= 1");
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("gen_small_edge_family: eps must lie in (0, 1/2)");
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::size_t stride = nn + 1;
  std::vector<Point> vertices;
  for (std::size_t j = 0; j <= nn; ++j)
    for (std::size_t i = 0; i <= nn; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

  // split[j][i]: extra vertex on the side x = i/n, j/n <= y <= (j+1)/n.
  std::vector<std::vector<std::size_t>> split(nn, std::vector<std::size_t>(stride, npos));
  for (std::size_t j = 0; j < nn; ++j)
    for (std::size_t i = 1; i < nn; ++i) {
      split[j][i] = vertices.size();
      vertices.emplace_back(static_cast<double>(i) / n, (static_cast<double>(j) + eps) / n);
    }

  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(nn * nn);
  for (std::size_t j = 0; j < nn; ++j)
    for (std::size_t i = 0; i < nn; ++i) {
      std::vector<std::size_t> loop{j * stride + i, j * stride + i + 1};
      if (split[j][i + 1] != npos)
        loop.push_back(split[j][i + 1]);
      loop.push_back((j + 1) * stride + i + 1);
      loop.push_back((j + 1) * stride + i);
      if (split[j][i] != npos)
        loop.push_back(split[j][i]);
      cells.push_back(std::move(loop));
    }
  return Mesh(std::move(vertices), std::move(cells));
}

} // namespace wg
