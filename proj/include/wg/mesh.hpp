#pragma once

// Conforming polygonal meshes of a rectangular domain.
//
// A Mesh owns vertex coordinates and counter-clockwise vertex loops. The edge
// set is derived: one entry per geometric segment, oriented from its
// lexicographically smaller endpoint. Hanging nodes (a vertex of one cell lying
// inside a side of a neighbour) are resolved at construction by splitting the
// side, so each edge is shared by at most two cells.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wg/error.hpp"

namespace wg {

using Point = Eigen::Vector2d;

struct BoundingBox {
  Point min{0.0, 0.0};
  Point max{0.0, 0.0};
  double area() const { return (max - min).prod(); }
};

struct Edge {
  std::array<std::size_t, 2> vertices{};  // vertices[0] is the lexicographically smaller point
  std::array<std::size_t, 2> cells{npos, npos}; // cells[1] == npos on the boundary
  bool is_boundary() const { return cells[1] == npos; }
};

struct CellGeometry {
  double diameter = 0.0;  // h_D
  double area = 0.0;
  double perimeter = 0.0;
  Point centroid{0.0, 0.0};
  /// Radius of the largest centroid-centred disc inside the cell, divided by the
  /// diameter. Negative when the centroid falls outside the cell.
  double rho_proxy = 0.0;
};

class Mesh {
public:
  /// Validates and normalizes; throws ValidationError naming the offending cell.
  Mesh(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells);

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  const std::vector<std::vector<std::size_t>>& cells() const { return cells_; }
  const std::vector<std::size_t>& cell(std::size_t c) const { return cells_[c]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_boundary_edges() const;
  std::size_t num_interior_edges() const { return num_edges() - num_boundary_edges(); }

  /// Edge ids of cell c; entry i is the side cell(c)[i] -> cell(c)[i+1].
  const std::vector<std::size_t>& cell_edges(std::size_t c) const { return cell_edges_[c]; }
  /// True where the cell traverses the side along the edge's own orientation.
  const std::vector<bool>& cell_edge_aligned(std::size_t c) const { return cell_edge_aligned_[c]; }

  const CellGeometry& geometry(std::size_t c) const { return geometry_[c]; }
  const BoundingBox& domain() const { return domain_; }

  double edge_length(std::size_t e) const;
  /// Largest cell diameter.
  double mesh_size() const;
  double min_edge_length() const;

  /// Copy with every coordinate multiplied by s > 0.
  Mesh scaled(double s) const;

private:
  void resolve_hanging_nodes();
  void validate_cells() const;
  void build_edges();
  void validate_tiling() const;

  std::vector<Point> vertices_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> cell_edges_;
  std::vector<std::vector<bool>> cell_edge_aligned_;
  std::vector<CellGeometry> geometry_;
  BoundingBox domain_;
};

/// Geometry of a single polygon given as a CCW loop.
/// Throws GeometryError when the area falls below 1e-14 h_D^2.
CellGeometry polygon_geometry(const std::vector<Point>& loop);

CellGeometry cell_geometry(const Mesh& mesh, std::size_t cell);

/// Lexicographic (x, then y) order used to orient edges.
bool lex_less(const Point& a, const Point& b);

// Text format: `v x y` lines, `c i0 i1 ...` lines, `#` comments.
Mesh load_mesh(std::string_view text);
Mesh read_mesh_file(const std::string& path);
std::string write_mesh(const Mesh& mesh);

/// n x n squares on the unit square.
Mesh gen_uniform_squares(int n);

/// n x n squares where every interior vertical side gets an extra vertex at
/// distance eps/n above its lower end, giving one edge of length eps/n.
Mesh gen_small_edge_family(int n, double eps);

} // namespace wg
