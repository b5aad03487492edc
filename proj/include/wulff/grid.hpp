#ifndef WULFF_GRID_HPP_
#define WULFF_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wulff/vec2.hpp"

namespace wulff {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Uniform cell-centered grid. Cell (i, j) has its center at
// origin + dx * (i, j); storage is row-major, index j * nx + i.
struct GridGeometry {
  int nx = 0;
  int ny = 0;
  double dx = 1.0;
  Vec2 origin{};

  GridGeometry() = default;
  GridGeometry(int nx_, int ny_, double dx_, Vec2 origin_);
  // nx x ny grid centered at the origin.
  static GridGeometry Centered(int nx, int ny, double dx);

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  Vec2 point(int i, int j) const { return {origin.x + dx * i, origin.y + dx * j}; }
  Vec2 point(std::size_t k) const { return point(static_cast<int>(k % nx), static_cast<int>(k / nx)); }
  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }
  bool same_shape(const GridGeometry& o) const { return nx == o.nx && ny == o.ny && dx == o.dx; }
  bool operator==(const GridGeometry& o) const { return same_shape(o) && origin == o.origin; }
  // Distance in cells from (i, j) to the nearest domain edge cell.
  int edge_distance(int i, int j) const;
};

struct Grid2D {
  GridGeometry geom;
  std::vector<double> v;

  Grid2D() = default;
  explicit Grid2D(const GridGeometry& g, double fill = 0.0) : geom(g), v(g.size(), fill) {}

  double& operator()(int i, int j) { return v[geom.index(i, j)]; }
  double operator()(int i, int j) const { return v[geom.index(i, j)]; }
  std::size_t size() const { return v.size(); }

  double min() const;
  double max() const;
  double max_abs() const;
  bool finite() const;
};

Grid2D sample(const GridGeometry& g, const std::function<double(Vec2)>& f);

struct SetMask {
  GridGeometry geom;
  std::vector<std::uint8_t> inside;

  SetMask() = default;
  explicit SetMask(const GridGeometry& g, bool fill = false) : geom(g), inside(g.size(), fill ? 1 : 0) {}

  bool operator()(int i, int j) const { return inside[geom.index(i, j)] != 0; }
  void set(int i, int j, bool b) { inside[geom.index(i, j)] = b ? 1 : 0; }
  std::size_t size() const { return inside.size(); }
  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * geom.dx * geom.dx; }
  bool empty() const { return count() == 0; }
  bool full() const { return count() == size(); }
  bool operator==(const SetMask& o) const { return geom == o.geom && inside == o.inside; }
};

SetMask mask_from(const GridGeometry& g, const std::function<bool(Vec2)>& pred);
// {values < level}.
SetMask below(const Grid2D& values, double level = 0.0);
SetMask complement(const SetMask& m);
SetMask set_union(const SetMask& a, const SetMask& b);
SetMask set_intersection(const SetMask& a, const SetMask& b);
// a subset of b.
bool subset(const SetMask& a, const SetMask& b);
// Cells of a not in b that are not 8-adjacent to a cell outside a.
std::size_t interior_difference(const SetMask& a, const SetMask& b);
// True when a and b differ only on cells 8-adjacent to the boundary of a.
bool equal_up_to_one_cell(const SetMask& a, const SetMask& b);
// Index of the first cell violating equal_up_to_one_cell, or -1.
std::ptrdiff_t first_mismatch_beyond_one_cell(const SetMask& a, const SetMask& b);
// Minimum over inside cells of the distance in cells to the domain edge.
int margin_cells(const SetMask& m);

// Connected-component labels (-1 outside the set). Returns the count.
int label_components(const SetMask& m, bool eight_connected, std::vector<int>& labels);
// Removes components of the set and of its complement with area below
// min_area. Returns the number of flipped cells.
std::size_t remove_small_components(SetMask& m, double min_area);

// Forward-difference gradient, zero on the last column / row.
void gradient(const Grid2D& w, Grid2D& gx, Grid2D& gy);
// Negative adjoint of gradient.
Grid2D divergence(const Grid2D& zx, const Grid2D& zy);
void divergence(const Grid2D& zx, const Grid2D& zy, Grid2D& out);

// Binary grid: "WFG2", u32 nx, u32 ny, f32 dx, then nx*ny little-endian f64
// values, row-major. The origin is not stored; reads return a centered grid.
void write_grid(const std::string& path, const Grid2D& g);
Grid2D read_grid(const std::string& path);

// PGM (P5, maxval 255, inside = 255). The first image row is j = ny - 1.
void write_pgm(const std::string& path, const SetMask& m);
SetMask read_pgm(const std::string& path, double dx);

}  // namespace wulff

#endif  // WULFF_GRID_HPP_
