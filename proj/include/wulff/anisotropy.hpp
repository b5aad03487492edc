#ifndef WULFF_ANISOTROPY_HPP_
#define WULFF_ANISOTROPY_HPP_

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wulff/vec2.hpp"

namespace wulff {

class InvalidAnisotropy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class AnisotropyKind { kPolygon, kSmoothTable, kEuclideanScaled };

const char* to_string(AnisotropyKind kind);

// Exposed face of the Wulff shape in a given normal direction. A point when
// first == second.
struct ExposedFace {
  Vec2 first;
  Vec2 second;

  bool is_point() const { return first == second; }
  Vec2 midpoint() const { return (first + second) * 0.5; }
};

namespace detail {

// Maps a direction to the sector [d_k, d_{k+1}) of a counterclockwise list of
// directions. Uses a monotone pseudo-angle instead of atan2.
class AngleIndex {
 public:
  AngleIndex() = default;
  explicit AngleIndex(const std::vector<Vec2>& dirs);

  std::size_t find(Vec2 dir) const;

 private:
  std::vector<double> sorted_;
  std::vector<int> bucket_first_;
  std::size_t start_ = 0;
  double bucket_scale_ = 1.0;
};

// Strictly convex polygon, counterclockwise, containing the origin in its
// interior. Unit ball of the gauge it induces.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  std::size_t size() const { return v_.size(); }
  const std::vector<Vec2>& vertices() const { return v_; }

  double gauge(Vec2 x) const;
  double support(Vec2 nu) const;
  ExposedFace face(Vec2 nu) const;
  Vec2 project(Vec2 p) const;

  double inradius() const;
  double circumradius() const;

 private:
  std::size_t ray_edge(Vec2 x) const;
  std::size_t support_vertex(Vec2 nu) const;
  double edge_gauge(std::size_t k, Vec2 x) const { return dot(normal_[k], x) / offset_[k]; }
  std::size_t next(std::size_t k) const { return k + 1 == v_.size() ? 0 : k + 1; }
  std::size_t prev(std::size_t k) const { return k == 0 ? v_.size() - 1 : k - 1; }
  bool small() const { return v_.size() <= 12; }

  std::vector<Vec2> v_;
  std::vector<Vec2> edge_;
  std::vector<Vec2> normal_;
  std::vector<double> offset_;
  std::vector<double> edge_len2_;
  AngleIndex vertex_angles_;
  AngleIndex normal_angles_;
};

}  // namespace detail

// Support function samples h(theta_k) with theta_k = 2 pi k / N and the first
// and second angular derivatives.
struct SupportSample {
  double h = 0.0;
  double dh = 0.0;
  double d2h = 0.0;
};

// A convex, even, one-homogeneous, coercive function on the plane, stored
// through its Wulff shape W = {gauge <= 1}. Immutable; copies share state.
class Anisotropy {
 public:
  // Vertices of W, counterclockwise, with v[k + n/2] = -v[k].
  static Anisotropy Polygon(std::vector<Vec2> vertices);
  // W = {x : x^T A x <= 1}, A symmetric positive definite.
  static Anisotropy EuclideanScaled(Sym2 matrix);
  static Anisotropy Euclidean() { return EuclideanScaled(Sym2{}); }
  // Dense support table of a smooth W: samples at theta_k = 2 pi k / N.
  static Anisotropy SmoothTable(std::vector<double> h, std::vector<double> dh,
                                std::vector<double> d2h);

  // W = [-half_side, half_side]^2.
  static Anisotropy Square(double half_side = 1.0);
  // Regular n-gon (n even) with unit circumradius and one vertex at angle phase.
  static Anisotropy RegularPolygon(int n, double phase = 0.0);

  AnisotropyKind kind() const { return kind_; }

  double gauge(Vec2 x) const;
  double polar(Vec2 nu) const;
  // Subdifferential of the polar at nu (the exposed face of W). Throws on nu = 0.
  ExposedFace cahn_hoffmann(Vec2 nu) const;
  // Euclidean projection onto W.
  Vec2 project(Vec2 p) const;
  // Projects every (x[i], y[i]) onto W in place.
  void project_in_place(std::span<double> x, std::span<double> y) const;

  double c0() const { return c0_; }
  double inradius() const;
  double circumradius() const;

  // Polygon and table kinds: vertices of the polygon representing W.
  const std::vector<Vec2>& vertices() const;
  // EuclideanScaled kind.
  const Sym2& matrix() const { return matrix_; }

  // SmoothTable kind.
  std::size_t table_size() const;
  const std::vector<double>& table_h() const;
  const std::vector<double>& table_dh() const;
  const std::vector<double>& table_d2h() const;
  // Periodic cubic Hermite interpolation of the support table.
  SupportSample support_derivatives(double theta) const;
  // Curvature of the boundary of W at the sample with normal angle theta_k.
  double sample_curvature(std::size_t k) const;

  // Points along the boundary of W, counterclockwise (for plotting and
  // brute-force checks).
  std::vector<Vec2> boundary_points(int n) const;

 private:
  Anisotropy() = default;

  struct Table {
    std::vector<double> h;
    std::vector<double> dh;
    std::vector<double> d2h;
  };

  AnisotropyKind kind_ = AnisotropyKind::kEuclideanScaled;
  std::shared_ptr<const detail::ConvexPolygon> polygon_;
  std::shared_ptr<const Table> table_;
  Sym2 matrix_{};
  Sym2 inverse_{};
  double eig_small_ = 1.0;  // smaller eigenvalue of matrix_
  double eig_large_ = 1.0;
  double eig_angle_ = 0.0;  // angle of the eigenvector for eig_large_
  double eig_cos_ = 1.0;
  double eig_sin_ = 0.0;
  double c0_ = 1.0;
};

// max over sampled directions of |polar_a - polar_b|, which equals the
// Hausdorff distance between the two Wulff shapes.
double wulff_hausdorff(const Anisotropy& a, const Anisotropy& b, int samples = 8192);

struct RegularizedAnisotropy {
  Anisotropy base;
  double epsilon = 0.0;
  Anisotropy result;
  int mollifier_samples = 0;
  double kernel_half_width = 0.0;   // radians
  double containment_scale = 1.0;   // homothety putting W_eps inside W
  double hausdorff = 0.0;           // d_H(W, W_eps)
};

// Smooth elliptic approximation from above: the radius of curvature of W (as
// a function of the normal angle) is mollified with a smooth even bump of
// half-width epsilon, an epsilon-ball is added, and the result is scaled to
// fit inside W. Requires a polygon or euclidean base and
// 0 < epsilon < inradius({polar <= 1}) / 2.
RegularizedAnisotropy regularize(const Anisotropy& base, double epsilon, int samples = 4096);

}  // namespace wulff

#endif  // WULFF_ANISOTROPY_HPP_
