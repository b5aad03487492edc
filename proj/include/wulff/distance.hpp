#ifndef WULFF_DISTANCE_HPP_
#define WULFF_DISTANCE_HPP_

#include <limits>
#include <vector>

#include "wulff/anisotropy.hpp"
#include "wulff/grid.hpp"

namespace wulff {

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Polyline {
  std::vector<Vec2> points;
  bool closed = true;

  double length() const;
};

enum class DistanceMethod { kAuto, kPropagate, kBruteForce };

// Interface segments of {f < 0} by marching squares over cell centers with
// linear interpolation. Saddle squares contribute both resolutions, so the
// segment set of -f equals that of f.
std::vector<Segment> interface_segments(const Grid2D& f);
// Same for a mask (crossings at the midpoints between cell centers).
std::vector<Segment> interface_segments(const SetMask& m);

// min over y in [s.a, s.b] of gauge(x - y).
double segment_distance(const Anisotropy& a, Vec2 x, const Segment& s);

// Signed anisotropic distance to the boundary of the mask: negative inside,
// positive outside. The boundary is the midpoint contour between inside and
// outside cell centers. signed_distance(complement(m)) == -signed_distance(m).
// With a finite band, |d| is exact up to band and clamped to band beyond;
// the sublevel sets {d < s} for |s| < band are unaffected.
Grid2D signed_distance(const SetMask& m, const Anisotropy& a, DistanceMethod method = DistanceMethod::kAuto,
                       double band = std::numeric_limits<double>::infinity());

// Signed distance to the zero level set of w (sub-cell, linear
// interpolation); inside = {w < -threshold}.
Grid2D signed_distance_to_level(const Grid2D& w, const Anisotropy& a, double threshold = 1e-12,
                                DistanceMethod method = DistanceMethod::kAuto,
                                double band = std::numeric_limits<double>::infinity());

// Gauge distance from every cell center to the nearest seed cell center.
// Cells are +infinity when there are no seeds or, with a finite limit, when
// the distance exceeds the limit.
Grid2D seed_distance(const SetMask& seeds, const Anisotropy& a, DistanceMethod method = DistanceMethod::kAuto,
                     double limit = std::numeric_limits<double>::infinity());

// Oriented zero contours of f (inside f < 0 on the left). Cells beyond the
// domain count as outside, so every polyline is closed.
std::vector<Polyline> extract_contours(const Grid2D& f);
// Contours of a mask, traced on its signed distance and lightly smoothed.
std::vector<Polyline> extract_contour(const SetMask& m, const Anisotropy& a);

// Midpoints of the cell edges separating inside from outside cells.
std::vector<Vec2> boundary_midpoints(const SetMask& m);
// Symmetric Euclidean Hausdorff distance between boundary midpoint sets.
double hausdorff_boundary(const SetMask& m1, const SetMask& m2);
double hausdorff_points(const std::vector<Vec2>& p, const std::vector<Vec2>& q);

}  // namespace wulff

#endif  // WULFF_DISTANCE_HPP_
