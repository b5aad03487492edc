#include "wulff/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wulff {

double Polyline::length() const {
  double s = 0.0;
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) s += (points[k + 1] - points[k]).norm();
  if (closed) s += (points.front() - points.back()).norm();
  return s;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieBreak = 1e-7;

// Crossing on the edge between centers p (lower index) and q.
Vec2 crossing(Vec2 p, Vec2 q, double fp, double fq) {
  const double t = fp / (fp - fq);
  return p + (q - p) * t;
}

struct PlacedSegment {
  Segment s;
  int i;  // square (i, j) with corners (i, j) .. (i + 1, j + 1)
  int j;
};

std::vector<PlacedSegment> placed_segments(const Grid2D& f) {
  const GridGeometry& g = f.geom;
  std::vector<PlacedSegment> out;
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const double v[4] = {f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)};
      const bool in[4] = {v[0] < 0, v[1] < 0, v[2] < 0, v[3] < 0};
      const int n_in = in[0] + in[1] + in[2] + in[3];
      if (n_in == 0 || n_in == 4) continue;
      const Vec2 c[4] = {g.point(i, j), g.point(i + 1, j), g.point(i + 1, j + 1), g.point(i, j + 1)};
      // Edges oriented from the lower-index corner: e0 c0->c1, e1 c1->c2,
      // e2 c3->c2, e3 c0->c3.
      Vec2 x[4];
      bool has[4];
      has[0] = in[0] != in[1];
      has[1] = in[1] != in[2];
      has[2] = in[3] != in[2];
      has[3] = in[0] != in[3];
      if (has[0]) x[0] = crossing(c[0], c[1], v[0], v[1]);
      if (has[1]) x[1] = crossing(c[1], c[2], v[1], v[2]);
      if (has[2]) x[2] = crossing(c[3], c[2], v[3], v[2]);
      if (has[3]) x[3] = crossing(c[0], c[3], v[0], v[3]);
      const bool saddle = n_in == 2 && in[0] == in[2];
      if (saddle) {
        for (int e = 0; e < 4; ++e) out.push_back({{x[e], x[(e + 1) % 4]}, i, j});
      } else {
        int e0 = -1, e1 = -1;
        for (int e = 0; e < 4; ++e) {
          if (!has[e]) continue;
          (e0 < 0 ? e0 : e1) = e;
        }
        out.push_back({{x[e0], x[e1]}, i, j});
      }
    }
  }
  return out;
}

Grid2D mask_levels(const SetMask& m) {
  Grid2D f(m.geom);
  for (std::size_t k = 0; k < m.size(); ++k) f.v[k] = m.inside[k] ? -1.0 : 1.0;
  return f;
}

struct Box {
  int i0, j0, i1, j1;  // inclusive
};

// Closest-feature propagation over a 7x7 stencil with alternating raster
// sweeps until no cell changes. A neighbor's owner is only offered again if it
// changed since this cell last looked in that direction, which is at most
// three sweeps ago. Candidates above `limit` are rejected.
template <class Dist>
void propagate(const GridGeometry& g, std::vector<int>& owner, std::vector<double>& dist, const Dist& fd,
               double limit, Box box) {
  constexpr int kR = 3;
  constexpr int kHalf = 2 * kR * kR + 2 * kR;
  const int nx = g.nx;
  std::vector<int> stamp(g.size(), 0);
  int quiet = 0;
  for (int sweep = 0; quiet < 4 && sweep < 128; ++sweep) {
    const int d = sweep % 4;
    const int sx = (d & 1) ? -1 : 1;
    const int sy = (d & 2) ? -1 : 1;
    int off_i[kHalf];
    int off_j[kHalf];
    int n_off = 0;
    for (int dj = -kR; dj <= kR; ++dj) {
      for (int di = -kR; di <= kR; ++di) {
        if (dj * sy < 0 || (dj == 0 && di * sx < 0)) {
          off_i[n_off] = di;
          off_j[n_off] = dj;
          ++n_off;
        }
      }
    }
    const int fresh = sweep - 3;
    bool changed = false;
    for (int jj = box.j0; jj <= box.j1; ++jj) {
      const int j = sy > 0 ? jj : box.j0 + box.j1 - jj;
      for (int ii = box.i0; ii <= box.i1; ++ii) {
        const int i = sx > 0 ? ii : box.i0 + box.i1 - ii;
        const std::size_t k = g.index(i, j);
        if (dist[k] == 0.0) continue;  // seeds cannot improve
        int cur = owner[k];
        double best = std::min(dist[k], limit);
        int tried[kHalf];
        int n_tried = 0;
        for (int q = 0; q < n_off; ++q) {
          const int a = i + off_i[q];
          const int b = j + off_j[q];
          if (a < box.i0 || b < box.j0 || a > box.i1 || b > box.j1) continue;
          const std::size_t kn = static_cast<std::size_t>(b) * nx + a;
          if (stamp[kn] < fresh) continue;
          const int o = owner[kn];
          if (o < 0 || o == cur) continue;
          bool seen = false;
          for (int t = 0; t < n_tried; ++t) seen = seen || tried[t] == o;
          if (seen) continue;
          tried[n_tried++] = o;
          const double dv = fd(o, g.point(i, j));
          if (dv < best) {
            best = dv;
            cur = o;
          }
        }
        if (cur != owner[k]) {
          owner[k] = cur;
          dist[k] = best;
          stamp[k] = sweep;
          changed = true;
        }
      }
    }
    quiet = changed ? 0 : quiet + 1;
  }
}

// Per-segment data for repeated distance queries: the polar value and the
// exposed face depend only on the side of the segment.
struct SegmentQuery {
  Vec2 a;
  Vec2 b;
  Vec2 e;
  Vec2 n;
  double len2 = 0.0;
  double inv_polar[2] = {0.0, 0.0};  // side +n, side -n
  ExposedFace face[2];

  SegmentQuery(const Anisotropy& an, const Segment& s) : a(s.a), b(s.b), e(s.b - s.a), n(perp(s.b - s.a)) {
    len2 = e.norm2();
    if (len2 < 1e-28) return;
    inv_polar[0] = 1.0 / an.polar(n);
    inv_polar[1] = 1.0 / an.polar(-n);
    face[0] = an.cahn_hoffmann(n);
    face[1] = an.cahn_hoffmann(-n);
  }

  double gauge_distance(const Anisotropy& an, Vec2 x) const {
    const Vec2 xa = x - a;
    if (len2 < 1e-28) return an.gauge(xa);
    const double side = dot(n, xa);
    if (side == 0.0) {
      const double t = dot(xa, e) / len2;
      return (t >= 0.0 && t <= 1.0) ? 0.0 : std::min(an.gauge(xa), an.gauge(x - b));
    }
    const int k = side > 0.0 ? 0 : 1;
    const double line = std::abs(side) * inv_polar[k];
    // Minimizers on the line are x - line * p with p in the exposed face; the
    // line distance never exceeds the endpoint distances.
    const double t1 = dot(xa - face[k].first * line, e) / len2;
    const double t2 = dot(xa - face[k].second * line, e) / len2;
    if (std::max(t1, t2) >= 0.0 && std::min(t1, t2) <= 1.0) return line;
    return std::min(an.gauge(xa), an.gauge(x - b));
  }

  double euclidean_distance(Vec2 x) const {
    const Vec2 xa = x - a;
    if (len2 < 1e-28) return xa.norm();
    const double t = std::clamp(dot(xa, e) / len2, 0.0, 1.0);
    return (xa - e * t).norm();
  }
};

std::vector<double> unsigned_segment_distance(const GridGeometry& g, const std::vector<PlacedSegment>& segs,
                                              const Anisotropy& a, DistanceMethod method, double band) {
  std::vector<double> dist(g.size(), kInf);
  std::vector<SegmentQuery> q;
  q.reserve(segs.size());
  for (const auto& s : segs) q.emplace_back(a, s.s);
  const bool brute =
      method == DistanceMethod::kBruteForce || (method == DistanceMethod::kAuto && g.nx * g.ny < 64 * 64);
  if (brute) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.point(k);
      double best = kInf;
      for (const auto& s : q) best = std::min(best, s.gauge_distance(a, x));
      dist[k] = std::min(best, band);
    }
    return dist;
  }
  // Ties of polygonal gauges form 2D regions; a small Euclidean term makes
  // the closest feature unique so that propagation does not stall.
  auto key = [&](int o, Vec2 x) {
    const SegmentQuery& s = q[static_cast<std::size_t>(o)];
    return s.gauge_distance(a, x) + kTieBreak * s.euclidean_distance(x);
  };
  std::vector<int> owner(g.size(), -1);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto& ps = segs[s];
    for (int j = ps.j - 1; j <= ps.j + 2; ++j) {
      for (int i = ps.i - 1; i <= ps.i + 2; ++i) {
        if (!g.contains(i, j)) continue;
        const std::size_t k = g.index(i, j);
        const double d = key(static_cast<int>(s), g.point(i, j));
        if (d < dist[k]) {
          dist[k] = d;
          owner[k] = static_cast<int>(s);
        }
      }
    }
  }
  Box box{g.nx, g.ny, -1, -1};
  for (const auto& ps : segs) {
    box = {std::min(box.i0, ps.i), std::min(box.j0, ps.j), std::max(box.i1, ps.i + 1), std::max(box.j1, ps.j + 1)};
  }
  double limit = kInf;
  if (std::isfinite(band)) {
    // gauge >= c0 * |x|, so the band lies within band / c0 of the segments.
    const double reach = band / (a.c0() * g.dx) + 4.0;
    const int m = reach < g.nx + g.ny ? static_cast<int>(std::ceil(reach)) : g.nx + g.ny;
    box = {std::max(0, box.i0 - m), std::max(0, box.j0 - m), std::min(g.nx - 1, box.i1 + m),
           std::min(g.ny - 1, box.j1 + m)};
    limit = band * (1.0 + 2.0 * kTieBreak / a.c0()) + 1e-12;
  } else {
    box = {0, 0, g.nx - 1, g.ny - 1};
  }
  propagate(g, owner, dist, key, limit, box);
  for (std::size_t k = 0; k < g.size(); ++k) {
    dist[k] = owner[k] < 0 ? band
                           : std::min(band, q[static_cast<std::size_t>(owner[k])].gauge_distance(a, g.point(k)));
  }
  return dist;
}

Grid2D signed_from(const Grid2D& f, const Anisotropy& a, DistanceMethod method, double band) {
  if (!(band > 0.0)) throw GridError("signed distance: band must be positive");
  const auto segs = placed_segments(f);
  if (segs.empty()) throw GridError("signed distance: set is empty or fills the domain");
  auto dist = unsigned_segment_distance(f.geom, segs, a, method, band);
  Grid2D d(f.geom);
  for (std::size_t k = 0; k < d.size(); ++k) d.v[k] = f.v[k] < 0 ? -dist[k] : dist[k];
  return d;
}

}  // namespace

std::vector<Segment> interface_segments(const Grid2D& f) {
  std::vector<Segment> out;
  for (const auto& p : placed_segments(f)) out.push_back(p.s);
  return out;
}

std::vector<Segment> interface_segments(const SetMask& m) { return interface_segments(mask_levels(m)); }

double segment_distance(const Anisotropy& a, Vec2 x, const Segment& s) {
  return SegmentQuery(a, s).gauge_distance(a, x);
}

Grid2D signed_distance(const SetMask& m, const Anisotropy& a, DistanceMethod method, double band) {
  return signed_from(mask_levels(m), a, method, band);
}

Grid2D signed_distance_to_level(const Grid2D& w, const Anisotropy& a, double threshold, DistanceMethod method,
                                double band) {
  Grid2D f(w.geom);
  for (std::size_t k = 0; k < w.size(); ++k) f.v[k] = w.v[k] + threshold;
  return signed_from(f, a, method, band);
}

Grid2D seed_distance(const SetMask& seeds, const Anisotropy& a, DistanceMethod method, double limit) {
  const GridGeometry& g = seeds.geom;
  Grid2D out(g, kInf);
  std::vector<int> ids;
  Box box{g.nx, g.ny, -1, -1};
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!seeds(i, j)) continue;
      ids.push_back(static_cast<int>(g.index(i, j)));
      box = {std::min(box.i0, i), std::min(box.j0, j), std::max(box.i1, i), std::max(box.j1, j)};
    }
  }
  if (ids.empty()) return out;
  const bool brute =
      method == DistanceMethod::kBruteForce || (method == DistanceMethod::kAuto && g.nx * g.ny < 64 * 64);
  if (brute) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.point(k);
      double best = kInf;
      for (int s : ids) best = std::min(best, a.gauge(x - g.point(static_cast<std::size_t>(s))));
      out.v[k] = best <= limit ? best : kInf;
    }
    return out;
  }
  std::vector<int> owner(g.size(), -1);
  for (int s : ids) {
    owner[static_cast<std::size_t>(s)] = s;
    out.v[static_cast<std::size_t>(s)] = 0.0;
  }
  auto key = [&](int o, Vec2 x) {
    const Vec2 y = x - g.point(static_cast<std::size_t>(o));
    return a.gauge(y) + kTieBreak * y.norm();
  };
  double key_limit = kInf;
  if (std::isfinite(limit)) {
    const double reach = limit / (a.c0() * g.dx) + 4.0;
    const int m = reach < g.nx + g.ny ? static_cast<int>(std::ceil(reach)) : g.nx + g.ny;
    box = {std::max(0, box.i0 - m), std::max(0, box.j0 - m), std::min(g.nx - 1, box.i1 + m),
           std::min(g.ny - 1, box.j1 + m)};
    key_limit = limit * (1.0 + 2.0 * kTieBreak / a.c0()) + 1e-12;
  } else {
    box = {0, 0, g.nx - 1, g.ny - 1};
  }
  propagate(g, owner, out.v, key, key_limit, box);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (owner[k] < 0) {
      out.v[k] = kInf;
      continue;
    }
    const double d = a.gauge(g.point(k) - g.point(static_cast<std::size_t>(owner[k])));
    out.v[k] = d <= limit ? d : kInf;
  }
  return out;
}

std::vector<Polyline> extract_contours(const Grid2D& f) {
  const GridGeometry& g = f.geom;
  const int px = g.nx + 2;
  const int py = g.ny + 2;
  const double outside = 0.5 * g.dx;
  auto val = [&](int i, int j) { return g.contains(i, j) ? f(i, j) : outside; };
  // Edge ids in padded coordinates: horizontal (i,j)-(i+1,j) -> 2 * idx,
  // vertical (i,j)-(i,j+1) -> 2 * idx + 1.
  auto hid = [&](int i, int j) { return 2 * ((j + 1) * px + (i + 1)); };
  auto vid = [&](int i, int j) { return 2 * ((j + 1) * px + (i + 1)) + 1; };
  std::vector<int> next(static_cast<std::size_t>(2 * px * py), -1);
  std::vector<Vec2> point(next.size());
  for (int j = -1; j < g.ny; ++j) {
    for (int i = -1; i < g.nx; ++i) {
      const double v[4] = {val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
      const bool in[4] = {v[0] < 0, v[1] < 0, v[2] < 0, v[3] < 0};
      const int n_in = in[0] + in[1] + in[2] + in[3];
      if (n_in == 0 || n_in == 4) continue;
      const Vec2 c[4] = {g.point(i, j), g.point(i + 1, j), g.point(i + 1, j + 1), g.point(i, j + 1)};
      const int id[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      // Lower-index corner first for bitwise-consistent crossings.
      const int lo[4] = {0, 1, 3, 0};
      const int hi[4] = {1, 2, 2, 3};
      bool has[4];
      for (int e = 0; e < 4; ++e) {
        has[e] = in[e] != in[(e + 1) % 4];
        if (has[e]) point[static_cast<std::size_t>(id[e])] = crossing(c[lo[e]], c[hi[e]], v[lo[e]], v[hi[e]]);
      }
      const bool saddle = n_in == 2 && in[0] == in[2];
      const bool connected = saddle && (v[0] + v[1] + v[2] + v[3]) < 0.0;
      for (int e = 0; e < 4; ++e) {
        // Walking the corners counterclockwise, edge e goes from inside to
        // outside: pair with the next (inside connected) or previous
        // outside-to-inside crossing.
        if (!has[e] || !in[e]) continue;
        int target = -1;
        for (int s = 1; s < 4; ++s) {
          const int cand = connected || !saddle ? (e + s) % 4 : (e + 4 - s) % 4;
          if (has[cand] && !in[cand]) {
            target = cand;
            break;
          }
        }
        next[static_cast<std::size_t>(id[e])] = id[target];
      }
    }
  }
  std::vector<Polyline> out;
  std::vector<char> used(next.size(), 0);
  for (std::size_t start = 0; start < next.size(); ++start) {
    if (next[start] < 0 || used[start]) continue;
    Polyline p;
    std::size_t cur = start;
    while (!used[cur] && next[cur] >= 0) {
      used[cur] = 1;
      p.points.push_back(point[cur]);
      cur = static_cast<std::size_t>(next[cur]);
    }
    p.closed = cur == start;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Polyline> extract_contour(const SetMask& m, const Anisotropy& a) {
  if (m.empty() || m.full()) throw GridError("extract_contour: mask is empty or full");
  auto lines = extract_contours(signed_distance(m, a));
  // Two [1 2 1]/4 passes remove the pixel staircase.
  for (auto& l : lines) {
    const std::size_t n = l.points.size();
    if (!l.closed || n < 4) continue;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<Vec2> s(n);
      for (std::size_t k = 0; k < n; ++k) {
        s[k] = (l.points[(k + n - 1) % n] + l.points[k] * 2.0 + l.points[(k + 1) % n]) * 0.25;
      }
      l.points.swap(s);
    }
  }
  return lines;
}

std::vector<Vec2> boundary_midpoints(const SetMask& m) {
  const GridGeometry& g = m.geom;
  std::vector<Vec2> out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const bool x = m(i, j);
      if (i + 1 < g.nx && m(i + 1, j) != x) out.push_back(g.point(i, j) + Vec2{0.5 * g.dx, 0.0});
      if (j + 1 < g.ny && m(i, j + 1) != x) out.push_back(g.point(i, j) + Vec2{0.0, 0.5 * g.dx});
    }
  }
  return out;
}

double hausdorff_points(const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
  if (p.empty() || q.empty()) throw GridError("hausdorff: empty point set");
  auto directed = [](const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double worst = 0.0;
    for (const Vec2& x : a) {
      double best = kInf;
      for (const Vec2& y : b) {
        const double d = (x - y).norm2();
        if (d < best) {
          best = d;
          if (best <= worst) break;
        }
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(p, q), directed(q, p));
}

double hausdorff_boundary(const SetMask& m1, const SetMask& m2) {
  if (!m1.geom.same_shape(m2.geom)) throw GridError("hausdorff: shape mismatch");
  if (m1.empty() || m1.full() || m2.empty() || m2.full()) throw GridError("hausdorff: degenerate mask");
  if (m1.inside == m2.inside) return 0.0;
  return hausdorff_points(boundary_midpoints(m1), boundary_midpoints(m2));
}

}  // namespace wulff
