#include "wulff/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace wulff {

const char* to_string(AnisotropyKind kind) {
  switch (kind) {
    case AnisotropyKind::kPolygon:
      return "polygon";
    case AnisotropyKind::kSmoothTable:
      return "smoothTable";
    case AnisotropyKind::kEuclideanScaled:
      return "euclideanScaled";
  }
  return "unknown";
}

namespace detail {

constexpr double kPi = std::numbers::pi;

double pseudo_angle(Vec2 v) {
  const double p = v.y / (std::abs(v.x) + std::abs(v.y));
  if (v.x >= 0.0) return p;
  return v.y >= 0.0 ? 2.0 - p : -2.0 - p;
}

AngleIndex::AngleIndex(const std::vector<Vec2>& dirs) {
  const std::size_t n = dirs.size();
  std::vector<double> angles(n);
  for (std::size_t k = 0; k < n; ++k) angles[k] = pseudo_angle(dirs[k]);
  start_ = static_cast<std::size_t>(std::min_element(angles.begin(), angles.end()) - angles.begin());
  sorted_.resize(n);
  for (std::size_t m = 0; m < n; ++m) sorted_[m] = angles[(start_ + m) % n];
  for (std::size_t m = 1; m < n; ++m) {
    if (sorted_[m] < sorted_[m - 1]) throw std::invalid_argument("angles are not cyclically increasing");
  }
  const std::size_t buckets = std::max<std::size_t>(64, 2 * n);
  bucket_scale_ = static_cast<double>(buckets) / 4.0;
  bucket_first_.assign(buckets, -1);
  int m = -1;
  for (std::size_t b = 0; b < buckets; ++b) {
    const double lo = -2.0 + static_cast<double>(b) / bucket_scale_;
    while (m + 1 < static_cast<int>(n) && sorted_[static_cast<std::size_t>(m + 1)] <= lo) ++m;
    bucket_first_[b] = m;
  }
}

std::size_t AngleIndex::find(Vec2 dir) const {
  const std::size_t n = sorted_.size();
  const double angle = pseudo_angle(dir);
  auto b = static_cast<long>((angle + 2.0) * bucket_scale_);
  b = std::clamp<long>(b, 0, static_cast<long>(bucket_first_.size()) - 1);
  int m = bucket_first_[static_cast<std::size_t>(b)];
  while (m + 1 < static_cast<int>(n) && sorted_[static_cast<std::size_t>(m + 1)] <= angle) ++m;
  if (m < 0) return (start_ + n - 1) % n;
  return (start_ + static_cast<std::size_t>(m)) % n;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
  const std::size_t n = v_.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  edge_.resize(n);
  normal_.resize(n);
  offset_.resize(n);
  edge_len2_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    edge_[k] = v_[next(k)] - v_[k];
    edge_len2_[k] = edge_[k].norm2();
    if (!(edge_len2_[k] > 0.0)) throw std::invalid_argument("polygon has repeated vertices");
    const double len = std::sqrt(edge_len2_[k]);
    normal_[k] = Vec2{edge_[k].y / len, -edge_[k].x / len};
    offset_[k] = dot(normal_[k], v_[k]);
    if (!(offset_[k] > 0.0)) throw std::invalid_argument("origin is not interior to the polygon");
  }
  double turning = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = edge_[k];
    const Vec2 b = edge_[next(k)];
    const double c = cross(a, b);
    if (!(c > 1e-14 * std::sqrt(edge_len2_[k] * edge_len2_[next(k)]))) {
      throw std::invalid_argument("polygon is not strictly convex and counterclockwise");
    }
    turning += std::atan2(c, dot(a, b));
  }
  if (std::abs(turning - 2.0 * kPi) > 1e-6) throw std::invalid_argument("polygon winds more than once");

  vertex_angles_ = AngleIndex(v_);
  normal_angles_ = AngleIndex(normal_);
}

std::size_t ConvexPolygon::ray_edge(Vec2 x) const {
  if (small()) {
    std::size_t best = 0;
    double val = edge_gauge(0, x);
    for (std::size_t k = 1; k < v_.size(); ++k) {
      const double g = edge_gauge(k, x);
      if (g > val) {
        val = g;
        best = k;
      }
    }
    return best;
  }
  const std::size_t k = vertex_angles_.find(x);
  std::size_t best = k;
  double val = edge_gauge(k, x);
  for (std::size_t c : {prev(k), next(k)}) {
    const double g = edge_gauge(c, x);
    if (g > val) {
      val = g;
      best = c;
    }
  }
  return best;
}

double ConvexPolygon::gauge(Vec2 x) const {
  if (x.x == 0.0 && x.y == 0.0) return 0.0;
  return edge_gauge(ray_edge(x), x);
}

std::size_t ConvexPolygon::support_vertex(Vec2 nu) const {
  if (small()) {
    std::size_t best = 0;
    double val = dot(nu, v_[0]);
    for (std::size_t k = 1; k < v_.size(); ++k) {
      const double s = dot(nu, v_[k]);
      if (s > val) {
        val = s;
        best = k;
      }
    }
    return best;
  }
  const std::size_t k = next(normal_angles_.find(nu));
  std::size_t best = k;
  double val = dot(nu, v_[k]);
  for (std::size_t c : {prev(k), next(k)}) {
    const double s = dot(nu, v_[c]);
    if (s > val) {
      val = s;
      best = c;
    }
  }
  return best;
}

double ConvexPolygon::support(Vec2 nu) const {
  if (nu.x == 0.0 && nu.y == 0.0) return 0.0;
  return dot(nu, v_[support_vertex(nu)]);
}

ExposedFace ConvexPolygon::face(Vec2 nu) const {
  const std::size_t m = support_vertex(nu);
  const Vec2 u = nu / nu.norm();
  constexpr double kParallel = 1e-12;
  if (std::abs(cross(u, normal_[m])) <= kParallel && dot(u, normal_[m]) > 0.0) {
    return {v_[m], v_[next(m)]};
  }
  const std::size_t p = prev(m);
  if (std::abs(cross(u, normal_[p])) <= kParallel && dot(u, normal_[p]) > 0.0) {
    return {v_[p], v_[m]};
  }
  return {v_[m], v_[m]};
}

Vec2 ConvexPolygon::project(Vec2 p) const {
  if (p.x == 0.0 && p.y == 0.0) return p;
  const std::size_t n = v_.size();
  const std::size_t k0 = ray_edge(p);
  if (edge_gauge(k0, p) <= 1.0 + 1e-12) return p;
  auto foot = [&](std::size_t k) { return dot(p - v_[k], edge_[k]) / edge_len2_[k]; };
  auto visible = [&](std::size_t k) { return dot(p - v_[k], normal_[k]) > 0.0; };
  const double t0 = foot(k0);
  if (t0 >= 0.0 && t0 <= 1.0) return v_[k0] + edge_[k0] * t0;
  // The edges that see p form a chain spanning less than half a turn of
  // normals, and along it the distance to p is unimodal: before the closest
  // point p lies past the end of each edge (forward) or before its start
  // (backward). Gallop, then bisect, within half a turn of k0.
  const bool forward = t0 > 1.0;
  const std::size_t opposite = normal_angles_.find(normal_[k0] * -1.0);
  const std::size_t span = forward ? (opposite + n - k0) % n : (k0 + n - opposite) % n;
  auto at = [&](std::size_t j) { return forward ? (k0 + j) % n : (k0 + n - j % n) % n; };
  auto ahead = [&](std::size_t j) {
    if (j >= span) return false;
    const std::size_t k = at(j);
    if (!visible(k)) return false;
    const double t = foot(k);
    return forward ? t > 1.0 : t < 0.0;
  };
  std::size_t lo = 0, hi = 1;
  while (ahead(hi)) {
    lo = hi;
    hi = std::min(span, 2 * hi);
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (ahead(mid) ? lo : hi) = mid;
  }
  const std::size_t k = at(hi);
  const double t = foot(k);
  if (visible(k) && t >= 0.0 && t <= 1.0) {
    const Vec2 q = v_[k] + edge_[k] * t;
    if (dot(p - q, normal_[k]) >= -1e-12) return q;
  }
  // Vertex between the last edge passed and k.
  const std::size_t vi = forward ? k : next(k);
  const Vec2 d = p - v_[vi];
  if (dot(d, edge_[prev(vi)]) >= 0.0 && dot(d, edge_[vi]) <= 0.0) return v_[vi];
  // Not reached for points outside a convex polygon; kept as a safe fallback.
  Vec2 best = v_[0];
  double best_d = (p - best).norm2();
  for (std::size_t j = 0; j < n; ++j) {
    const double t = std::clamp(dot(p - v_[j], edge_[j]) / edge_len2_[j], 0.0, 1.0);
    const Vec2 q = v_[j] + edge_[j] * t;
    const double d = (p - q).norm2();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

double ConvexPolygon::inradius() const { return *std::min_element(offset_.begin(), offset_.end()); }

double ConvexPolygon::circumradius() const {
  double r = 0.0;
  for (const Vec2& v : v_) r = std::max(r, v.norm());
  return r;
}

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace

Anisotropy Anisotropy::Polygon(std::vector<Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 4 || n % 2 != 0) throw InvalidAnisotropy("polygon Wulff shape needs an even number (>= 4) of vertices");
  double scale = 0.0;
  for (const Vec2& v : vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw InvalidAnisotropy("non-finite polygon vertex");
    scale = std::max(scale, v.norm());
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    if ((vertices[k] + vertices[k + n / 2]).norm() > 1e-9 * scale) {
      throw InvalidAnisotropy("polygon Wulff shape must be symmetric: v[k + n/2] = -v[k]");
    }
  }
  Anisotropy a;
  a.kind_ = AnisotropyKind::kPolygon;
  try {
    a.polygon_ = std::make_shared<const detail::ConvexPolygon>(std::move(vertices));
  } catch (const std::invalid_argument& e) {
    throw InvalidAnisotropy(e.what());
  }
  a.c0_ = std::min(1.0 / a.polygon_->circumradius(), a.polygon_->inradius());
  return a;
}

Anisotropy Anisotropy::EuclideanScaled(Sym2 m) {
  if (!(m.a > 0.0) || !(m.det() > 0.0) || !std::isfinite(m.a) || !std::isfinite(m.b) || !std::isfinite(m.c)) {
    throw InvalidAnisotropy("euclidean anisotropy needs a symmetric positive definite matrix");
  }
  Anisotropy a;
  a.kind_ = AnisotropyKind::kEuclideanScaled;
  a.matrix_ = m;
  a.inverse_ = m.inverse();
  const double mean = 0.5 * (m.a + m.c);
  const double rad = std::hypot(0.5 * (m.a - m.c), m.b);
  a.eig_large_ = mean + rad;
  a.eig_small_ = m.det() / a.eig_large_;
  a.eig_angle_ = 0.5 * std::atan2(2.0 * m.b, m.a - m.c);  // eigenvector of eig_large_
  a.eig_cos_ = std::cos(a.eig_angle_);
  a.eig_sin_ = std::sin(a.eig_angle_);
  a.c0_ = std::min(std::sqrt(a.eig_small_), 1.0 / std::sqrt(a.eig_large_));
  return a;
}

Anisotropy Anisotropy::SmoothTable(std::vector<double> h, std::vector<double> dh, std::vector<double> d2h) {
  const std::size_t n = h.size();
  if (n < 16 || n % 2 != 0 || dh.size() != n || d2h.size() != n) {
    throw InvalidAnisotropy("support table needs an even number (>= 16) of samples with matching derivatives");
  }
  const double step = 2.0 * kPi / static_cast<double>(n);
  std::vector<Vec2> pts(n);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(h[k]) || !std::isfinite(dh[k]) || !std::isfinite(d2h[k])) {
      throw InvalidAnisotropy("non-finite support table entry");
    }
    const Vec2 e = unit_from_angle(step * static_cast<double>(k));
    pts[k] = e * h[k] + perp(e) * dh[k];
    scale = std::max(scale, pts[k].norm());
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    if ((pts[k] + pts[k + n / 2]).norm() > 1e-8 * scale) {
      throw InvalidAnisotropy("support table is not even");
    }
    if (!(h[k] + d2h[k] > 0.0) || !(h[k + n / 2] + d2h[k + n / 2] > 0.0)) {
      throw InvalidAnisotropy("support table has non-positive radius of curvature");
    }
  }
  Anisotropy a;
  a.kind_ = AnisotropyKind::kSmoothTable;
  try {
    a.polygon_ = std::make_shared<const detail::ConvexPolygon>(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw InvalidAnisotropy(std::string("support table boundary is not strictly convex: ") + e.what());
  }
  a.table_ = std::make_shared<const Table>(Table{std::move(h), std::move(dh), std::move(d2h)});
  a.c0_ = std::min(1.0 / a.polygon_->circumradius(), a.polygon_->inradius());
  return a;
}

Anisotropy Anisotropy::Square(double half_side) {
  const double s = half_side;
  return Polygon({{s, -s}, {s, s}, {-s, s}, {-s, -s}});
}

Anisotropy Anisotropy::RegularPolygon(int n, double phase) {
  std::vector<Vec2> v;
  for (int k = 0; k < n; ++k) v.push_back(unit_from_angle(phase + 2.0 * kPi * k / n));
  return Polygon(std::move(v));
}

double Anisotropy::gauge(Vec2 x) const {
  if (kind_ == AnisotropyKind::kEuclideanScaled) return std::sqrt(std::max(0.0, matrix_.quad(x)));
  return polygon_->gauge(x);
}

double Anisotropy::polar(Vec2 nu) const {
  if (kind_ == AnisotropyKind::kEuclideanScaled) return std::sqrt(std::max(0.0, inverse_.quad(nu)));
  return polygon_->support(nu);
}

ExposedFace Anisotropy::cahn_hoffmann(Vec2 nu) const {
  if (nu.x == 0.0 && nu.y == 0.0) throw std::invalid_argument("cahn_hoffmann: zero normal");
  if (kind_ == AnisotropyKind::kEuclideanScaled) {
    const Vec2 p = inverse_.apply(nu) / polar(nu);
    return {p, p};
  }
  return polygon_->face(nu);
}

Vec2 Anisotropy::project(Vec2 p) const {
  if (kind_ != AnisotropyKind::kEuclideanScaled) return polygon_->project(p);
  const double g2 = matrix_.quad(p);
  if (g2 <= 1.0 + 2e-12) return p;
  if (eig_small_ == eig_large_) return p / std::sqrt(g2);
  // Ellipse with semi-axes a1 (along eig_angle_) and a2; Newton on the
  // multiplier of the Lagrange condition, monotone from t = 0.
  const double c = eig_cos_;
  const double s = eig_sin_;
  const double y1 = c * p.x + s * p.y;
  const double y2 = -s * p.x + c * p.y;
  const double a1 = 1.0 / eig_large_;  // squared semi-axes
  const double a2 = 1.0 / eig_small_;
  double t = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double r1 = a1 + t;
    const double r2 = a2 + t;
    const double q1 = y1 / r1;
    const double q2 = y2 / r2;
    const double f = a1 * q1 * q1 + a2 * q2 * q2 - 1.0;
    const double df = -2.0 * (a1 * q1 * q1 / r1 + a2 * q2 * q2 / r2);
    const double dt = -f / df;
    t += dt;
    if (!(std::abs(dt) > 1e-14 * (a1 + t))) break;
  }
  const double q1 = a1 * y1 / (a1 + t);
  const double q2 = a2 * y2 / (a2 + t);
  Vec2 q{c * q1 - s * q2, s * q1 + c * q2};
  const double g = gauge(q);
  if (g > 1.0) q = q / g;
  return q;
}

void Anisotropy::project_in_place(std::span<double> x, std::span<double> y) const {
  const std::size_t n = x.size();
  if (kind_ == AnisotropyKind::kEuclideanScaled) {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 q = project({x[i], y[i]});
      x[i] = q.x;
      y[i] = q.y;
    }
    return;
  }
  const detail::ConvexPolygon& poly = *polygon_;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 q = poly.project({x[i], y[i]});
    x[i] = q.x;
    y[i] = q.y;
  }
}

double Anisotropy::inradius() const {
  if (kind_ == AnisotropyKind::kEuclideanScaled) return 1.0 / std::sqrt(eig_large_);
  return polygon_->inradius();
}

double Anisotropy::circumradius() const {
  if (kind_ == AnisotropyKind::kEuclideanScaled) return 1.0 / std::sqrt(eig_small_);
  return polygon_->circumradius();
}

const std::vector<Vec2>& Anisotropy::vertices() const {
  if (!polygon_) throw std::logic_error("euclidean anisotropy has no vertex list");
  return polygon_->vertices();
}

std::size_t Anisotropy::table_size() const { return table_ ? table_->h.size() : 0; }

const std::vector<double>& Anisotropy::table_h() const {
  if (!table_) throw std::logic_error("not a support table");
  return table_->h;
}

const std::vector<double>& Anisotropy::table_dh() const {
  if (!table_) throw std::logic_error("not a support table");
  return table_->dh;
}

const std::vector<double>& Anisotropy::table_d2h() const {
  if (!table_) throw std::logic_error("not a support table");
  return table_->d2h;
}

SupportSample Anisotropy::support_derivatives(double theta) const {
  if (!table_) throw std::logic_error("not a support table");
  const std::size_t n = table_->h.size();
  const double step = 2.0 * kPi / static_cast<double>(n);
  double u = std::fmod(theta, 2.0 * kPi);
  if (u < 0.0) u += 2.0 * kPi;
  u /= step;
  auto k = static_cast<std::size_t>(u);
  if (k >= n) k = n - 1;
  const double s = u - static_cast<double>(k);
  const std::size_t k1 = (k + 1) % n;
  const auto& h = table_->h;
  const auto& dh = table_->dh;
  const auto& d2h = table_->d2h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const double d00 = 6 * s2 - 6 * s;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s;
  const double d11 = 3 * s2 - 2 * s;
  SupportSample out;
  out.h = h00 * h[k] + h10 * step * dh[k] + h01 * h[k1] + h11 * step * dh[k1];
  out.dh = (d00 * h[k] + d10 * step * dh[k] + d01 * h[k1] + d11 * step * dh[k1]) / step;
  out.d2h = (1.0 - s) * d2h[k] + s * d2h[k1];
  return out;
}

double Anisotropy::sample_curvature(std::size_t k) const {
  if (!table_) throw std::logic_error("not a support table");
  return 1.0 / (table_->h[k] + table_->d2h[k]);
}

std::vector<Vec2> Anisotropy::boundary_points(int n) const {
  if (kind_ != AnisotropyKind::kEuclideanScaled) return polygon_->vertices();
  std::vector<Vec2> out;
  const double c = eig_cos_;
  const double s = eig_sin_;
  const double r1 = 1.0 / std::sqrt(eig_large_);
  const double r2 = 1.0 / std::sqrt(eig_small_);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * k / n;
    const double u = r1 * std::cos(t);
    const double v = r2 * std::sin(t);
    out.push_back({c * u - s * v, s * u + c * v});
  }
  return out;
}

double wulff_hausdorff(const Anisotropy& a, const Anisotropy& b, int samples) {
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec2 e = unit_from_angle(2.0 * kPi * k / samples);
    worst = std::max(worst, std::abs(a.polar(e) - b.polar(e)));
  }
  return worst;
}

namespace {

double bump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

double bump_mass() {
  // Composite Simpson on [-1, 1].
  constexpr int n = 20000;
  const double step = 2.0 / n;
  double sum = bump(-1.0) + bump(1.0);
  for (int i = 1; i < n; ++i) sum += bump(-1.0 + i * step) * (i % 2 ? 4.0 : 2.0);
  return sum * step / 3.0;
}

}  // namespace

RegularizedAnisotropy regularize(const Anisotropy& base, double epsilon, int samples) {
  if (base.kind() == AnisotropyKind::kSmoothTable) {
    throw InvalidAnisotropy("regularize: base must be a polygon or euclidean anisotropy");
  }
  const double polar_inradius = 1.0 / base.circumradius();
  if (!(epsilon > 0.0) || !(epsilon < 0.5 * polar_inradius)) {
    throw InvalidAnisotropy("regularize: epsilon must lie in (0, inradius({polar <= 1}) / 2)");
  }
  if (samples < 64 || samples % 2 != 0) throw InvalidAnisotropy("regularize: need an even sample count >= 64");
  const double step = 2.0 * kPi / samples;
  const double width = epsilon;
  if (width / step < 8.0) {
    throw InvalidAnisotropy("regularize: mollification resolution insufficient for this epsilon");
  }
  const double mass = bump_mass();
  auto kernel = [&](double a) { return bump(a / width) / (mass * width); };

  // Radius of curvature of the base shape as a function of the normal angle,
  // mollified.
  std::function<double(double)> rho;
  std::vector<double> facet_angle;
  std::vector<double> facet_length;
  if (base.kind() == AnisotropyKind::kPolygon) {
    const auto& v = base.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
      const Vec2 e = v[(k + 1) % v.size()] - v[k];
      facet_angle.push_back(std::atan2(-e.x, e.y));
      facet_length.push_back(e.norm());
    }
    rho = [&](double theta) {
      double r = 0.0;
      for (std::size_t k = 0; k < facet_angle.size(); ++k) {
        r += facet_length[k] * kernel(wrap_angle(theta - facet_angle[k]));
      }
      return r;
    };
  } else {
    const double det_inv = base.matrix().inverse().det();
    rho = [&base, det_inv, width, &kernel](double theta) {
      constexpr int m = 64;
      const double sub = 2.0 * width / m;
      double sum = 0.0;
      for (int i = 0; i <= m; ++i) {
        const double a = -width + i * sub;
        const double p = base.polar(unit_from_angle(theta - a));
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * kernel(a) * det_inv / (p * p * p);
      }
      return sum * sub / 3.0;
    };
  }
  auto total_rho = [&](double theta) { return rho(theta) + epsilon; };

  // Boundary point with normal angle theta: x' = rho * e_perp.
  const std::size_t n = static_cast<std::size_t>(samples);
  std::vector<Vec2> x(n);
  std::vector<double> rho_k(n);
  constexpr int kSub = 4;
  Vec2 acc{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = step * static_cast<double>(k);
    x[k] = acc;
    rho_k[k] = total_rho(t0);
    const double sub = step / kSub;
    Vec2 part{0.0, 0.0};
    for (int i = 0; i <= kSub; ++i) {
      const double t = t0 + i * sub;
      const double w = (i == 0 || i == kSub) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      part += perp(unit_from_angle(t)) * (w * total_rho(t));
    }
    acc += part * (sub / 3.0);
  }
  Vec2 center{0.0, 0.0};
  for (std::size_t k = 0; k < n / 2; ++k) center += x[k] + x[k + n / 2];
  center = center * (-1.0 / static_cast<double>(n));
  double worst = 0.0;
  for (auto& p : x) {
    p += center;
    worst = std::max(worst, base.gauge(p));
  }
  const double scale = 1.0 / worst;

  std::vector<double> h(n), dh(n), d2h(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 e = unit_from_angle(step * static_cast<double>(k));
    h[k] = scale * dot(x[k], e);
    dh[k] = scale * dot(x[k], perp(e));
    d2h[k] = scale * rho_k[k] - h[k];
  }
  RegularizedAnisotropy out{base, epsilon, Anisotropy::Euclidean(), samples, width, scale, 0.0};
  try {
    out.result = Anisotropy::SmoothTable(std::move(h), std::move(dh), std::move(d2h));
  } catch (const InvalidAnisotropy& e) {
    throw InvalidAnisotropy(std::string("regularize: mollification resolution insufficient: ") + e.what());
  }
  out.hausdorff = wulff_hausdorff(base, out.result);
  return out;
}

}  // namespace wulff
