#include "wulff/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "json.hpp"

#include "wulff/distance.hpp"
#include "wulff/parallel.hpp"

namespace wulff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_radius(const GridGeometry& g, double r, const char* what) {
  if (!std::isfinite(r) || std::abs(r) > max_morphology_radius(g)) {
    throw GridError(std::string(what) + ": radius exceeds a quarter of the domain size");
  }
}

// Grid with p extra cells on every side; the new cells take `fill`.
SetMask pad(const SetMask& m, int p, bool fill) {
  const GridGeometry& g = m.geom;
  GridGeometry pg(g.nx + 2 * p, g.ny + 2 * p, g.dx, g.origin - Vec2{p * g.dx, p * g.dx});
  SetMask out(pg, fill);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) out.set(i + p, j + p, m(i, j));
  }
  return out;
}

SetMask crop(const SetMask& m, const GridGeometry& g, int p) {
  SetMask out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) out.set(i, j, m(i + p, j + p));
  }
  return out;
}

SetMask opening_on(const SetMask& m, const Anisotropy& a, double r) {
  if (r == 0.0 || m.empty() || m.full()) return m;
  const double tau = cell_slack(a, m.geom.dx) + 0.5 * m.geom.dx * std::max(a.gauge({1.0, 0.0}), a.gauge({0.0, 1.0}));
  const Grid2D d = signed_distance(m, a, DistanceMethod::kAuto, r + tau + m.geom.dx);
  SetMask seeds(m.geom);
  for (std::size_t k = 0; k < m.size(); ++k) seeds.inside[k] = d.v[k] <= -r + tau ? 1 : 0;
  SetMask out(m.geom);
  if (seeds.empty()) return out;
  const double reach = r * (1.0 + 1e-9);
  const Grid2D sd = seed_distance(seeds, a, DistanceMethod::kAuto, reach);
  for (std::size_t k = 0; k < m.size(); ++k) out.inside[k] = (m.inside[k] && sd.v[k] <= reach) ? 1 : 0;
  return out;
}

// Opening of a set that also contains everything beyond the domain.
SetMask opening_exterior_in(const SetMask& m, const Anisotropy& a, double r) {
  if (r == 0.0 || m.full()) return m;
  const GridGeometry& g = m.geom;
  const int p = static_cast<int>(std::ceil((r + 2.0 * cell_slack(a, g.dx)) / (a.c0() * g.dx))) + 2;
  return crop(opening_on(pad(m, p, true), a, r), g, p);
}

std::optional<RwWitness> mismatch_witness(const SetMask& m, const SetMask& o, double R, const char* clause) {
  const std::ptrdiff_t k = first_mismatch_beyond_one_cell(m, o);
  if (k < 0) return std::nullopt;
  return RwWitness{m.geom.point(static_cast<std::size_t>(k)), R, clause};
}

// Number of significant 4-connected components of (x + rW) \ E.
int split_components(const SetMask& m, const Grid2D& d, const Anisotropy& a, Vec2 x, double r, double diag) {
  const GridGeometry& g = m.geom;
  const int ci = static_cast<int>(std::lround((x.x - g.origin.x) / g.dx));
  const int cj = static_cast<int>(std::lround((x.y - g.origin.y) / g.dx));
  const int hx = static_cast<int>(std::ceil(r * a.polar({1.0, 0.0}) / g.dx)) + 1;
  const int hy = static_cast<int>(std::ceil(r * a.polar({0.0, 1.0}) / g.dx)) + 1;
  const int w = 2 * hx + 1;
  const int h = 2 * hy + 1;
  // 0: not part of the test region, 1: unvisited E^c cell, 2: visited.
  std::vector<std::uint8_t> state(static_cast<std::size_t>(w * h), 0);
  std::vector<std::uint8_t> deep(state.size(), 0);
  for (int b = 0; b < h; ++b) {
    for (int c = 0; c < w; ++c) {
      const int i = ci - hx + c;
      const int j = cj - hy + b;
      const Vec2 y = g.point(i, j);
      const double gy = a.gauge(y - x);
      if (gy > r) continue;
      const bool in_domain = g.contains(i, j);
      if (in_domain && m(i, j)) continue;
      const std::size_t k = static_cast<std::size_t>(b * w + c);
      state[k] = 1;
      const double dy = in_domain ? d(i, j) : kInf;
      deep[k] = (dy > diag && gy < r - diag) ? 1 : 0;
    }
  }
  int significant = 0;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (state[static_cast<std::size_t>(start)] != 1) continue;
    bool sig = false;
    state[static_cast<std::size_t>(start)] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      sig = sig || deep[static_cast<std::size_t>(k)];
      const int c = k % w;
      const int b = k / w;
      const int nb[4][2] = {{c + 1, b}, {c - 1, b}, {c, b + 1}, {c, b - 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[1] < 0 || q[0] >= w || q[1] >= h) continue;
        const int kn = q[1] * w + q[0];
        if (state[static_cast<std::size_t>(kn)] != 1) continue;
        state[static_cast<std::size_t>(kn)] = 2;
        stack.push_back(kn);
      }
    }
    if (sig) ++significant;
  }
  return significant;
}

}  // namespace

double max_morphology_radius(const GridGeometry& g) { return 0.25 * std::min(g.nx, g.ny) * g.dx; }

double cell_slack(const Anisotropy& a, double dx) {
  return 0.5 * dx * std::max(a.gauge({1.0, 1.0}), a.gauge({1.0, -1.0}));
}

SetMask minkowski(const SetMask& m, const Anisotropy& a, double r) {
  require_radius(m.geom, r, "minkowski");
  if (r == 0.0 || m.empty() || m.full()) return m;
  const Grid2D d = signed_distance(m, a, DistanceMethod::kAuto, std::abs(r) + m.geom.dx);
  SetMask out(m.geom);
  for (std::size_t k = 0; k < m.size(); ++k) out.inside[k] = (r < 0.0 ? d.v[k] <= r : d.v[k] < r) ? 1 : 0;
  return out;
}

SetMask opening(const SetMask& m, const Anisotropy& a, double r) {
  require_radius(m.geom, r, "opening");
  if (r < 0.0) throw GridError("opening: negative radius");
  return opening_on(m, a, r);
}

SetMask closing(const SetMask& m, const Anisotropy& a, double r) {
  require_radius(m.geom, r, "closing");
  if (r < 0.0) throw GridError("closing: negative radius");
  return complement(opening_exterior_in(complement(m), a, r));
}

std::string RwReport::to_json() const {
  nlohmann::ordered_json j;
  j["innerOk"] = inner_ok;
  j["outerOk"] = outer_ok;
  j["connectivityOk"] = connectivity_ok;
  if (witness) {
    j["witness"] = {{"x", witness->point.x}, {"y", witness->point.y}, {"r", witness->radius},
                    {"clause", witness->clause}};
  } else {
    j["witness"] = nullptr;
  }
  j["radiusTested"] = radius_tested;
  return j.dump();
}

RwReport check_rw(const SetMask& m, const Anisotropy& a, double R, int samples) {
  const GridGeometry& g = m.geom;
  if (!(R >= 4.0 * g.dx)) throw GridError("check_rw: radius below 4 cells, verdict unreliable");
  require_radius(g, R, "check_rw");
  if (samples < 1) throw GridError("check_rw: samples must be positive");
  if (m.empty() || m.full()) throw GridError("check_rw: mask is empty or full");
  RwReport rep;
  rep.radius_tested = R;

  const auto inner = mismatch_witness(m, opening_on(m, a, R), R, "inner");
  rep.inner_ok = !inner;
  const SetMask c = complement(m);
  const auto outer = mismatch_witness(c, opening_exterior_in(c, a, R), R, "outer");
  rep.outer_ok = !outer;

  const double tau = cell_slack(a, g.dx);
  const Grid2D d = signed_distance(m, a, DistanceMethod::kAuto, R + 2.0 * tau + g.dx);
  std::vector<std::size_t> centers;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::abs(d.v[k]) <= R) centers.push_back(k);
  }
  const std::size_t stride = (centers.size() + static_cast<std::size_t>(samples) - 1) / static_cast<std::size_t>(samples);
  std::vector<std::size_t> picked;
  for (std::size_t q = 0; q < centers.size(); q += std::max<std::size_t>(stride, 1)) picked.push_back(centers[q]);
  // First failing radius index per center (0 when none); aggregated in order.
  std::vector<int> fail(picked.size(), 0);
  const double diag = 2.0 * tau;
  parallel_for(static_cast<int>(picked.size()), [&](int begin, int end) {
    for (int q = begin; q < end; ++q) {
      const std::size_t k = picked[static_cast<std::size_t>(q)];
      const Vec2 x = g.point(k);
      for (int s = 1; s <= 7; ++s) {
        const double r = R * s / 8.0;
        if (std::abs(d.v[k]) > r) continue;  // the test shape lies on one side
        if (split_components(m, d, a, x, r, diag) > 1) {
          fail[static_cast<std::size_t>(q)] = s;
          break;
        }
      }
    }
  });
  rep.connectivity_ok = true;
  std::optional<RwWitness> conn;
  for (std::size_t q = 0; q < picked.size(); ++q) {
    if (fail[q] == 0) continue;
    rep.connectivity_ok = false;
    conn = RwWitness{g.point(picked[q]), R * fail[q] / 8.0, "connectivity"};
    break;
  }
  rep.witness = inner ? inner : (outer ? outer : conn);
  return rep;
}

ApproxResult approximate_crystal(const SetMask& m, const Anisotropy& a, const Anisotropy& a_eps, double R) {
  ApproxResult res;
  res.input_check = check_rw(m, a, R);
  if (!res.input_check.ok()) throw RegularityError("approximate_crystal: input fails the RW condition", res.input_check);
  const SetMask opened = opening(m, a_eps, R);
  if (opened.empty()) throw RegularityError("approximate_crystal: opening is empty", res.input_check);
  res.mask = closing(opened, a_eps, R);
  const double r_out = R - 2.0 * m.geom.dx;
  res.output_check = check_rw(res.mask, a_eps, r_out);
  if (!res.output_check.ok()) {
    throw RegularityError("approximate_crystal: output fails the RW condition (grid too coarse)", res.output_check);
  }
  return res;
}

Radii estimate_radii(const SetMask& m, const Anisotropy& a, double tol) {
  if (m.empty() || m.full()) throw GridError("estimate_radii: mask is empty or full");
  const GridGeometry& g = m.geom;
  if (tol <= 0.0) tol = 0.25 * g.dx;
  const double cap = max_morphology_radius(g);
  const Grid2D d = signed_distance(m, a, DistanceMethod::kAuto, cap + g.dx);
  auto largest = [&](double hi, auto&& valid) {
    hi = std::min(hi, cap);
    if (hi <= 0.0) return 0.0;
    if (valid(hi)) return hi;
    // Shapes close to a Wulff shape pass just below the in-radius.
    double lo = std::max(0.0, hi - 2.0 * g.dx);
    if (lo > 0.0 && !valid(lo)) {
      hi = lo;
      lo = 0.0;
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (valid(mid) ? lo : hi) = mid;
    }
    return lo;
  };
  Radii out;
  // Centers between cell centers reach up to the opening slack deeper.
  out.inner = largest(-d.min() + 2.0 * cell_slack(a, g.dx), [&](double r) { return equal_up_to_one_cell(m, opening_on(m, a, r)); });
  const SetMask c = complement(m);
  out.outer = largest(kInf, [&](double r) { return equal_up_to_one_cell(c, opening_exterior_in(c, a, r)); });
  return out;
}

}  // namespace wulff
