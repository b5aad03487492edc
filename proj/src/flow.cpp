#include "wulff/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "wulff/distance.hpp"
#include "wulff/morphology.hpp"
#include "wulff/vstep.hpp"

namespace wulff {

FlowConfig FlowConfig::resolve(double dx) const {
  FlowConfig c = *this;
  if (!(dx > 0.0)) throw FlowError("flow: grid spacing must be positive");
  if (c.h == 0.0 && c.R0 > 0.0) c.h = std::min(c.R0 * c.R0 / 32.0, dx * c.R0 / 4.0);
  if (c.band_half_width == 0.0) c.band_half_width = 3.0 * dx;
  if (c.min_component_area == 0.0) c.min_component_area = 16.0 * dx * dx;
  if (c.stop_radius == 0.0) c.stop_radius = 4.0 * dx;
  if (c.solver_band == 0.0 && c.h > 0.0) c.solver_band = std::max(8.0 * dx, 3.0 * std::sqrt(2.0 * c.h));
  return c;
}

namespace {

void validate(const SetMask& e0, const Forcing& f, const FlowConfig& c) {
  const double dx = e0.geom.dx;
  if (!(c.R0 > 0.0) || !std::isfinite(c.R0)) throw FlowError("flow: R0 must be positive");
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw FlowError("flow: h must be positive");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw FlowError("flow: tEnd must be nonnegative");
  if (!(c.tol_solver > 0.0)) throw FlowError("flow: tolSolver must be positive");
  if (c.max_iter < 1) throw FlowError("flow: maxIter must be at least 1");
  if (!(c.band_half_width > 0.0)) throw FlowError("flow: bandHalfWidth must be positive");
  if (!(c.min_component_area >= 0.0)) throw FlowError("flow: minComponentArea must be nonnegative");
  if (c.stop_radius < 4.0 * dx * (1.0 - 1e-12)) throw FlowError("flow: stopRadius must be at least 4 dx");
  if (!(c.solver_band > 0.0)) throw FlowError("flow: solver band must be positive");
  if (c.diagnostics_every < 1) throw FlowError("flow: diagnosticsEvery must be at least 1");
  if (c.snapshot_every < 0) throw FlowError("flow: snapshotEvery must be nonnegative");
  if (!f.g1_trivial() && !f.g2_trivial()) {
    throw FlowError("flow: forcing must have G1 = 0 or G2 = 0");
  }
  if (c.t_end > f.t_end()) throw FlowError("flow: tEnd exceeds the forcing horizon");
  const double cap = max_morphology_radius(e0.geom);
  if (c.stop_radius > cap) throw FlowError("flow: stopRadius exceeds a quarter of the domain size");
  if (c.check_initial_rw && c.R0 > cap) throw FlowError("flow: R0 exceeds a quarter of the domain size");
  if (e0.empty() || e0.full()) throw FlowError("flow: initial set is empty or fills the domain");
  if (margin_cells(e0) < kInitialMarginCells) {
    throw FlowError("flow: initial set is closer than " + std::to_string(kInitialMarginCells) +
                    " cells to the domain edge");
  }
}

double anisotropic_perimeter(const Grid2D& d, const Anisotropy& a) {
  double p = 0.0;
  for (const Segment& s : interface_segments(d)) {
    const Vec2 e = s.b - s.a;
    if (e.x != 0.0 || e.y != 0.0) p += a.polar({e.y, -e.x});
  }
  return p;
}

// Mask-derived distances trace the pixel staircase; their perimeter comes
// from the smoothed contour instead.
double mask_perimeter(const SetMask& m, const Anisotropy& a) {
  double p = 0.0;
  for (const Polyline& pl : extract_contour(m, a)) {
    const std::size_t n = pl.points.size();
    for (std::size_t k = 0; k + 1 < n + (pl.closed ? 1 : 0); ++k) {
      const Vec2 e = pl.points[(k + 1) % n] - pl.points[k];
      if (e.x != 0.0 || e.y != 0.0) p += a.polar({e.y, -e.x});
    }
  }
  return p;
}

double point_segment(Vec2 p, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double l2 = dot(e, e);
  const double t = l2 > 0.0 ? std::clamp(dot(p - s.a, e) / l2, 0.0, 1.0) : 0.0;
  return (p - (s.a + e * t)).norm();
}

double directed(const std::vector<Segment>& from, const std::vector<Segment>& to) {
  double worst = 0.0;
  for (const Segment& s : from) {
    for (const Vec2& p : {s.a, s.b}) {
      double best = std::numeric_limits<double>::infinity();
      for (const Segment& q : to) {
        best = std::min(best, point_segment(p, q));
        if (best <= worst) break;  // cannot raise the max
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

// Symmetric Hausdorff distance between zero-level contours, measured from
// segment endpoints to the other polyline.
double contour_hausdorff(const Grid2D& d0, const Grid2D& d1) {
  const auto s0 = interface_segments(d0);
  const auto s1 = interface_segments(d1);
  if (s0.empty() || s1.empty()) return s0.empty() && s1.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  return std::max(directed(s0, s1), directed(s1, s0));
}

struct Residual {
  double lambda0 = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
};

// |(d_new - w)| / h is the discrete |(d_{n+1} - d_n - dG)/h - div z|.
Residual regular_flow_residual(const Grid2D& d, const Grid2D& w, const Grid2D& d_new, double h, double band) {
  const GridGeometry& g = d.geom;
  const double dx = g.dx;
  std::vector<std::pair<double, double>> cells;  // (residual, |d|)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (g.edge_distance(i, j) < 2) continue;
      const std::size_t k = g.index(i, j);
      if (std::max(w.v[k], d.v[k]) < -band || std::min(w.v[k], d.v[k]) > band) continue;
      cells.emplace_back(std::abs(d_new.v[k] - w.v[k]) / h, std::abs(d.v[k]));
    }
  }
  Residual r;
  if (cells.empty()) return r;
  r.lambda0 = 0.0;
  for (const auto& [res, ad] : cells) {
    if (ad >= dx) r.lambda0 = std::max(r.lambda0, res / ad);
  }
  r.residual = -std::numeric_limits<double>::infinity();
  for (const auto& [res, ad] : cells) r.residual = std::max(r.residual, res - r.lambda0 * ad);
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double distance_band(const FlowConfig& c, double dx) {
  return std::isfinite(c.solver_band) ? c.solver_band + 4.0 * dx : c.solver_band;
}

FlowTrace run_flow(const SetMask& e0, const Grid2D* level0, const Anisotropy& a, const Forcing& f,
                   const FlowConfig& cfg, const StepObserver& observer) {
  const GridGeometry& geo = e0.geom;
  const double dx = geo.dx;
  FlowTrace trace;
  trace.config = cfg.resolve(dx);
  const FlowConfig& c = trace.config;
  validate(e0, f, c);
  if (c.h > c.R0 * c.R0 / 16.0) {
    trace.warnings.push_back("h = " + fmt(c.h) + " exceeds R0^2/16 = " + fmt(c.R0 * c.R0 / 16.0) +
                             "; the drift estimate does not apply");
  }
  const int steps = static_cast<int>(std::floor(c.t_end / c.h + 1e-9));
  if (std::abs(steps * c.h - c.t_end) > 1e-9 * std::max(1.0, c.t_end)) {
    trace.warnings.push_back("tEnd is not a multiple of h; the run stops at t = " + fmt(steps * c.h));
  }
  if (c.check_initial_rw) {
    const RwReport rep = check_rw(e0, a, c.R0);
    if (!rep.ok()) throw RegularityError("flow: initial set fails the RW condition at R0", rep);
  }
  const double dist_band = distance_band(c, dx);

  SetMask mask = e0;
  Grid2D d = level0 ? signed_distance_to_level(*level0, a, 1e-12, DistanceMethod::kAuto, dist_band)
                    : signed_distance(mask, a, DistanceMethod::kAuto, dist_band);
  std::optional<DualField> z;

  auto radii_into = [&](FlowStep& st) {
    const Radii r = estimate_radii(mask, a);
    st.r_inner = r.inner;
    st.r_outer = r.outer;
    st.rw_checked = true;
    st.rw_ok = check_rw(mask, a, c.stop_radius).ok();
  };
  auto keep = [&](const FlowStep& st, bool force) {
    if (force || (c.snapshot_every > 0 && st.n % c.snapshot_every == 0)) {
      trace.snapshots.push_back({st.n, st.t, mask, d});
    }
  };

  FlowStep first;
  first.area = mask.area();
  first.perimeter = level0 ? anisotropic_perimeter(d, a) : mask_perimeter(mask, a);
  radii_into(first);
  trace.steps.push_back(first);
  keep(first, true);
  if (observer) observer(first, mask, d);

  for (int n = 1; n <= steps; ++n) {
    const double t0 = (n - 1) * c.h;
    const double t1 = n * c.h;
    // Data d + G(t1) - G(t0): a scalar shift when G2 = 0, a grid otherwise.
    StepProblem p;
    p.h = c.h;
    p.a = a;
    p.d = d;
    Grid2D inc;
    if (f.g2_trivial()) {
      const double shift = f.increment(t0, t1, {0.0, 0.0});
      for (double& v : p.d.v) v += shift;
      inc = Grid2D(geo, shift);
    } else {
      p.dg = f.increment_grid(t0, t1, geo);
      inc = p.dg;
    }
    StepOptions opt;
    opt.tol = c.tol_solver;
    opt.max_iter = c.max_iter;
    opt.band = c.solver_band;
    if (z) {
      // Off the band the flux is re-selected from the current data.
      for (std::size_t k = 0; k < geo.size(); ++k) {
        const double g = p.d.v[k] + (p.dg.size() != 0 ? p.dg.v[k] : 0.0);
        if (!(std::abs(g) < c.solver_band)) {
          z->x.v[k] = 0.0;
          z->y.v[k] = 0.0;
        }
      }
      opt.warm_start = &*z;
    }
    const StepSolution s = solve_step(p, opt);
    if (!s.converged) {
      trace.breakdown = "solver did not converge at step " + std::to_string(n) + " (gap " + fmt(s.gap) + ")";
      break;
    }
    FlowStep st;
    st.n = n;
    st.t = t1;
    st.iterations = s.iterations;
    st.gap = s.gap;
    // Curvature diagnostics against the unshifted distance, forcing in dg.
    StepProblem diag;
    diag.d = d;
    diag.dg = inc;
    diag.h = c.h;
    diag.a = a;

    mask = s.new_mask;
    st.flipped_cells = remove_small_components(mask, c.min_component_area);
    Grid2D d_new = st.flipped_cells == 0
                       ? signed_distance_to_level(s.w, a, 1e-12, DistanceMethod::kAuto, dist_band)
                       : signed_distance(mask, a, DistanceMethod::kAuto, dist_band);
    st.area = mask.area();
    if (mask.empty()) {
      st.hausdorff_step = std::numeric_limits<double>::infinity();
      trace.steps.push_back(st);
      d = std::move(d_new);
      keep(st, true);
      if (observer) observer(st, mask, d);
      trace.breakdown = "set vanished at step " + std::to_string(n);
      break;
    }
    st.perimeter = st.flipped_cells == 0 ? anisotropic_perimeter(d_new, a) : mask_perimeter(mask, a);
    st.hausdorff_step = contour_hausdorff(d, d_new);
    try {
      st.a_n = curvature_band_bound(s, diag, -c.band_half_width, c.band_half_width);
    } catch (const StepError&) {
    }
    const Residual r = regular_flow_residual(d, s.w, d_new, c.h, c.band_half_width);
    st.lambda0 = r.lambda0;
    st.lambda_residual = r.residual;
    d = std::move(d_new);
    z = s.z;

    const bool margin_lost = mask.full() || margin_cells(mask) < kRunningMarginCells;
    if (!margin_lost && (n % c.diagnostics_every == 0 || n == steps)) radii_into(st);
    trace.steps.push_back(st);
    if (margin_lost) {
      trace.breakdown = "boundary within " + std::to_string(kRunningMarginCells) + " cells of the domain edge at step " +
                        std::to_string(n);
    } else if (st.rw_checked && std::min(st.r_inner, st.r_outer) < c.stop_radius) {
      trace.breakdown = "radius below stopRadius at step " + std::to_string(n) + " (rInner " + fmt(st.r_inner) +
                        ", rOuter " + fmt(st.r_outer) + ")";
    } else if (st.rw_checked && !st.rw_ok && !c.continue_on_rw_failure) {
      trace.breakdown = "RW check failed at stopRadius at step " + std::to_string(n);
    }
    keep(st, trace.breakdown.has_value() || n == steps);
    if (observer) observer(st, mask, d);
    if (trace.breakdown) break;
  }
  return trace;
}

}  // namespace

FlowTrace evolve(const SetMask& e0, const Anisotropy& a, const Forcing& f, const FlowConfig& cfg,
                 const StepObserver& observer) {
  return run_flow(e0, nullptr, a, f, cfg, observer);
}

FlowTrace evolve(const Grid2D& level0, const Anisotropy& a, const Forcing& f, const FlowConfig& cfg,
                 const StepObserver& observer) {
  if (level0.size() == 0 || !level0.finite()) throw FlowError("flow: initial level function is empty or not finite");
  return run_flow(below(level0, -1e-12), &level0, a, f, cfg, observer);
}

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream os;
  os << "n,t,area,rInner,rOuter,A_n,hausdorffStep,rwOk,perimeter,lambda0,lambdaResidual,iterations,gap\n";
  auto opt = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
  for (const FlowStep& s : trace.steps) {
    os << s.n << ',' << fmt(s.t) << ',' << fmt(s.area) << ',' << opt(s.r_inner) << ',' << opt(s.r_outer) << ','
       << opt(s.a_n) << ',' << fmt(s.hausdorff_step) << ',' << (s.rw_checked ? (s.rw_ok ? "1" : "0") : "") << ','
       << fmt(s.perimeter) << ',' << opt(s.lambda0) << ',' << opt(s.lambda_residual) << ',' << s.iterations << ','
       << fmt(s.gap) << '\n';
  }
  return os.str();
}

RefinementReport crystalline_refinement(const SetMask& e0, const Anisotropy& a_crystal, const Forcing& f,
                                        const FlowConfig& cfg, std::vector<double> times, double floor) {
  if (a_crystal.kind() != AnisotropyKind::kPolygon) throw FlowError("refinement: anisotropy must be polygonal");
  const double dx = e0.geom.dx;
  const FlowConfig c = cfg.resolve(dx);
  if (c.eps_schedule.empty()) throw FlowError("refinement: epsSchedule is empty");
  for (std::size_t k = 0; k < c.eps_schedule.size(); ++k) {
    if (!(c.eps_schedule[k] > 0.0) || (k > 0 && !(c.eps_schedule[k] < c.eps_schedule[k - 1]))) {
      throw FlowError("refinement: epsSchedule must be positive and decreasing");
    }
  }
  if (!(c.h > 0.0)) throw FlowError("refinement: h must be positive");
  if (times.empty()) times.push_back(c.t_end);
  std::sort(times.begin(), times.end());
  std::vector<int> wanted;
  for (double t : times) {
    const double n = std::round(t / c.h);
    if (t < 0.0 || t > c.t_end + 1e-12 || std::abs(n * c.h - t) > 1e-9 * std::max(1.0, t)) {
      throw FlowError("refinement: snapshot time " + fmt(t) + " is not a step time within [0, tEnd]");
    }
    wanted.push_back(static_cast<int>(n));
  }
  RefinementReport rep;
  rep.times = times;
  rep.floor = floor > 0.0 ? floor : 2.0 * dx;

  auto run = [&](const SetMask& start, const Anisotropy& a, const FlowConfig& rc, RefinementRun& out) {
    std::vector<std::optional<SetMask>> masks(wanted.size());
    const FlowTrace tr = evolve(start, a, f, rc, [&](const FlowStep& st, const SetMask& m, const Grid2D&) {
      for (std::size_t k = 0; k < wanted.size(); ++k) {
        if (wanted[k] == st.n) masks[k] = m;
      }
    });
    out.breakdown = tr.breakdown;
    if (!masks.front()) {
      throw FlowError("refinement: run eps = " + fmt(out.eps) + " broke down before the first snapshot: " +
                      tr.breakdown.value_or("unknown"));
    }
    return masks;
  };

  RefinementRun direct;
  const auto reference = run(e0, a_crystal, c, direct);
  direct.distance.assign(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!reference[k]) direct.distance[k] = std::numeric_limits<double>::quiet_NaN();
  }
  rep.runs.push_back(direct);

  for (double eps : c.eps_schedule) {
    RefinementRun r;
    r.eps = eps;
    const Anisotropy a_eps = regularize(a_crystal, eps).result;
    SetMask start = e0;
    FlowConfig rc = c;
    try {
      start = approximate_crystal(e0, a_crystal, a_eps, c.R0).mask;
      r.approximated = true;
      rc.R0 = c.R0 - 2.0 * dx;
    } catch (const RegularityError&) {
      r.approximated = false;
    }
    r.initial_distance = hausdorff_boundary(start, e0);
    const auto masks = run(start, a_eps, rc, r);
    for (std::size_t k = 0; k < times.size(); ++k) {
      r.distance.push_back(masks[k] && reference[k] ? hausdorff_boundary(*masks[k], *reference[k])
                                                    : std::numeric_limits<double>::quiet_NaN());
    }
    rep.runs.push_back(std::move(r));
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    bool ok = true;
    for (std::size_t i = 2; i < rep.runs.size(); ++i) {
      const double prev = rep.runs[i - 1].distance[k], cur = rep.runs[i].distance[k];
      if (!(cur <= prev || cur <= rep.floor)) ok = false;
    }
    rep.monotone.push_back(ok);
  }
  return rep;
}

}  // namespace wulff
