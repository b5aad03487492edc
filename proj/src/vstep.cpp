#include "wulff/vstep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "wulff/parallel.hpp"

namespace wulff {

namespace {

constexpr double kFeasible = 1e-8;

struct Box {
  int i0 = 0;
  int j0 = 0;
  int nx = 0;
  int ny = 0;
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

// Dense arrays on a rectangle with the grid's boundary conventions:
// forward differences vanish on the last column / row, div = -grad^T.
struct Field {
  int nx = 0;
  int ny = 0;
  double dx = 1.0;
};

void divergence_into(const Field& f, const std::vector<double>& px, const std::vector<double>& py,
                     std::vector<double>& out) {
  const int nx = f.nx;
  const int ny = f.ny;
  const double inv = 1.0 / f.dx;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      const double* x = &px[row];
      const double* y = &py[row];
      double* o = &out[row];
      if (nx == 1) {
        o[0] = 0.0;
      } else {
        o[0] = x[0];
        for (int i = 1; i + 1 < nx; ++i) o[i] = x[i] - x[i - 1];
        o[nx - 1] = -x[nx - 2];
      }
      if (ny > 1) {
        if (j == 0) {
          for (int i = 0; i < nx; ++i) o[i] += y[i];
        } else if (j + 1 < ny) {
          const double* yd = y - nx;
          for (int i = 0; i < nx; ++i) o[i] += y[i] - yd[i];
        } else {
          const double* yd = y - nx;
          for (int i = 0; i < nx; ++i) o[i] -= yd[i];
        }
      }
      for (int i = 0; i < nx; ++i) o[i] *= inv;
    }
  });
}

void recover_w(const Field& f, double h, const std::vector<double>& g, const std::vector<double>& zx,
               const std::vector<double>& zy, std::vector<double>& divz, std::vector<double>& w) {
  divergence_into(f, zx, zy, divz);
  for (std::size_t k = 0; k < g.size(); ++k) w[k] = g[k] + h * divz[k];
}

struct Certificate {
  double tv = 0.0;        // sum phi°(grad w)
  double pairing = 0.0;   // sum z . grad w
  double fidelity = 0.0;  // sum (w - g)^2
  double max_gauge = 0.0;
};

// Certificate summed over cells with active[k] != 0 (every cell when active
// is empty). Row sums are added in row order so the result does not depend
// on the worker count.
Certificate certify(const Field& f, const Anisotropy& a, const std::vector<double>& g, const std::vector<double>& zx,
                    const std::vector<double>& zy, const std::vector<double>& w,
                    const std::vector<std::uint8_t>& active) {
  const int nx = f.nx;
  const int ny = f.ny;
  std::vector<Certificate> rows(static_cast<std::size_t>(ny));
  const double inv = 1.0 / f.dx;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      Certificate c;
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = row + i;
        if (!active.empty() && !active[k]) continue;
        const Vec2 grad{i + 1 < nx ? (w[k + 1] - w[k]) * inv : 0.0, j + 1 < ny ? (w[k + nx] - w[k]) * inv : 0.0};
        if (grad.x != 0.0 || grad.y != 0.0) c.tv += a.polar(grad);
        c.pairing += zx[k] * grad.x + zy[k] * grad.y;
        const double e = w[k] - g[k];
        c.fidelity += e * e;
        if (zx[k] != 0.0 || zy[k] != 0.0) c.max_gauge = std::max(c.max_gauge, a.gauge({zx[k], zy[k]}));
      }
      rows[static_cast<std::size_t>(j)] = c;
    }
  });
  Certificate out;
  for (const Certificate& c : rows) {
    out.tv += c.tv;
    out.pairing += c.pairing;
    out.fidelity += c.fidelity;
    out.max_gauge = std::max(out.max_gauge, c.max_gauge);
  }
  return out;
}

double total_variation(const Field& f, const Anisotropy& a, const std::vector<double>& g,
                       const std::vector<std::uint8_t>& active) {
  const int nx = f.nx;
  const int ny = f.ny;
  std::vector<double> rows(static_cast<std::size_t>(ny), 0.0);
  const double inv = 1.0 / f.dx;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      double s = 0.0;
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = row + i;
        if (!active.empty() && !active[k]) continue;
        const Vec2 grad{i + 1 < nx ? (g[k + 1] - g[k]) * inv : 0.0, j + 1 < ny ? (g[k + nx] - g[k]) * inv : 0.0};
        if (grad.x != 0.0 || grad.y != 0.0) s += a.polar(grad);
      }
      rows[static_cast<std::size_t>(j)] = s;
    }
  });
  double s = 0.0;
  for (double r : rows) s += r;
  return s;
}

// Relative gap of a certificate; infinite when z leaves W.
double relative_gap(const Certificate& c, double scale) {
  if (c.max_gauge > 1.0 + kFeasible) return std::numeric_limits<double>::infinity();
  const double gap = std::max(0.0, c.tv - c.pairing);
  if (scale <= 0.0) return gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return gap / scale;
}

struct RunResult {
  int iterations = 0;
  double gap = std::numeric_limits<double>::infinity();
  double scale = 0.0;
};

// Accelerated projected gradient on the dual over the active cells of box;
// the other cells of z are held fixed. z (full grid) is read as the starting
// point and overwritten with the best certified iterate.
RunResult run(const Box& box, const std::vector<std::uint8_t>& active_full, const GridGeometry& full, double h,
              const Anisotropy& a, const std::vector<double>& gfull, std::vector<double>& zxf,
              std::vector<double>& zyf, const StepOptions& opt, std::vector<SolverLogEntry>* log) {
  const Field f{box.nx, box.ny, full.dx};
  const std::size_t n = box.size();
  std::vector<double> g(n), zx(n), zy(n);
  std::vector<std::uint8_t> active(n);
  for (int j = 0; j < box.ny; ++j) {
    for (int i = 0; i < box.nx; ++i) {
      const std::size_t src = full.index(box.i0 + i, box.j0 + j);
      const std::size_t dst = static_cast<std::size_t>(j) * box.nx + i;
      g[dst] = gfull[src];
      zx[dst] = zxf[src];
      zy[dst] = zyf[src];
      active[dst] = active_full[src];
    }
  }
  RunResult res;
  res.scale = total_variation(f, a, g, active);
  std::vector<double> yx = zx, yy = zy, nxv = zx, nyv = zy, w(n), divz(n);
  std::vector<double> bestx = zx, besty = zy;
  // 1 / Lipschitz constant of the dual gradient, |div|^2 <= 8 / dx^2.
  const double tau = full.dx * full.dx / (8.0 * h);
  const double inv = 1.0 / full.dx;
  const int nx = box.nx;
  const int ny = box.ny;
  double t = 1.0;
  std::vector<double> dots(static_cast<std::size_t>(ny));
  int k = 0;
  for (;; ++k) {
    if (k % opt.check_every == 0 || k == opt.max_iter) {
      recover_w(f, h, g, zx, zy, divz, w);
      const Certificate c = certify(f, a, g, zx, zy, w, active);
      const double gap = relative_gap(c, res.scale);
      if (log) log->push_back({k, gap, (c.tv + 0.5 * c.fidelity / h) * full.dx * full.dx});
      // Without projection (fault injection) the certificate is meaningless;
      // keep the latest iterate so the fault stays visible.
      if (k == 0 || gap < res.gap || !opt.project_dual) {
        res.gap = gap;
        bestx = zx;
        besty = zy;
      }
      if (gap <= opt.tol || k == opt.max_iter) break;
    }
    // Ascent step at the extrapolated point, then projection onto W.
    recover_w(f, h, g, yx, yy, divz, w);
    parallel_for(ny, [&](int j0, int j1) {
      for (int j = j0; j < j1; ++j) {
        double dot = 0.0;
        const std::size_t row = static_cast<std::size_t>(j) * nx;
        for (int i = 0; i < nx; ++i) {
          const std::size_t q = row + i;
          if (!active[q]) continue;
          Vec2 p{yx[q] + tau * (i + 1 < nx ? (w[q + 1] - w[q]) * inv : 0.0),
                 yy[q] + tau * (j + 1 < ny ? (w[q + nx] - w[q]) * inv : 0.0)};
          if (opt.project_dual) p = a.project(p);
          nxv[q] = p.x;
          nyv[q] = p.y;
          dot += (yx[q] - p.x) * (p.x - zx[q]) + (yy[q] - p.y) * (p.y - zy[q]);
        }
        dots[static_cast<std::size_t>(j)] = dot;
      }
    });
    double dot = 0.0;
    for (double d : dots) dot += d;
    double beta = 0.0;
    if (dot > 0.0) {
      t = 1.0;  // gradient restart: the momentum points uphill
    } else {
      const double t1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      beta = (t - 1.0) / t1;
      t = t1;
    }
    for (std::size_t q = 0; q < n; ++q) {
      if (!active[q]) continue;
      yx[q] = nxv[q] + beta * (nxv[q] - zx[q]);
      yy[q] = nyv[q] + beta * (nyv[q] - zy[q]);
    }
    zx.swap(nxv);
    zy.swap(nyv);
  }
  res.iterations = k;
  for (int j = 0; j < box.ny; ++j) {
    for (int i = 0; i < box.nx; ++i) {
      const std::size_t dst = full.index(box.i0 + i, box.j0 + j);
      const std::size_t src = static_cast<std::size_t>(j) * box.nx + i;
      zxf[dst] = bestx[src];
      zyf[dst] = besty[src];
    }
  }
  return res;
}

// Midpoint of the exposed face of W in the direction of grad g (zero where
// g is locally flat). With only_zero, cells holding a nonzero z are kept.
void cahn_hoffmann_fill(const GridGeometry& geo, const Anisotropy& a, const std::vector<double>& g,
                        std::vector<double>& zx, std::vector<double>& zy, bool only_zero) {
  const int nx = geo.nx;
  const int ny = geo.ny;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = geo.index(i, j);
        if (only_zero && (zx[k] != 0.0 || zy[k] != 0.0)) continue;
        const Vec2 grad{i + 1 < nx ? g[k + 1] - g[k] : 0.0, j + 1 < ny ? g[k + nx] - g[k] : 0.0};
        if (grad.x == 0.0 && grad.y == 0.0) {
          zx[k] = zy[k] = 0.0;
          continue;
        }
        const Vec2 m = a.project(a.cahn_hoffmann(grad).midpoint());
        zx[k] = m.x;
        zy[k] = m.y;
      }
    }
  });
}

void validate(const StepProblem& p, const StepOptions& opt) {
  if (!(p.h > 0.0) || !std::isfinite(p.h)) throw StepError("solve_step: h must be positive and finite");
  if (p.d.size() == 0 || p.d.size() != p.d.geom.size()) throw StepError("solve_step: empty distance grid");
  if (!p.d.finite()) throw StepError("solve_step: non-finite distance values");
  if (p.dg.size() != 0) {
    if (!p.dg.geom.same_shape(p.d.geom)) throw StepError("solve_step: forcing grid shape mismatch");
    if (!p.dg.finite()) throw StepError("solve_step: non-finite forcing values");
  }
  if (!(opt.tol > 0.0)) throw StepError("solve_step: tol must be positive");
  if (opt.max_iter < 0 || opt.check_every < 1) throw StepError("solve_step: bad iteration limits");
  if (opt.warm_start &&
      (!opt.warm_start->x.geom.same_shape(p.d.geom) || !opt.warm_start->y.geom.same_shape(p.d.geom))) {
    throw StepError("solve_step: warm start shape mismatch");
  }
}

}  // namespace

StepSolution solve_step(const StepProblem& p, const StepOptions& opt) {
  validate(p, opt);
  const GridGeometry& geo = p.d.geom;
  const std::size_t n = geo.size();
  std::vector<double> g = p.d.v;
  if (p.dg.size() != 0) {
    for (std::size_t k = 0; k < n; ++k) g[k] += p.dg.v[k];
  }
  StepSolution s;
  std::vector<double> zx(n, 0.0), zy(n, 0.0);
  if (opt.warm_start) {
    zx = opt.warm_start->x.v;
    zy = opt.warm_start->y.v;
  }
  cahn_hoffmann_fill(geo, p.a, g, zx, zy, opt.warm_start != nullptr);
  // Active cells and their bounding box, grown so that every neighbor read
  // by the kernels lies inside.
  std::vector<std::uint8_t> active(n, 0);
  int i0 = geo.nx, j0 = geo.ny, i1 = -1, j1 = -1;
  for (int j = 0; j < geo.ny; ++j) {
    for (int i = 0; i < geo.nx; ++i) {
      const std::size_t k = geo.index(i, j);
      if (!(std::abs(g[k]) < opt.band)) continue;
      active[k] = 1;
      ++s.active_cells;
      i0 = std::min(i0, i);
      j0 = std::min(j0, j);
      i1 = std::max(i1, i);
      j1 = std::max(j1, j);
    }
  }
  std::vector<SolverLogEntry>* log = opt.record_log ? &s.log : nullptr;
  if (s.active_cells > 0) {
    i0 = std::max(0, i0 - 2);
    j0 = std::max(0, j0 - 2);
    i1 = std::min(geo.nx - 1, i1 + 2);
    j1 = std::min(geo.ny - 1, j1 + 2);
    const Box box{i0, j0, i1 - i0 + 1, j1 - j0 + 1};
    const RunResult r = run(box, active, geo, p.h, p.a, g, zx, zy, opt, log);
    s.iterations = r.iterations;
    s.gap = r.gap;
    s.scale = r.scale;
  }
  s.z.x = Grid2D(geo);
  s.z.y = Grid2D(geo);
  s.z.x.v = std::move(zx);
  s.z.y.v = std::move(zy);
  s.divz = Grid2D(geo);
  s.w = Grid2D(geo);
  const Field full{geo.nx, geo.ny, geo.dx};
  recover_w(full, p.h, g, s.z.x.v, s.z.y.v, s.divz.v, s.w.v);
  s.full_gap = relative_gap(certify(full, p.a, g, s.z.x.v, s.z.y.v, s.w.v, {}), total_variation(full, p.a, g, {}));
  s.converged = s.gap <= opt.tol;
  s.new_mask = below(s.w, -1e-12);
  return s;
}

double dual_infeasibility(const StepSolution& s, const Anisotropy& a) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.z.x.size(); ++k) m = std::max(m, a.gauge({s.z.x.v[k], s.z.y.v[k]}));
  return m;
}

double euler_lagrange_residual(const StepSolution& s, const StepProblem& p) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.w.size(); ++k) {
    const double dg = p.dg.size() != 0 ? p.dg.v[k] : 0.0;
    m = std::max(m, std::abs(-p.h * s.divz.v[k] + s.w.v[k] - p.d.v[k] - dg));
  }
  return m;
}

double curvature_band_bound(const StepSolution& s, const StepProblem& p, double a_band, double b_band, int margin) {
  const GridGeometry& geo = p.d.geom;
  if (!s.w.geom.same_shape(geo)) throw StepError("curvature_band_bound: shape mismatch");
  double sup = 0.0;
  bool any = false;
  for (int j = 0; j < geo.ny; ++j) {
    for (int i = 0; i < geo.nx; ++i) {
      if (geo.edge_distance(i, j) < margin) continue;
      const std::size_t k = geo.index(i, j);
      const double w = s.w.v[k];
      const double d = p.d.v[k];
      if (std::max(w, d) < a_band || std::min(w, d) > b_band) continue;
      any = true;
      const double dg = p.dg.size() != 0 ? p.dg.v[k] : 0.0;
      sup = std::max(sup, std::abs(s.divz.v[k] + dg / p.h));
    }
  }
  if (!any) throw StepError("curvature_band_bound: empty band");
  return sup;
}

std::string solver_log_csv(const std::vector<SolverLogEntry>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,gap,primal\n";
  for (const auto& e : log) os << e.iteration << ',' << e.gap << ',' << e.primal << '\n';
  return os.str();
}

}  // namespace wulff
