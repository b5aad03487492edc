#ifndef WULFF_FLOW_HPP_
#define WULFF_FLOW_HPP_

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wulff/anisotropy.hpp"
#include "wulff/forcing.hpp"
#include "wulff/grid.hpp"

namespace wulff {

class FlowError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Zero means "use the default" for every numeric field below that documents
// one; defaults are resolved against the grid by resolve().
struct FlowConfig {
  double h = 0.0;  // default min(R0^2 / 32, dx R0 / 4)
  double t_end = 0.0;
  double R0 = 0.0;  // certified initial RW radius
  double tol_solver = 1e-7;
  int max_iter = 20000;
  double band_half_width = 0.0;     // curvature diagnostics band, default 3 dx
  double min_component_area = 0.0;  // default (4 dx)^2
  double stop_radius = 0.0;         // default 4 dx; must be >= 4 dx
  std::vector<double> eps_schedule;

  // Solver band half-width; default max(8 dx, 3 sqrt(2h)), infinity = whole grid.
  double solver_band = 0.0;
  // Radii and RW checks run every this many steps (and at the last step).
  int diagnostics_every = 1;
  // Masks kept in the trace every this many steps (0: only first and last).
  int snapshot_every = 0;
  bool check_initial_rw = true;
  // Keep going with rw_ok = false instead of stopping at a failed RW check.
  bool continue_on_rw_failure = false;

  // Copy with defaults filled in for grid spacing dx.
  FlowConfig resolve(double dx) const;
};

// Boundary of the set must stay this many cells from the domain edge.
inline constexpr int kInitialMarginCells = 16;
inline constexpr int kRunningMarginCells = 8;

struct FlowStep {
  int n = 0;
  double t = 0.0;
  double area = 0.0;
  double perimeter = 0.0;  // anisotropic, sum of polar(normal) |segment|
  double a_n = std::numeric_limits<double>::quiet_NaN();  // sup |div z + dG/h| on the band
  // NaN on steps without diagnostics.
  double r_inner = std::numeric_limits<double>::quiet_NaN();
  double r_outer = std::numeric_limits<double>::quiet_NaN();
  double hausdorff_step = 0.0;  // between consecutive zero-level contours
  bool rw_checked = false;
  bool rw_ok = true;
  // Fitted lambda0 = max |(d_{n+1} - d_n - dG)/h - div z| / |d| over band
  // cells with |d| >= dx, and the grid residual max(|...| - lambda0 |d|).
  double lambda0 = std::numeric_limits<double>::quiet_NaN();
  double lambda_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double gap = 0.0;
  std::size_t flipped_cells = 0;  // by the small-component filter
};

struct Snapshot {
  int n = 0;
  double t = 0.0;
  SetMask mask;
  Grid2D distance;
};

struct FlowTrace {
  FlowConfig config;  // resolved
  std::vector<FlowStep> steps;  // steps[0] is the initial state
  std::vector<Snapshot> snapshots;
  std::optional<std::string> breakdown;
  std::vector<std::string> warnings;
  bool completed() const { return !breakdown.has_value(); }
  const Snapshot& last() const { return snapshots.back(); }
};

// Called after every recorded step with the new mask and distance.
using StepObserver = std::function<void(const FlowStep&, const SetMask&, const Grid2D&)>;

// Iterates the variational step from e0. Throws FlowError on violated
// preconditions (RW at R0, margin, forcing rule, parameters); breakdowns
// (radius below stop_radius, failed RW check, margin loss, solver failure)
// end the trace with a reason instead.
FlowTrace evolve(const SetMask& e0, const Anisotropy& a, const Forcing& f, const FlowConfig& cfg,
                 const StepObserver& observer = nullptr);
// Same, starting from E0 = {level0 < 0}, with the first distance taken from
// the sub-cell zero level of level0 instead of the pixel boundary (analytic
// data, e.g. gauge(x) - r).
FlowTrace evolve(const Grid2D& level0, const Anisotropy& a, const Forcing& f, const FlowConfig& cfg,
                 const StepObserver& observer = nullptr);

// Trace CSV: n,t,area,rInner,rOuter,A_n,hausdorffStep,rwOk plus perimeter,
// lambda0, lambdaResidual, iterations, gap. Diagnostics not computed on a
// step are left empty.
std::string trace_csv(const FlowTrace& trace);

struct RefinementRun {
  double eps = 0.0;  // 0 for the direct crystalline run
  // False when the datum fails the crystalline RW check (a disk for the
  // square, say) and the run starts from the datum itself.
  bool approximated = false;
  double initial_distance = 0.0;  // Hausdorff to the crystalline datum
  std::vector<double> distance;   // Hausdorff to the crystalline flow, per snapshot time
  std::optional<std::string> breakdown;
};

struct RefinementReport {
  std::vector<double> times;
  std::vector<RefinementRun> runs;  // runs[0] is the direct crystalline run
  // Per time, distance non-increasing as eps decreases, or already below
  // the floor.
  std::vector<bool> monotone;
  double floor = 0.0;
};

// Regularized flows for each eps of cfg.eps_schedule (decreasing) started
// from approximate_crystal(e0), compared with the direct crystalline flow at
// the given times (default {t_end}). floor defaults to 2 dx.
RefinementReport crystalline_refinement(const SetMask& e0, const Anisotropy& a_crystal, const Forcing& f,
                                        const FlowConfig& cfg, std::vector<double> times = {},
                                        double floor = 0.0);

}  // namespace wulff

#endif  // WULFF_FLOW_HPP_
