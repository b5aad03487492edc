#ifndef WULFF_VSTEP_HPP_
#define WULFF_VSTEP_HPP_

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wulff/anisotropy.hpp"
#include "wulff/grid.hpp"

namespace wulff {

class StepError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One implicit step: minimize
//   sum phi°(grad w) dx^2 + (1/2h) sum (w - g)^2 dx^2,   g = d + dg.
struct StepProblem {
  Grid2D d;   // signed phi-distance of the current set
  Grid2D dg;  // forcing increment G(s, x) - G(t, x); empty means zero
  double h = 0.0;
  Anisotropy a = Anisotropy::Euclidean();
};

struct DualField {
  Grid2D x;
  Grid2D y;
};

struct SolverLogEntry {
  int iteration = 0;
  double gap = 0.0;     // relative duality gap
  double primal = 0.0;  // objective at w = g + h div z
};

struct StepOptions {
  double tol = 1e-7;
  int max_iter = 20000;
  int check_every = 10;
  // Fault injection: skip the Wulff projection of the dual update.
  bool project_dual = true;
  // Narrow band: only cells with |g| < band are iterated; z elsewhere stays
  // at the warm start (or the Cahn-Hoffmann selection of grad g) and acts
  // as a prescribed flux. Infinite band = the whole grid.
  double band = std::numeric_limits<double>::infinity();
  bool record_log = false;
  const DualField* warm_start = nullptr;
};

struct StepSolution {
  Grid2D w;
  DualField z;
  Grid2D divz;
  SetMask new_mask;  // {w < 0}, cells with |w| <= 1e-12 count as outside
  // (primal - dual) / scale for the problem actually solved (the band
  // problem when a band is set), and the same certificate over the grid.
  double gap = 0.0;
  double full_gap = 0.0;
  double scale = 0.0;  // sum of phi°(grad g) over iterated cells
  std::size_t active_cells = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<SolverLogEntry> log;
};

// Accelerated projected gradient on the dual (z in W at every cell), with
// w = g + h div z recovered in closed form. Returns the best certified
// iterate; converged is false when max_iter is reached with gap > tol.
// Throws StepError on invalid input.
StepSolution solve_step(const StepProblem& p, const StepOptions& opt = {});
inline StepSolution solve_step(const StepProblem& p, double tol, int max_iter) {
  StepOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  return solve_step(p, o);
}

// Max over gauge(z) at every cell.
double dual_infeasibility(const StepSolution& s, const Anisotropy& a);
// max |-h div z + w - d - dg|.
double euler_lagrange_residual(const StepSolution& s, const StepProblem& p);

// sup |div z + dg / h| over X = {max(w, d) >= a} and {min(w, d) <= b},
// skipping cells within `margin` cells of the domain edge. Throws StepError
// on an empty band.
double curvature_band_bound(const StepSolution& s, const StepProblem& p, double a_band, double b_band,
                            int margin = 2);

// Solver log as CSV (iteration,gap,primal).
std::string solver_log_csv(const std::vector<SolverLogEntry>& log);

}  // namespace wulff

#endif  // WULFF_VSTEP_HPP_
