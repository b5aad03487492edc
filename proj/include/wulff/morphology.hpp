#ifndef WULFF_MORPHOLOGY_HPP_
#define WULFF_MORPHOLOGY_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "wulff/anisotropy.hpp"
#include "wulff/grid.hpp"

namespace wulff {

// Erosion (r < 0) or dilation (r > 0) by |r| W: erosion = {d <= -|r|},
// dilation = {d < r}, so erode(m) == complement(dilate(complement(m))).
SetMask minkowski(const SetMask& m, const Anisotropy& a, double r);
inline SetMask erode(const SetMask& m, const Anisotropy& a, double r) { return minkowski(m, a, -r); }
inline SetMask dilate(const SetMask& m, const Anisotropy& a, double r) { return minkowski(m, a, r); }

// Union of the translates x + rW contained in the mask, as cells. Centers are
// taken from cells with d <= -r + tau and footprints are cells within r + tau
// of a center, clipped to the mask; tau is a cell diagonal in the gauge (half
// for the off-grid center, half for the digitized boundary).
SetMask opening(const SetMask& m, const Anisotropy& a, double r);
// complement(opening(complement(m))).
SetMask closing(const SetMask& m, const Anisotropy& a, double r);

// Half a cell diagonal measured in the gauge.
double cell_slack(const Anisotropy& a, double dx);

struct RwWitness {
  Vec2 point;
  double radius = 0.0;
  std::string clause;  // "inner", "outer" or "connectivity"
};

struct RwReport {
  bool inner_ok = false;
  bool outer_ok = false;
  bool connectivity_ok = false;
  std::optional<RwWitness> witness;
  double radius_tested = 0.0;

  bool ok() const { return inner_ok && outer_ok && connectivity_ok; }
  // {"innerOk", "outerOk", "connectivityOk", "witness": {x, y, r} | null,
  //  "radiusTested"}
  std::string to_json() const;
};

// Falsifier for the RW condition at radius R. Inner/outer: the opening by R
// of the set / its complement reproduces it up to one cell. Connectivity:
// for r = R k / 8 (k = 1..7) and up to `samples` centers among the cells with
// |d| <= R (deterministic stride), (x + rW) minus the set has at most one
// significant 4-connected component. A component is significant when it holds
// a cell more than one cell diagonal from both the set and the rim.
RwReport check_rw(const SetMask& m, const Anisotropy& a, double R, int samples = 512);

class RegularityError : public std::runtime_error {
 public:
  RegularityError(const std::string& what, RwReport rep) : std::runtime_error(what), report(std::move(rep)) {}
  RwReport report;
};

// Smooth approximation of a set that satisfies the RW condition for a
// crystalline gauge: the closing of the opening by R W_eps.
struct ApproxResult {
  SetMask mask;
  RwReport input_check;
  RwReport output_check;  // at R - 2dx under a_eps
};
ApproxResult approximate_crystal(const SetMask& m, const Anisotropy& a, const Anisotropy& a_eps, double R);

struct Radii {
  double inner = 0.0;
  double outer = 0.0;
};

// Largest r (to within tol, default dx / 4) with a nonempty erosion whose
// opening reproduces the set up to one cell; outer is the same for the
// complement. Both are capped at a quarter of the domain size.
Radii estimate_radii(const SetMask& m, const Anisotropy& a, double tol = 0.0);

// Largest admissible |r| for minkowski.
double max_morphology_radius(const GridGeometry& g);

}  // namespace wulff

#endif  // WULFF_MORPHOLOGY_HPP_
