#ifndef WULFF_OUTPUT_HPP_
#define WULFF_OUTPUT_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "wulff/anisotropy.hpp"
#include "wulff/distance.hpp"
#include "wulff/grid.hpp"

namespace wulff {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text);

// "polyline_id,x,y" rows.
std::string contours_csv(const std::vector<Polyline>& contours);

struct SvgLayer {
  std::string label;
  std::vector<Polyline> contours;
};

// Contour overlays on the grid domain (one color per layer, in order) with
// a legend that also shows the Wulff shape of a.
std::string svg_overlay(const GridGeometry& domain, const std::vector<SvgLayer>& layers, const Anisotropy& a);

// W (boundary of the base shape) against W_eps, on [-1.2 R, 1.2 R]^2.
std::string svg_wulff_pair(const Anisotropy& base, const Anisotropy& reg, const std::string& reg_label);

// Boundary of W sampled at n directions (polygon vertices exactly).
Polyline wulff_boundary(const Anisotropy& a, int n = 256);

}  // namespace wulff

#endif  // WULFF_OUTPUT_HPP_
