#include "wulff/output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace wulff {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path);
  out << text;
  if (!out) throw OutputError("write failed: " + path);
}

std::string contours_csv(const std::vector<Polyline>& contours) {
  std::ostringstream os;
  os.precision(10);
  os << "polyline_id,x,y\n";
  for (std::size_t k = 0; k < contours.size(); ++k) {
    for (const Vec2& p : contours[k].points) os << k << ',' << p.x << ',' << p.y << '\n';
  }
  return os.str();
}

Polyline wulff_boundary(const Anisotropy& a, int n) {
  Polyline pl;
  if (a.kind() == AnisotropyKind::kPolygon) {
    pl.points = a.vertices();
    return pl;
  }
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * M_PI * k / n;
    const Vec2 u{std::cos(t), std::sin(t)};
    pl.points.push_back(u * (1.0 / a.gauge(u)));
  }
  return pl;
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
  double x0, y0, scale, height;
  double px(double x) const { return (x - x0) * scale; }
  double py(double y) const { return height - (y - y0) * scale; }
};

void path(std::ostringstream& os, const Polyline& pl, const Frame& f, const char* color, double width,
          double ox = 0.0, double oy = 0.0, double s = 1.0) {
  if (pl.points.empty()) return;
  os << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" d=\"";
  for (std::size_t k = 0; k < pl.points.size(); ++k) {
    const Vec2 p = pl.points[k];
    os << (k == 0 ? 'M' : 'L') << ox + f.px(p.x) * s << ',' << oy + f.py(p.y) * s << ' ';
  }
  if (pl.closed) os << 'Z';
  os << "\"/>\n";
}

}  // namespace

std::string svg_overlay(const GridGeometry& g, const std::vector<SvgLayer>& layers, const Anisotropy& a) {
  const double w = g.nx * g.dx, hgt = g.ny * g.dx;
  const double size = 600.0;
  const double scale = size / std::max(w, hgt);
  const Frame f{g.origin.x - 0.5 * g.dx, g.origin.y - 0.5 * g.dx, scale, hgt * scale};
  const double legend = 180.0;
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * scale + legend << "\" height=\"" << hgt * scale
     << "\">\n<rect width=\"" << w * scale << "\" height=\"" << hgt * scale
     << "\" fill=\"white\" stroke=\"#999\"/>\n";
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (const Polyline& pl : layers[k].contours) path(os, pl, f, kColors[k % 8], 1.2);
  }
  const double lx = w * scale + 10.0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const double y = 20.0 + 18.0 * k;
    os << "<line x1=\"" << lx << "\" y1=\"" << y << "\" x2=\"" << lx + 20 << "\" y2=\"" << y << "\" stroke=\""
       << kColors[k % 8] << "\" stroke-width=\"2\"/><text x=\"" << lx + 26 << "\" y=\"" << y + 4
       << "\" font-size=\"12\">" << layers[k].label << "</text>\n";
  }
  // Wulff shape legend, scaled to a 120 px box.
  const Polyline wb = wulff_boundary(a);
  double r = 0.0;
  for (const Vec2& p : wb.points) r = std::max(r, std::max(std::abs(p.x), std::abs(p.y)));
  const Frame wf{-r, -r, 55.0 / r, 2.0 * r * 55.0 / r};
  const double oy = 40.0 + 18.0 * layers.size();
  os << "<text x=\"" << lx << "\" y=\"" << oy - 6 << "\" font-size=\"12\">Wulff shape</text>\n";
  path(os, wb, wf, "#333", 1.5, lx + 25, oy);
  os << "</svg>\n";
  return os.str();
}

std::string svg_wulff_pair(const Anisotropy& base, const Anisotropy& reg, const std::string& reg_label) {
  const Polyline b = wulff_boundary(base, 512), e = wulff_boundary(reg, 512);
  double r = 0.0;
  for (const auto* pl : {&b, &e}) {
    for (const Vec2& p : pl->points) r = std::max(r, std::max(std::abs(p.x), std::abs(p.y)));
  }
  r *= 1.2;
  const double size = 500.0;
  const Frame f{-r, -r, size / (2 * r), size};
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 30
     << "\">\n<rect width=\"" << size << "\" height=\"" << size << "\" fill=\"white\" stroke=\"#999\"/>\n";
  path(os, b, f, kColors[0], 2.0);
  path(os, e, f, kColors[1], 1.5);
  os << "<text x=\"10\" y=\"" << size + 20 << "\" font-size=\"13\" fill=\"" << kColors[0] << "\">W</text>"
     << "<text x=\"40\" y=\"" << size + 20 << "\" font-size=\"13\" fill=\"" << kColors[1] << "\">" << reg_label
     << "</text>\n</svg>\n";
  return os.str();
}

}  // namespace wulff
