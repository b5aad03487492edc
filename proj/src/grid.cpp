#include "wulff/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wulff/parallel.hpp"

namespace wulff {

GridGeometry::GridGeometry(int nx_, int ny_, double dx_, Vec2 origin_) : nx(nx_), ny(ny_), dx(dx_), origin(origin_) {
  if (nx < 8 || ny < 8) throw GridError("grid needs nx, ny >= 8");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw GridError("grid spacing must be positive");
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) throw GridError("grid origin must be finite");
}

GridGeometry GridGeometry::Centered(int nx, int ny, double dx) {
  return GridGeometry(nx, ny, dx, {-0.5 * (nx - 1) * dx, -0.5 * (ny - 1) * dx});
}

int GridGeometry::edge_distance(int i, int j) const { return std::min({i, j, nx - 1 - i, ny - 1 - j}); }

double Grid2D::min() const { return *std::min_element(v.begin(), v.end()); }
double Grid2D::max() const { return *std::max_element(v.begin(), v.end()); }

double Grid2D::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool Grid2D::finite() const {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Grid2D sample(const GridGeometry& g, const std::function<double(Vec2)>& f) {
  Grid2D out(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) out(i, j) = f(g.point(i, j));
  }
  return out;
}

std::size_t SetMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

SetMask mask_from(const GridGeometry& g, const std::function<bool(Vec2)>& pred) {
  SetMask m(g);
  for (std::size_t k = 0; k < g.size(); ++k) m.inside[k] = pred(g.point(k)) ? 1 : 0;
  return m;
}

SetMask below(const Grid2D& values, double level) {
  SetMask m(values.geom);
  for (std::size_t k = 0; k < values.size(); ++k) m.inside[k] = values.v[k] < level ? 1 : 0;
  return m;
}

SetMask complement(const SetMask& m) {
  SetMask c(m.geom);
  for (std::size_t k = 0; k < m.size(); ++k) c.inside[k] = m.inside[k] ? 0 : 1;
  return c;
}

namespace {

void require_same(const SetMask& a, const SetMask& b) {
  if (!a.geom.same_shape(b.geom)) throw GridError("mask shape mismatch");
}

bool touches_outside(const SetMask& a, int i, int j) {
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      if (a.geom.contains(i + di, j + dj) && !a(i + di, j + dj)) return true;
    }
  }
  return false;
}

bool touches_inside(const SetMask& a, int i, int j) {
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      if (a.geom.contains(i + di, j + dj) && a(i + di, j + dj)) return true;
    }
  }
  return false;
}

}  // namespace

SetMask set_union(const SetMask& a, const SetMask& b) {
  require_same(a, b);
  SetMask m(a.geom);
  for (std::size_t k = 0; k < a.size(); ++k) m.inside[k] = a.inside[k] | b.inside[k];
  return m;
}

SetMask set_intersection(const SetMask& a, const SetMask& b) {
  require_same(a, b);
  SetMask m(a.geom);
  for (std::size_t k = 0; k < a.size(); ++k) m.inside[k] = a.inside[k] & b.inside[k];
  return m;
}

bool subset(const SetMask& a, const SetMask& b) {
  require_same(a, b);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.inside[k] && !b.inside[k]) return false;
  }
  return true;
}

std::size_t interior_difference(const SetMask& a, const SetMask& b) {
  require_same(a, b);
  std::size_t n = 0;
  for (int j = 0; j < a.geom.ny; ++j) {
    for (int i = 0; i < a.geom.nx; ++i) {
      if (a(i, j) && !b(i, j) && !touches_outside(a, i, j)) ++n;
    }
  }
  return n;
}

std::ptrdiff_t first_mismatch_beyond_one_cell(const SetMask& a, const SetMask& b) {
  require_same(a, b);
  for (int j = 0; j < a.geom.ny; ++j) {
    for (int i = 0; i < a.geom.nx; ++i) {
      const bool x = a(i, j);
      if (x == b(i, j)) continue;
      if ((x && !touches_outside(a, i, j)) || (!x && !touches_inside(a, i, j))) {
        return static_cast<std::ptrdiff_t>(a.geom.index(i, j));
      }
    }
  }
  return -1;
}

bool equal_up_to_one_cell(const SetMask& a, const SetMask& b) { return first_mismatch_beyond_one_cell(a, b) < 0; }

int margin_cells(const SetMask& m) {
  int best = std::max(m.geom.nx, m.geom.ny);
  for (int j = 0; j < m.geom.ny; ++j) {
    for (int i = 0; i < m.geom.nx; ++i) {
      if (m(i, j)) best = std::min(best, m.geom.edge_distance(i, j));
    }
  }
  return best;
}

int label_components(const SetMask& m, bool eight_connected, std::vector<int>& labels) {
  const GridGeometry& g = m.geom;
  labels.assign(g.size(), -1);
  std::vector<std::size_t> stack;
  int count = 0;
  for (std::size_t start = 0; start < g.size(); ++start) {
    if (!m.inside[start] || labels[start] >= 0) continue;
    labels[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(k % g.nx);
      const int j = static_cast<int>(k / g.nx);
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if ((di == 0 && dj == 0) || (!eight_connected && di != 0 && dj != 0)) continue;
          const int a = i + di;
          const int b = j + dj;
          if (!g.contains(a, b)) continue;
          const std::size_t q = g.index(a, b);
          if (m.inside[q] && labels[q] < 0) {
            labels[q] = count;
            stack.push_back(q);
          }
        }
      }
    }
    ++count;
  }
  return count;
}

std::size_t remove_small_components(SetMask& m, double min_area) {
  const double cell = m.geom.dx * m.geom.dx;
  std::size_t flipped = 0;
  auto prune = [&](SetMask& target, bool eight, std::uint8_t new_value) {
    std::vector<int> labels;
    const int n = label_components(target, eight, labels);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(n), 0);
    for (int l : labels) {
      if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    }
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const int l = labels[k];
      if (l >= 0 && static_cast<double>(sizes[static_cast<std::size_t>(l)]) * cell < min_area) {
        m.inside[k] = new_value;
        ++flipped;
      }
    }
  };
  prune(m, true, 0);
  SetMask c = complement(m);
  prune(c, false, 1);
  return flipped;
}

void gradient(const Grid2D& w, Grid2D& gx, Grid2D& gy) {
  const GridGeometry& g = w.geom;
  if (gx.geom.size() != g.size()) gx = Grid2D(g);
  if (gy.geom.size() != g.size()) gy = Grid2D(g);
  gx.geom = g;
  gy.geom = g;
  const double inv = 1.0 / g.dx;
  const int nx = g.nx;
  const int ny = g.ny;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      const double* r = &w.v[static_cast<std::size_t>(j) * nx];
      const double* up = j + 1 < ny ? r + nx : nullptr;
      double* ox = &gx.v[static_cast<std::size_t>(j) * nx];
      double* oy = &gy.v[static_cast<std::size_t>(j) * nx];
      for (int i = 0; i + 1 < nx; ++i) ox[i] = (r[i + 1] - r[i]) * inv;
      ox[nx - 1] = 0.0;
      if (up) {
        for (int i = 0; i < nx; ++i) oy[i] = (up[i] - r[i]) * inv;
      } else {
        for (int i = 0; i < nx; ++i) oy[i] = 0.0;
      }
    }
  });
}

void divergence(const Grid2D& zx, const Grid2D& zy, Grid2D& out) {
  const GridGeometry& g = zx.geom;
  if (!g.same_shape(zy.geom)) throw GridError("divergence: shape mismatch");
  if (out.geom.size() != g.size()) out = Grid2D(g);
  out.geom = g;
  const double inv = 1.0 / g.dx;
  const int nx = g.nx;
  const int ny = g.ny;
  parallel_for(ny, [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      const std::size_t row = static_cast<std::size_t>(j) * nx;
      const double* px = &zx.v[row];
      const double* py = &zy.v[row];
      const double* pyd = j > 0 ? py - nx : nullptr;
      double* o = &out.v[row];
      o[0] = px[0];
      for (int i = 1; i + 1 < nx; ++i) o[i] = px[i] - px[i - 1];
      o[nx - 1] = -px[nx - 2];
      if (j + 1 < ny) {
        for (int i = 0; i < nx; ++i) o[i] += py[i];
      }
      if (pyd) {
        for (int i = 0; i < nx; ++i) o[i] -= pyd[i];
      }
      for (int i = 0; i < nx; ++i) o[i] *= inv;
    }
  });
}

Grid2D divergence(const Grid2D& zx, const Grid2D& zy) {
  Grid2D out(zx.geom);
  divergence(zx, zy, out);
  return out;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t x) {
  unsigned char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>((x >> (8 * k)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t x) {
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((x >> (8 * k)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(const unsigned char* b, int n) {
  std::uint64_t x = 0;
  for (int k = n - 1; k >= 0; --k) x = (x << 8) | b[k];
  return x;
}

}  // namespace

void write_grid(const std::string& path, const Grid2D& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write("WFG2", 4);
  put_u32(os, static_cast<std::uint32_t>(g.geom.nx));
  put_u32(os, static_cast<std::uint32_t>(g.geom.ny));
  put_u32(os, std::bit_cast<std::uint32_t>(static_cast<float>(g.geom.dx)));
  for (double x : g.v) put_u64(os, std::bit_cast<std::uint64_t>(x));
}

Grid2D read_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  unsigned char head[16];
  if (!is.read(reinterpret_cast<char*>(head), 16) || std::memcmp(head, "WFG2", 4) != 0) {
    throw std::runtime_error(path + ": not a WFG2 grid");
  }
  const int nx = static_cast<int>(get_le(head + 4, 4));
  const int ny = static_cast<int>(get_le(head + 8, 4));
  const double dx = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(head + 12, 4)));
  Grid2D g(GridGeometry::Centered(nx, ny, dx));
  std::vector<unsigned char> buf(g.size() * 8);
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw std::runtime_error(path + ": truncated grid");
  }
  for (std::size_t k = 0; k < g.size(); ++k) g.v[k] = std::bit_cast<double>(get_le(&buf[8 * k], 8));
  return g;
}

void write_pgm(const std::string& path, const SetMask& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "P5\n" << m.geom.nx << " " << m.geom.ny << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(m.geom.nx));
  for (int j = m.geom.ny - 1; j >= 0; --j) {
    for (int i = 0; i < m.geom.nx; ++i) row[static_cast<std::size_t>(i)] = m(i, j) ? static_cast<char>(255) : 0;
    os.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

SetMask read_pgm(const std::string& path, double dx) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read mask file " + path);
  auto token = [&]() {
    std::string t;
    char c;
    while (is.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(is, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
  int nx = 0, ny = 0, maxval = 0;
  try {
    nx = std::stoi(token());
    ny = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed PGM header");
  }
  if (maxval <= 0 || maxval > 255) throw std::runtime_error(path + ": unsupported PGM maxval");
  SetMask m(GridGeometry::Centered(nx, ny, dx));
  std::vector<unsigned char> row(static_cast<std::size_t>(nx));
  for (int j = ny - 1; j >= 0; --j) {
    if (!is.read(reinterpret_cast<char*>(row.data()), nx)) throw std::runtime_error(path + ": truncated PGM");
    for (int i = 0; i < nx; ++i) m.set(i, j, 2 * row[static_cast<std::size_t>(i)] > maxval);
  }
  return m;
}

}  // namespace wulff
