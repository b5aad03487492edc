#include "wulff/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace wulff {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); }

void allow_keys(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(field, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail(field + "." + it.key(), "unknown field");
  }
}

const json& need(const json& j, const std::string& field, const char* key) {
  if (!j.contains(key)) fail(field + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) fail(field, "must be positive");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "must be an integer");
  return j.get<int>();
}

Vec2 point(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) fail(field, "must be [x, y]");
  return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "must be an array");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], field + "[" + std::to_string(k) + "]"));
  return v;
}

std::string resolve_path(const std::string& p, const std::string& base) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (std::filesystem::path(base) / path).string();
}

GridGeometry parse_grid(const json& j) {
  const std::string f = "grid";
  allow_keys(j, f, {"nx", "ny", "dx", "origin"});
  const int nx = integer(need(j, f, "nx"), f + ".nx");
  const int ny = integer(need(j, f, "ny"), f + ".ny");
  const double dx = positive(need(j, f, "dx"), f + ".dx");
  if (nx < 8 || ny < 8) fail(f, "nx and ny must be at least 8");
  if (j.contains("origin")) return GridGeometry(nx, ny, dx, point(j.at("origin"), f + ".origin"));
  return GridGeometry::Centered(nx, ny, dx);
}

InitialSpec parse_initial(const json& j, const std::string& base) {
  const std::string f = "initial";
  if (!j.is_object()) fail(f, "must be an object");
  const std::string kind = need(j, f, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  InitialSpec s;
  if (j.contains("center")) s.center = point(j.at("center"), f + ".center");
  if (kind == "wulff" || kind == "disk") {
    allow_keys(j, f, {"kind", "r", "center"});
    s.kind = kind == "wulff" ? InitialSpec::Kind::kWulff : InitialSpec::Kind::kDisk;
    s.r = positive(need(j, f, "r"), f + ".r");
  } else if (kind == "square") {
    allow_keys(j, f, {"kind", "halfSide", "center"});
    s.kind = InitialSpec::Kind::kSquare;
    s.half_side = positive(need(j, f, "halfSide"), f + ".halfSide");
  } else if (kind == "maskFile" || kind == "polygonFile") {
    allow_keys(j, f, {"kind", "path"});
    s.kind = kind == "maskFile" ? InitialSpec::Kind::kMaskFile : InitialSpec::Kind::kPolygonFile;
    if (!need(j, f, "path").is_string()) fail(f + ".path", "must be a string");
    s.path = resolve_path(j.at("path").get<std::string>(), base);
    if (!std::filesystem::exists(s.path)) fail(f + ".path", "file not found: " + s.path);
  } else {
    fail(f + ".kind", "must be wulff, square, disk, maskFile or polygonFile");
  }
  return s;
}

FlowConfig parse_flow(const json& j) {
  const std::string f = "flow";
  allow_keys(j, f,
             {"h", "tEnd", "R0", "tolSolver", "maxIter", "bandHalfWidth", "minComponentArea", "stopRadius",
              "epsSchedule", "solverBand", "diagnosticsEvery", "snapshotEvery", "checkInitialRw",
              "continueOnRwFailure"});
  FlowConfig c;
  // Optional here (approx has no time horizon); simulate requires it.
  if (j.contains("tEnd")) c.t_end = number(j.at("tEnd"), f + ".tEnd");
  c.R0 = positive(need(j, f, "R0"), f + ".R0");
  if (j.contains("h")) c.h = positive(j.at("h"), f + ".h");
  if (j.contains("tolSolver")) c.tol_solver = positive(j.at("tolSolver"), f + ".tolSolver");
  if (j.contains("maxIter")) c.max_iter = integer(j.at("maxIter"), f + ".maxIter");
  if (j.contains("bandHalfWidth")) c.band_half_width = positive(j.at("bandHalfWidth"), f + ".bandHalfWidth");
  if (j.contains("minComponentArea")) c.min_component_area = number(j.at("minComponentArea"), f + ".minComponentArea");
  if (j.contains("stopRadius")) c.stop_radius = positive(j.at("stopRadius"), f + ".stopRadius");
  if (j.contains("epsSchedule")) c.eps_schedule = numbers(j.at("epsSchedule"), f + ".epsSchedule");
  if (j.contains("solverBand")) {
    const json& b = j.at("solverBand");
    c.solver_band = b.is_string() && b.get<std::string>() == "full" ? std::numeric_limits<double>::infinity()
                                                                    : positive(b, f + ".solverBand");
  }
  if (j.contains("diagnosticsEvery")) c.diagnostics_every = integer(j.at("diagnosticsEvery"), f + ".diagnosticsEvery");
  if (j.contains("snapshotEvery")) c.snapshot_every = integer(j.at("snapshotEvery"), f + ".snapshotEvery");
  if (j.contains("checkInitialRw")) {
    if (!j.at("checkInitialRw").is_boolean()) fail(f + ".checkInitialRw", "must be a boolean");
    c.check_initial_rw = j.at("checkInitialRw").get<bool>();
  }
  if (j.contains("continueOnRwFailure")) {
    if (!j.at("continueOnRwFailure").is_boolean()) fail(f + ".continueOnRwFailure", "must be a boolean");
    c.continue_on_rw_failure = j.at("continueOnRwFailure").get<bool>();
  }
  if (c.t_end < 0.0) fail(f + ".tEnd", "must be nonnegative");
  if (c.max_iter < 1) fail(f + ".maxIter", "must be at least 1");
  if (c.diagnostics_every < 1) fail(f + ".diagnosticsEvery", "must be at least 1");
  if (c.snapshot_every < 0) fail(f + ".snapshotEvery", "must be nonnegative");
  return c;
}

OutputSpec parse_output(const json& j) {
  const std::string f = "output";
  allow_keys(j, f, {"directory", "cadence", "formats"});
  OutputSpec o;
  if (j.contains("directory")) {
    if (!j.at("directory").is_string()) fail(f + ".directory", "must be a string");
    o.directory = j.at("directory").get<std::string>();
  }
  if (j.contains("cadence")) {
    o.cadence = integer(j.at("cadence"), f + ".cadence");
    if (o.cadence < 0) fail(f + ".cadence", "must be nonnegative");
  }
  if (j.contains("formats")) {
    const json& fm = j.at("formats");
    if (!fm.is_array()) fail(f + ".formats", "must be an array");
    o.formats.clear();
    for (const auto& x : fm) {
      const std::string s = x.is_string() ? x.get<std::string>() : "";
      if (s != "csv" && s != "pgm" && s != "svg" && s != "grids") {
        fail(f + ".formats", "entries must be csv, pgm, svg or grids");
      }
      o.formats.insert(s);
    }
  }
  return o;
}

// Even-odd inside test and Euclidean distance to a closed polygon.
double polygon_level(const std::vector<Vec2>& p, Vec2 x) {
  bool inside = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0, m = p.size() - 1; k < p.size(); m = k++) {
    const Vec2 a = p[m], b = p[k];
    if ((b.y > x.y) != (a.y > x.y) && x.x < (a.x - b.x) * (x.y - b.y) / (a.y - b.y) + b.x) inside = !inside;
    const Vec2 e = b - a;
    const double l2 = dot(e, e);
    const double t = l2 > 0.0 ? std::clamp(dot(x - a, e) / l2, 0.0, 1.0) : 0.0;
    best = std::min(best, (x - (a + e * t)).norm());
  }
  return inside ? -best : best;
}

std::vector<Vec2> read_polygon(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("initial.path", "cannot open " + path);
  std::vector<Vec2> p;
  std::string line;
  while (std::getline(in, line)) {
    double x = 0.0, y = 0.0;
    if (std::sscanf(line.c_str(), " %lf , %lf", &x, &y) == 2) p.push_back({x, y});
  }
  if (p.size() < 3) fail("initial.path", "polygon file needs at least three x,y lines: " + path);
  return p;
}

}  // namespace

Anisotropy anisotropy_from_json(const json& j, const std::string& f) {
  if (!j.is_object()) fail(f, "must be an object");
  const std::string kind = need(j, f, "kind").is_string() ? j.at("kind").get<std::string>() : "";
  try {
    if (kind == "polygon") {
      allow_keys(j, f, {"kind", "vertices"});
      const json& v = need(j, f, "vertices");
      if (!v.is_array()) fail(f + ".vertices", "must be an array of [x, y]");
      std::vector<Vec2> pts;
      for (std::size_t k = 0; k < v.size(); ++k) pts.push_back(point(v[k], f + ".vertices[" + std::to_string(k) + "]"));
      return Anisotropy::Polygon(std::move(pts));
    }
    if (kind == "euclidean") {
      allow_keys(j, f, {"kind", "matrix"});
      if (!j.contains("matrix")) return Anisotropy::Euclidean();
      const json& m = j.at("matrix");
      if (!m.is_array() || m.size() != 2) fail(f + ".matrix", "must be [[a, b], [b, c]]");
      const Vec2 r0 = point(m[0], f + ".matrix[0]"), r1 = point(m[1], f + ".matrix[1]");
      if (r0.y != r1.x) fail(f + ".matrix", "must be symmetric");
      return Anisotropy::EuclideanScaled({r0.x, r0.y, r1.y});
    }
    if (kind == "regularized") {
      allow_keys(j, f, {"kind", "base", "epsilon"});
      const Anisotropy base = anisotropy_from_json(need(j, f, "base"), f + ".base");
      return regularize(base, positive(need(j, f, "epsilon"), f + ".epsilon")).result;
    }
    if (kind == "square") {
      allow_keys(j, f, {"kind", "halfSide"});
      return Anisotropy::Square(j.contains("halfSide") ? positive(j.at("halfSide"), f + ".halfSide") : 1.0);
    }
    if (kind == "regular") {
      allow_keys(j, f, {"kind", "n", "phase"});
      return Anisotropy::RegularPolygon(integer(need(j, f, "n"), f + ".n"),
                                        j.contains("phase") ? number(j.at("phase"), f + ".phase") : 0.0);
    }
    if (kind == "table") {
      allow_keys(j, f, {"kind", "h", "dh", "d2h"});
      return Anisotropy::SmoothTable(numbers(need(j, f, "h"), f + ".h"), numbers(need(j, f, "dh"), f + ".dh"),
                                     numbers(need(j, f, "d2h"), f + ".d2h"));
    }
  } catch (const InvalidAnisotropy& e) {
    fail(f, e.what());
  }
  fail(f + ".kind", "must be polygon, euclidean, regularized, square, regular or table");
}

json anisotropy_to_json(const Anisotropy& a) {
  switch (a.kind()) {
    case AnisotropyKind::kPolygon: {
      json v = json::array();
      for (const Vec2& p : a.vertices()) v.push_back({p.x, p.y});
      return {{"kind", "polygon"}, {"vertices", v}};
    }
    case AnisotropyKind::kEuclideanScaled: {
      const Sym2& m = a.matrix();
      return {{"kind", "euclidean"}, {"matrix", {{m.a, m.b}, {m.b, m.c}}}};
    }
    case AnisotropyKind::kSmoothTable:
      return {{"kind", "table"}, {"h", a.table_h()}, {"dh", a.table_dh()}, {"d2h", a.table_d2h()}};
  }
  return {};
}

RunConfig parse_run_config(const json& doc, const std::string& base_dir) {
  const json& j = doc.is_object() && doc.contains("configHash") && doc.contains("config") ? doc.at("config") : doc;
  allow_keys(j, "config", {"anisotropy", "initial", "forcing", "grid", "flow", "output", "epsilon"});
  RunConfig c;
  c.source = j;
  c.anisotropy = anisotropy_from_json(need(j, "config", "anisotropy"));
  c.grid = parse_grid(need(j, "config", "grid"));
  c.initial = parse_initial(need(j, "config", "initial"), base_dir);
  c.flow = parse_flow(need(j, "config", "flow"));
  if (j.contains("output")) c.output = parse_output(j.at("output"));
  if (j.contains("epsilon")) c.epsilon = positive(j.at("epsilon"), "epsilon");
  const FlowConfig resolved = c.flow.resolve(c.grid.dx);
  if (!(resolved.h > 0.0)) fail("flow.h", "must be positive");
  if (j.contains("forcing")) {
    try {
      c.forcing = forcing_from_json(j.at("forcing"), std::max(resolved.t_end, resolved.h), resolved.h / 4.0);
    } catch (const ForcingError& e) {
      fail("forcing", e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  const auto base = std::filesystem::path(path).parent_path();
  return parse_run_config(j, base.empty() ? "." : base.string());
}

std::optional<Grid2D> initial_level(const RunConfig& c) {
  const InitialSpec& s = c.initial;
  switch (s.kind) {
    case InitialSpec::Kind::kWulff:
      return sample(c.grid, [&](Vec2 x) { return c.anisotropy.gauge(x - s.center) - s.r; });
    case InitialSpec::Kind::kDisk:
      return sample(c.grid, [&](Vec2 x) { return (x - s.center).norm() - s.r; });
    case InitialSpec::Kind::kSquare:
      return sample(c.grid, [&](Vec2 x) {
        const Vec2 y = x - s.center;
        return std::max(std::abs(y.x), std::abs(y.y)) - s.half_side;
      });
    case InitialSpec::Kind::kPolygonFile: {
      const auto p = read_polygon(s.path);
      return sample(c.grid, [&](Vec2 x) { return polygon_level(p, x); });
    }
    case InitialSpec::Kind::kMaskFile:
      return std::nullopt;
  }
  return std::nullopt;
}

SetMask initial_mask(const RunConfig& c) {
  if (auto level = initial_level(c)) return below(*level, -1e-12);
  SetMask m;
  try {
    m = read_pgm(c.initial.path, c.grid.dx);
  } catch (const std::exception& e) {
    fail("initial.path", e.what());
  }
  if (m.geom.nx != c.grid.nx || m.geom.ny != c.grid.ny) {
    fail("initial.path", "mask is " + std::to_string(m.geom.nx) + "x" + std::to_string(m.geom.ny) + ", grid is " +
                             std::to_string(c.grid.nx) + "x" + std::to_string(c.grid.ny));
  }
  m.geom = c.grid;
  return m;
}

std::string config_hash(const json& j) {
  const std::string s = j.dump();  // nlohmann::json objects keep keys sorted
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wulff
