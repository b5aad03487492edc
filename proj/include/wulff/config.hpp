#ifndef WULFF_CONFIG_HPP_
#define WULFF_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "wulff/anisotropy.hpp"
#include "wulff/flow.hpp"
#include "wulff/forcing.hpp"
#include "wulff/grid.hpp"

namespace wulff {

// Message names the offending field, e.g. "flow.h: must be positive".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"kind": "polygon", "vertices": [[x, y], ...]}
// {"kind": "euclidean", "matrix": [[a, b], [b, c]]}   (matrix optional)
// {"kind": "regularized", "base": {...}, "epsilon": e}
// {"kind": "square", "halfSide": s} / {"kind": "regular", "n": n, "phase": p}
// {"kind": "table", "h": [...], "dh": [...], "d2h": [...]}
Anisotropy anisotropy_from_json(const nlohmann::json& j, const std::string& field = "anisotropy");
// Polygon, euclidean or table literal (regularized gauges are tables).
nlohmann::json anisotropy_to_json(const Anisotropy& a);

struct InitialSpec {
  enum class Kind { kWulff, kSquare, kDisk, kMaskFile, kPolygonFile };
  Kind kind = Kind::kWulff;
  double r = 0.0;         // wulff, disk
  double half_side = 0.0;  // square
  Vec2 center{};
  std::string path;  // maskFile (PGM), polygonFile (CSV x,y per line)
};

struct OutputSpec {
  std::string directory = "out";
  int cadence = 0;  // snapshot every this many steps; 0 = first and last only
  std::set<std::string> formats{"csv"};  // subset of csv, pgm, svg, grids
};

struct RunConfig {
  nlohmann::json source;  // the document as given
  Anisotropy anisotropy = Anisotropy::Euclidean();
  InitialSpec initial;
  Forcing forcing;
  GridGeometry grid;
  FlowConfig flow;  // unresolved; resolve(grid.dx) for defaults
  OutputSpec output;
  double epsilon = 0.0;  // approx: regularization of the crystalline gauge
};

// Parses a run configuration. Relative file paths resolve against base_dir.
// A manifest written by simulate is accepted too (its "config" is used).
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Level function of the initial set when it is analytic (wulff, square,
// disk, polygon); nullopt for mask files.
std::optional<Grid2D> initial_level(const RunConfig& c);
SetMask initial_mask(const RunConfig& c);

// 64-bit FNV-1a of the compact JSON dump (keys sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

inline constexpr const char* kVersion = "1.0.0";

}  // namespace wulff

#endif  // WULFF_CONFIG_HPP_
