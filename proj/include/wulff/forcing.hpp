#ifndef WULFF_FORCING_HPP_
#define WULFF_FORCING_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wulff/grid.hpp"

namespace wulff {

class ForcingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Spatially constant part G1(t).
struct TimePath {
  enum class Kind { kZero, kLinear, kBrownian, kSamples };
  Kind kind = Kind::kZero;
  double rate = 0.0;  // kLinear: G1(t) = rate * t
  std::uint64_t seed = 0;
  double sigma = 0.0;
  // kBrownian / kSamples: values at t = k * dt, interpolated linearly.
  double dt = 0.0;
  std::vector<double> values;

  static TimePath Zero() { return {}; }
  static TimePath Linear(double rate);
  static TimePath Samples(double dt, std::vector<double> values);

  double value(double t) const;
  // Last admissible time (infinite for zero and linear paths).
  double t_end() const;
  bool trivial() const;
};

// Independent N(0, sigma^2 dt) increments from a seeded mt19937_64, G(0) = 0.
TimePath brownian_path(std::uint64_t seed, double T, double dt, double sigma);

// C1 piecewise-cubic Hermite profile through (t_k, v_k) with slopes dv_k.
// Constant outside [t_0, t_n] is not assumed: evaluation there throws.
struct HermiteProfile {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> dv;

  static HermiteProfile Constant(double c);
  // Samples f and f' at n + 1 uniform knots on [t0, t1].
  template <class F, class DF>
  static HermiteProfile Sample(F f, DF df, double t0, double t1, int n) {
    HermiteProfile p;
    for (int k = 0; k <= n; ++k) {
      const double s = t0 + (t1 - t0) * k / n;
      p.t.push_back(s);
      p.v.push_back(f(s));
      p.dv.push_back(df(s));
    }
    p.validate();
    return p;
  }

  void validate() const;
  double value(double s) const;
  double derivative(double s) const;
  // Exact max of |derivative| on [a, b] (derivative is quadratic per piece).
  double max_abs_derivative(double a, double b) const;
  bool constant() const;
  double t_end() const;
};

// G2(t, x) = a(t) . x + b(t).
struct AffineField {
  HermiteProfile ax;
  HermiteProfile ay;
  HermiteProfile b;
};

struct Forcing {
  TimePath g1;
  std::optional<AffineField> g2;
  double horizon = 0.0;      // lipschitz_l is certified on [0, horizon]
  double lipschitz_l = 0.0;  // Lipschitz constant in x of (G(t+h) - G(t)) / h

  static Forcing None() { return {}; }
  static Forcing FromG1(TimePath p);
  static Forcing FromG2(AffineField f, double horizon);

  bool g1_trivial() const { return g1.trivial(); }
  bool g2_trivial() const;
  double t_end() const;

  double value(double t, Vec2 x) const;
  // G(s, x) - G(t, x); requires 0 <= t <= s <= t_end().
  double increment(double t, double s, Vec2 x) const;
  // sup over grid nodes of |increment(t, t + h, x)|.
  double delta_sup(double t, double h, const GridGeometry& g) const;
  // Increment on every grid node.
  Grid2D increment_grid(double t, double s, const GridGeometry& g) const;
};

// {"g1": {"type": "zero"} | {"type": "linear", "rate": c} |
//         {"type": "brownian", "seed": n, "sigma": s, "dt": dt} |
//         {"type": "samples", "dt": dt, "values": [...]},
//  "g2": {"type": "zero"} | {"type": "affine", "ax": P, "ay": P, "b": P}}
// with P = {"t": [...], "v": [...], "dv": [...]}. Brownian paths cover
// [0, horizon]; default_dt is used when "dt" is absent.
Forcing forcing_from_json(const nlohmann::json& j, double horizon, double default_dt);
nlohmann::json forcing_to_json(const Forcing& f);

}  // namespace wulff

#endif  // WULFF_FORCING_HPP_
