#include "wulff/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace wulff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Times a hair beyond the end (accumulated n * h) are treated as the end.
double clamp_end(double t, double end, const char* what) {
  if (!(t >= 0.0)) throw ForcingError(std::string(what) + ": negative or non-finite time");
  if (t > end) {
    if (t <= end + 1e-12 * std::max(1.0, end)) return end;
    throw ForcingError(std::string(what) + ": time " + std::to_string(t) + " beyond the end " + std::to_string(end));
  }
  return t;
}

double sampled(const std::vector<double>& values, double dt, double t) {
  const double end = dt * static_cast<double>(values.size() - 1);
  t = clamp_end(t, end, "time path");
  const double q = t / dt;
  const double r = std::round(q);
  // Step boundaries that are multiples of dt read the sample itself.
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) {
    return values[std::min(static_cast<std::size_t>(r), values.size() - 1)];
  }
  const auto k = std::min(static_cast<std::size_t>(std::floor(q)), values.size() - 2);
  const double f = q - static_cast<double>(k);
  return values[k] + (values[k + 1] - values[k]) * f;
}

}  // namespace

TimePath TimePath::Linear(double rate) {
  if (!std::isfinite(rate)) throw ForcingError("linear path: rate must be finite");
  TimePath p;
  p.kind = Kind::kLinear;
  p.rate = rate;
  return p;
}

TimePath TimePath::Samples(double dt, std::vector<double> values) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ForcingError("sampled path: dt must be positive");
  if (values.size() < 2) throw ForcingError("sampled path: need at least two samples");
  for (double v : values) {
    if (!std::isfinite(v)) throw ForcingError("sampled path: non-finite sample");
  }
  TimePath p;
  p.kind = Kind::kSamples;
  p.dt = dt;
  p.values = std::move(values);
  return p;
}

double TimePath::value(double t) const {
  switch (kind) {
    case Kind::kZero:
      clamp_end(t, kInf, "time path");
      return 0.0;
    case Kind::kLinear:
      clamp_end(t, kInf, "time path");
      return rate * t;
    case Kind::kBrownian:
    case Kind::kSamples:
      return sampled(values, dt, t);
  }
  return 0.0;
}

double TimePath::t_end() const {
  if (kind == Kind::kZero || kind == Kind::kLinear) return kInf;
  return dt * static_cast<double>(values.size() - 1);
}

bool TimePath::trivial() const {
  switch (kind) {
    case Kind::kZero:
      return true;
    case Kind::kLinear:
      return rate == 0.0;
    default:
      return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  }
}

TimePath brownian_path(std::uint64_t seed, double T, double dt, double sigma) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ForcingError("brownian path: dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ForcingError("brownian path: horizon must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ForcingError("brownian path: sigma must be nonnegative");
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  TimePath p;
  p.kind = TimePath::Kind::kBrownian;
  p.seed = seed;
  p.sigma = sigma;
  p.dt = dt;
  p.values.assign(std::max<std::size_t>(n, 1) + 1, 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double step = sigma * std::sqrt(dt);
  for (std::size_t k = 1; k < p.values.size(); ++k) p.values[k] = p.values[k - 1] + step * normal(rng);
  return p;
}

HermiteProfile HermiteProfile::Constant(double c) {
  HermiteProfile p;
  p.t = {0.0, kInf};
  p.v = {c, c};
  p.dv = {0.0, 0.0};
  return p;
}

void HermiteProfile::validate() const {
  if (t.size() < 2 || v.size() != t.size() || dv.size() != t.size()) {
    throw ForcingError("profile: need at least two knots with matching t, v, dv");
  }
  if (t.front() != 0.0) throw ForcingError("profile: first knot must be t = 0");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(v[k]) || !std::isfinite(dv[k])) throw ForcingError("profile: non-finite value");
    if (k > 0 && !(t[k] > t[k - 1])) throw ForcingError("profile: knots must increase");
  }
}

bool HermiteProfile::constant() const {
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (v[k] != v.front() || dv[k] != 0.0) return false;
  }
  return true;
}

double HermiteProfile::t_end() const { return t.back(); }

namespace {

std::size_t piece(const HermiteProfile& p, double s) {
  const auto it = std::upper_bound(p.t.begin(), p.t.end(), s);
  const auto k = static_cast<std::size_t>(it - p.t.begin());
  return std::min(k == 0 ? 0 : k - 1, p.t.size() - 2);
}

}  // namespace

double HermiteProfile::value(double s) const {
  s = clamp_end(s, t.back(), "profile");
  if (constant()) return v.front();
  const std::size_t k = piece(*this, s);
  const double h = t[k + 1] - t[k];
  const double u = (s - t[k]) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * v[k] + (u3 - 2 * u2 + u) * h * dv[k] + (-2 * u3 + 3 * u2) * v[k + 1] +
         (u3 - u2) * h * dv[k + 1];
}

double HermiteProfile::derivative(double s) const {
  s = clamp_end(s, t.back(), "profile");
  if (constant()) return 0.0;
  const std::size_t k = piece(*this, s);
  const double h = t[k + 1] - t[k];
  const double u = (s - t[k]) / h;
  return ((6 * u * u - 6 * u) * v[k] + (3 * u * u - 4 * u + 1) * h * dv[k] + (-6 * u * u + 6 * u) * v[k + 1] +
          (3 * u * u - 2 * u) * h * dv[k + 1]) /
         h;
}

double HermiteProfile::max_abs_derivative(double a, double b) const {
  if (constant()) return 0.0;
  b = std::min(b, t.back());
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double lo = std::max(a, t[k]);
    const double hi = std::min(b, t[k + 1]);
    if (lo > hi) continue;
    const double h = t[k + 1] - t[k];
    // derivative = A u^2 + B u + C in u = (s - t_k) / h
    const double A = (6 * v[k] + 3 * h * dv[k] - 6 * v[k + 1] + 3 * h * dv[k + 1]) / h;
    const double B = (-6 * v[k] - 4 * h * dv[k] + 6 * v[k + 1] - 2 * h * dv[k + 1]) / h;
    const double C = dv[k];
    auto q = [&](double u) { return std::abs((A * u + B) * u + C); };
    const double ua = (lo - t[k]) / h;
    const double ub = (hi - t[k]) / h;
    best = std::max({best, q(ua), q(ub)});
    if (A != 0.0) {
      const double us = -B / (2 * A);
      if (us > ua && us < ub) best = std::max(best, q(us));
    }
  }
  return best;
}

Forcing Forcing::FromG1(TimePath p) {
  Forcing f;
  f.g1 = std::move(p);
  return f;
}

Forcing Forcing::FromG2(AffineField field, double horizon) {
  field.ax.validate();
  field.ay.validate();
  field.b.validate();
  if (!(horizon >= 0.0)) throw ForcingError("affine forcing: negative horizon");
  Forcing f;
  f.g2 = std::move(field);
  f.horizon = std::min({horizon, f.g2->ax.t_end(), f.g2->ay.t_end(), f.g2->b.t_end()});
  const double lx = f.g2->ax.max_abs_derivative(0.0, f.horizon);
  const double ly = f.g2->ay.max_abs_derivative(0.0, f.horizon);
  // |a(t+h) - a(t)| / h <= sup |a'|, bounded componentwise.
  f.lipschitz_l = std::sqrt(lx * lx + ly * ly);
  return f;
}

bool Forcing::g2_trivial() const {
  return !g2 || (g2->ax.constant() && g2->ay.constant() && g2->b.constant());
}

double Forcing::t_end() const {
  double e = g1.t_end();
  if (g2) e = std::min({e, g2->ax.t_end(), g2->ay.t_end(), g2->b.t_end()});
  return e;
}

double Forcing::value(double t, Vec2 x) const {
  double s = g1.value(t);
  if (g2) s += g2->ax.value(t) * x.x + g2->ay.value(t) * x.y + g2->b.value(t);
  return s;
}

double Forcing::increment(double t, double s, Vec2 x) const {
  if (!(t <= s)) throw ForcingError("increment: need t <= s");
  double d = g1.value(s) - g1.value(t);
  if (g2) {
    d += (g2->ax.value(s) - g2->ax.value(t)) * x.x + (g2->ay.value(s) - g2->ay.value(t)) * x.y +
         (g2->b.value(s) - g2->b.value(t));
  }
  return d;
}

double Forcing::delta_sup(double t, double h, const GridGeometry& g) const {
  // The increment is affine in x, so its extreme values sit at grid corners.
  double best = 0.0;
  for (int j : {0, g.ny - 1}) {
    for (int i : {0, g.nx - 1}) best = std::max(best, std::abs(increment(t, t + h, g.point(i, j))));
  }
  return best;
}

Grid2D Forcing::increment_grid(double t, double s, const GridGeometry& g) const {
  Grid2D out(g, g1.value(s) - g1.value(t));
  if (!g2) return out;
  const double da_x = g2->ax.value(s) - g2->ax.value(t);
  const double da_y = g2->ay.value(s) - g2->ay.value(t);
  const double db = g2->b.value(s) - g2->b.value(t);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const Vec2 x = g.point(i, j);
      out(i, j) += da_x * x.x + da_y * x.y + db;
    }
  }
  return out;
}

namespace {

template <class T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ForcingError(where + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ForcingError(where + "." + key + ": wrong type");
  }
}

HermiteProfile profile_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return HermiteProfile::Constant(j.get<double>());
  if (!j.is_object()) throw ForcingError(where + ": expected a number or {t, v, dv}");
  HermiteProfile p;
  p.t = field<std::vector<double>>(j, "t", where);
  p.v = field<std::vector<double>>(j, "v", where);
  p.dv = field<std::vector<double>>(j, "dv", where);
  try {
    p.validate();
  } catch (const ForcingError& e) {
    throw ForcingError(where + ": " + e.what());
  }
  return p;
}

nlohmann::json profile_to_json(const HermiteProfile& p) {
  if (p.constant()) return p.v.front();
  return {{"t", p.t}, {"v", p.v}, {"dv", p.dv}};
}

}  // namespace

Forcing forcing_from_json(const nlohmann::json& j, double horizon, double default_dt) {
  if (j.is_null()) return Forcing::None();
  if (!j.is_object()) throw ForcingError("forcing: expected an object");
  TimePath g1;
  if (j.contains("g1")) {
    const auto& p = j.at("g1");
    const auto type = field<std::string>(p, "type", "forcing.g1");
    if (type == "zero") {
      g1 = TimePath::Zero();
    } else if (type == "linear") {
      g1 = TimePath::Linear(field<double>(p, "rate", "forcing.g1"));
    } else if (type == "brownian") {
      const double dt = p.contains("dt") ? field<double>(p, "dt", "forcing.g1") : default_dt;
      g1 = brownian_path(field<std::uint64_t>(p, "seed", "forcing.g1"), horizon, dt,
                         field<double>(p, "sigma", "forcing.g1"));
    } else if (type == "samples") {
      g1 = TimePath::Samples(field<double>(p, "dt", "forcing.g1"), field<std::vector<double>>(p, "values", "forcing.g1"));
    } else {
      throw ForcingError("forcing.g1.type: unknown type '" + type + "'");
    }
  }
  Forcing f = Forcing::FromG1(g1);
  if (j.contains("g2")) {
    const auto& p = j.at("g2");
    const auto type = field<std::string>(p, "type", "forcing.g2");
    if (type == "affine") {
      AffineField a;
      a.ax = p.contains("ax") ? profile_from_json(p.at("ax"), "forcing.g2.ax") : HermiteProfile::Constant(0.0);
      a.ay = p.contains("ay") ? profile_from_json(p.at("ay"), "forcing.g2.ay") : HermiteProfile::Constant(0.0);
      a.b = p.contains("b") ? profile_from_json(p.at("b"), "forcing.g2.b") : HermiteProfile::Constant(0.0);
      Forcing g = Forcing::FromG2(std::move(a), horizon);
      g.g1 = f.g1;
      f = std::move(g);
    } else if (type != "zero") {
      throw ForcingError("forcing.g2.type: unknown type '" + type + "'");
    }
  }
  return f;
}

nlohmann::json forcing_to_json(const Forcing& f) {
  nlohmann::json j;
  switch (f.g1.kind) {
    case TimePath::Kind::kZero:
      j["g1"] = {{"type", "zero"}};
      break;
    case TimePath::Kind::kLinear:
      j["g1"] = {{"type", "linear"}, {"rate", f.g1.rate}};
      break;
    case TimePath::Kind::kBrownian:
      j["g1"] = {{"type", "brownian"}, {"seed", f.g1.seed}, {"sigma", f.g1.sigma}, {"dt", f.g1.dt}};
      break;
    case TimePath::Kind::kSamples:
      j["g1"] = {{"type", "samples"}, {"dt", f.g1.dt}, {"values", f.g1.values}};
      break;
  }
  if (f.g2) {
    j["g2"] = {{"type", "affine"},
               {"ax", profile_to_json(f.g2->ax)},
               {"ay", profile_to_json(f.g2->ay)},
               {"b", profile_to_json(f.g2->b)}};
  } else {
    j["g2"] = {{"type", "zero"}};
  }
  return j;
}

}  // namespace wulff
