#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "wulff/anisotropy.hpp"

using namespace wulff;

namespace {

constexpr double kPi = std::numbers::pi;

// Ray/polygon intersection: smallest t > 0 with t*x on an edge; gauge = 1/t.
double ray_gauge_oracle(const std::vector<Vec2>& v, Vec2 x) {
  double best = 0.0;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 a = v[k];
    const Vec2 b = v[(k + 1) % n];
    // Solve t x = a + s (b - a).
    const Vec2 e = b - a;
    const double det = x.x * (-e.y) - x.y * (-e.x);
    if (std::abs(det) < 1e-15) continue;
    const double t = (a.x * (-e.y) - a.y * (-e.x)) / det;
    const double s = (x.x * a.y - x.y * a.x) / det;
    if (t > 0 && s >= -1e-12 && s <= 1 + 1e-12) best = std::max(best, 1.0 / t);
  }
  return best;
}

// Closest point on a densely sampled boundary.
Vec2 dense_projection_oracle(const std::vector<Vec2>& v, Vec2 p, int per_edge) {
  Vec2 best = v[0];
  double bd = 1e300;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2 a = v[k];
    const Vec2 b = v[(k + 1) % v.size()];
    for (int i = 0; i <= per_edge; ++i) {
      const Vec2 q = a + (b - a) * (static_cast<double>(i) / per_edge);
      const double d = (p - q).norm2();
      if (d < bd) {
        bd = d;
        best = q;
      }
    }
  }
  return best;
}

std::vector<Anisotropy> sample_anisotropies() {
  std::vector<Anisotropy> out;
  out.push_back(Anisotropy::Square());
  out.push_back(Anisotropy::RegularPolygon(6));
  out.push_back(Anisotropy::RegularPolygon(8, 0.3));
  out.push_back(Anisotropy::Polygon({{2, -0.5}, {1, 1}, {-0.5, 0.8}, {-2, 0.5}, {-1, -1}, {0.5, -0.8}}));
  out.push_back(Anisotropy::Euclidean());
  out.push_back(Anisotropy::EuclideanScaled({2.0, 0.5, 0.7}));
  out.push_back(regularize(Anisotropy::Square(), 0.1).result);
  out.push_back(Anisotropy::RegularPolygon(200, 0.01));
  return out;
}

}  // namespace

TEST_CASE("gauge examples") {
  const auto sq = Anisotropy::Square();
  CHECK(sq.gauge({0.5, -0.8}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(sq.gauge({0, 0}) == 0.0);
  const auto hex = Anisotropy::RegularPolygon(6);
  CHECK(hex.gauge({1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
  const double oracle = ray_gauge_oracle(hex.vertices(), {0, 1});
  CHECK(oracle == doctest::Approx(1.1547005383792515).epsilon(1e-12));
  CHECK(hex.gauge({0, 1}) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(Anisotropy::Euclidean().gauge({0, 0}) == 0.0);
}

TEST_CASE("polar examples") {
  const auto sq = Anisotropy::Square();
  CHECK(sq.polar({1, 1}) == doctest::Approx(2.0));
  CHECK(sq.polar({0, 0}) == 0.0);

  const auto reg = regularize(sq, 0.1).result;
  // Dense sampling of the interpolated boundary x = h e + h' e_perp.
  double oracle = -1e300;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double th = 2 * kPi * i / m;
    const auto s = reg.support_derivatives(th);
    const Vec2 e = unit_from_angle(th);
    const Vec2 x = e * s.h + perp(e) * s.dh;
    oracle = std::max(oracle, x.x);
  }
  CHECK(reg.polar({1, 0}) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(reg.polar({1, 0}) <= 1.0 + 1e-12);
}

TEST_CASE("cahn_hoffmann examples") {
  const auto sq = Anisotropy::Square();
  auto f = sq.cahn_hoffmann({1, 0});
  CHECK_FALSE(f.is_point());
  CHECK(f.first == Vec2{1, -1});
  CHECK(f.second == Vec2{1, 1});
  f = sq.cahn_hoffmann({1, 1});
  CHECK(f.is_point());
  CHECK(f.first == Vec2{1, 1});
  f = Anisotropy::Euclidean().cahn_hoffmann({3, 4});
  CHECK(f.first.x == doctest::Approx(0.6));
  CHECK(f.first.y == doctest::Approx(0.8));
  CHECK_THROWS_AS(sq.cahn_hoffmann({0, 0}), std::invalid_argument);
}

TEST_CASE("projection examples") {
  const auto sq = Anisotropy::Square();
  CHECK(sq.project({2, 0}) == Vec2{1, 0});
  CHECK(sq.project({0, 0}) == Vec2{0, 0});
  CHECK(Anisotropy::Euclidean().project({0, 0}) == Vec2{0, 0});
  const auto hex = Anisotropy::RegularPolygon(6);
  const Vec2 q = hex.project({2, 2});
  const Vec2 o = dense_projection_oracle(hex.vertices(), {2, 2}, 200000);
  CHECK((q - o).norm() < 1e-5);
  CHECK(q.x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(q.y == doctest::Approx(0.8660254037844386).epsilon(1e-9));
}

TEST_CASE("invalid anisotropies are rejected") {
  CHECK_THROWS_AS(Anisotropy::Polygon({{1, 0}, {0, 1}, {-1, 0}}), InvalidAnisotropy);
  CHECK_THROWS_AS(Anisotropy::Polygon({{1, 0}, {0, 1}, {-1, 0.1}, {0, -1}}), InvalidAnisotropy);
  // Clockwise.
  CHECK_THROWS_AS(Anisotropy::Polygon({{1, 1}, {1, -1}, {-1, -1}, {-1, 1}}), InvalidAnisotropy);
  // Collinear triple.
  CHECK_THROWS_AS(Anisotropy::Polygon({{1, -1}, {1, 0}, {1, 1}, {-1, 1}, {-1, 0}, {-1, -1}}), InvalidAnisotropy);
  CHECK_THROWS_AS(Anisotropy::EuclideanScaled({1, 2, 1}), InvalidAnisotropy);
  CHECK_THROWS_AS(regularize(Anisotropy::Square(), 0.5), InvalidAnisotropy);
  CHECK_THROWS_AS(regularize(Anisotropy::Square(), -0.1), InvalidAnisotropy);
  CHECK_THROWS_AS(regularize(Anisotropy::Square(), 0.01, 512), InvalidAnisotropy);
}

TEST_CASE("large polygon lookups match brute force") {
  const auto big = Anisotropy::RegularPolygon(4096, 0.123);
  const auto& v = big.vertices();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 x{u(rng), u(rng)};
    double g = 0, s = -1e300;
    for (std::size_t k = 0; k < v.size(); ++k) {
      const Vec2 e = v[(k + 1) % v.size()] - v[k];
      const Vec2 n = Vec2{e.y, -e.x} / e.norm();
      g = std::max(g, dot(n, x) / dot(n, v[k]));
      s = std::max(s, dot(x, v[k]));
    }
    CHECK(big.gauge(x) == doctest::Approx(g).epsilon(1e-12));
    CHECK(big.polar(x) == doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("anisotropy properties on random samples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  std::uniform_real_distribution<double> lam(0.01, 10);
  for (const auto& a : sample_anisotropies()) {
    INFO(to_string(a.kind()));
    for (int i = 0; i < 1000; ++i) {
      const Vec2 x{u(rng), u(rng)};
      const Vec2 y{u(rng), u(rng)};
      const double l = lam(rng);
      CHECK(std::abs(a.gauge(x * l) - l * a.gauge(x)) <= 1e-10 * (1 + l));
      CHECK(a.gauge(x + y) <= a.gauge(x) + a.gauge(y) + 1e-10);
      const double nx = x.norm();
      CHECK(a.gauge(x) >= a.c0() * nx - 1e-12);
      CHECK(a.gauge(x) <= nx / a.c0() + 1e-12);
      const auto f = a.cahn_hoffmann(x);
      for (const Vec2 p : {f.first, f.second}) {
        CHECK(std::abs(dot(p, x) - a.polar(x)) <= 1e-10 * (1 + nx));
        CHECK(std::abs(a.gauge(p) - 1.0) <= 1e-10);
      }
      const Vec2 p = a.project(x);
      const Vec2 q = a.project(y);
      CHECK(a.gauge(p) <= 1.0 + 1e-12);
      CHECK((p - q).norm() <= (x - y).norm() + 1e-10);
      CHECK(a.project(p) == p);
    }
  }
}

TEST_CASE("bipolar identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const auto& a : sample_anisotropies()) {
    // Dense sample of the boundary of {polar <= 1}.
    std::vector<Vec2> dual;
    for (int k = 0; k < 20000; ++k) {
      const Vec2 e = unit_from_angle(2 * kPi * k / 20000);
      dual.push_back(e / a.polar(e));
    }
    for (int i = 0; i < 100; ++i) {
      const Vec2 x{u(rng), u(rng)};
      double s = 0;
      for (const Vec2& n : dual) s = std::max(s, dot(n, x));
      CHECK(a.gauge(x) == doctest::Approx(s).epsilon(1e-3));
    }
  }
}

TEST_CASE("regularization of the disk stays within 2 eps") {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = regularize(Anisotropy::Euclidean(), eps);
    double worst = 0;
    for (int k = 0; k < 4096; ++k) {
      const Vec2 e = unit_from_angle(2 * kPi * k / 4096 + 0.1);
      worst = std::max(worst, std::abs(r.result.gauge(e) - 1.0));
    }
    CHECK(worst <= 2 * eps);
  }
  const auto r = regularize(Anisotropy::EuclideanScaled({2.0, 0.5, 0.7}), 0.1);
  CHECK(r.hausdorff < 0.2);
}

TEST_CASE("regularization of the square") {
  const auto sq = Anisotropy::Square();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  double prev = 1e300;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto r = regularize(sq, eps);
    INFO("eps = " << eps);
    double sweep = 0;
    for (int k = 0; k < 8192; ++k) {
      const Vec2 e = unit_from_angle(2 * kPi * k / 8192);
      sweep = std::max(sweep, std::abs(r.result.gauge(e) - sq.gauge(e)));
    }
    MESSAGE("eps=" << eps << " sup|gauge_eps - gauge|/eps = " << sweep / eps << " d_H=" << r.hausdorff);
    CHECK(sweep <= 2.0 * eps);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 e = unit_from_angle(ang(rng));
      CHECK(r.result.gauge(e) >= sq.gauge(e) - 1e-10);
    }
    for (const Vec2& v : r.result.vertices()) CHECK(sq.gauge(v) <= 1.0 + 1e-12);
    for (std::size_t k = 0; k < r.result.table_size(); ++k) CHECK(r.result.sample_curvature(k) > 0.0);
    CHECK(r.hausdorff < prev);
    prev = r.hausdorff;
  }
}
