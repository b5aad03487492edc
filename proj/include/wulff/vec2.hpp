#ifndef WULFF_VEC2_HPP_
#define WULFF_VEC2_HPP_

#include <cmath>

namespace wulff {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::sqrt(x * x + y * y); }
  constexpr double norm2() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline Vec2 unit_from_angle(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

// Symmetric 2x2 matrix [[a, b], [b, c]].
struct Sym2 {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;

  constexpr Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, b * v.x + c * v.y}; }
  constexpr double quad(Vec2 v) const { return a * v.x * v.x + 2.0 * b * v.x * v.y + c * v.y * v.y; }
  constexpr double det() const { return a * c - b * b; }
  constexpr Sym2 inverse() const {
    const double d = det();
    return {c / d, -b / d, a / d};
  }
};

}  // namespace wulff

#endif  // WULFF_VEC2_HPP_
