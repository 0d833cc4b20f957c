#pragma once

#include <cmath>
#include <numbers>

namespace beamshift {

/// Plane angle, held in degrees. Degrees at API boundaries, radians only inside trig calls.
class Angle {
 public:
  constexpr Angle() = default;

  static constexpr Angle degrees(double deg) { return Angle(deg); }
  static constexpr Angle radians(double rad) { return Angle(rad * (180.0 / std::numbers::pi)); }
  static constexpr Angle arcminutes(double arcmin) { return Angle(arcmin / 60.0); }

  constexpr double deg() const { return deg_; }
  constexpr double rad() const { return deg_ * (std::numbers::pi / 180.0); }

  friend constexpr Angle operator-(Angle a) { return Angle(-a.deg_); }
  friend constexpr Angle operator+(Angle a, Angle b) { return Angle(a.deg_ + b.deg_); }
  friend constexpr Angle operator-(Angle a, Angle b) { return Angle(a.deg_ - b.deg_); }
  friend constexpr Angle operator*(double k, Angle a) { return Angle(k * a.deg_); }
  friend constexpr bool operator==(Angle, Angle) = default;

 private:
  constexpr explicit Angle(double deg) : deg_(deg) {}
  double deg_ = 0.0;
};

namespace detail {
// Reduces to [0, 360) and reports the quadrant when the angle sits exactly on an axis.
inline int axis_quadrant(double deg, double& reduced) {
  reduced = std::fmod(deg, 360.0);
  if (reduced < 0.0) reduced += 360.0;
  if (reduced >= 360.0) reduced = 0.0;
  const double q = reduced / 90.0;
  return q == std::floor(q) ? static_cast<int>(q) : -1;
}
}  // namespace detail

/// sin of an angle; exact (0, ±1) on multiples of 90 degrees.
inline double sin_of(Angle a) {
  double r = 0.0;
  switch (detail::axis_quadrant(a.deg(), r)) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 0.0;
    case 3: return -1.0;
    default: return std::sin(r * (std::numbers::pi / 180.0));
  }
}

/// cos of an angle; exact (0, ±1) on multiples of 90 degrees.
inline double cos_of(Angle a) {
  double r = 0.0;
  switch (detail::axis_quadrant(a.deg(), r)) {
    case 0: return 1.0;
    case 1: return 0.0;
    case 2: return -1.0;
    case 3: return 0.0;
    default: return std::cos(r * (std::numbers::pi / 180.0));
  }
}

}  // namespace beamshift
