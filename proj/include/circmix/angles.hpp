#ifndef CIRCMIX_ANGLES_HPP
#define CIRCMIX_ANGLES_HPP

#include <cmath>
#include <numbers>

namespace circmix {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces `t` into [0, period). Non-finite input is returned unchanged.
inline double wrap(double t, double period) {
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  // fmod of a tiny negative number plus the period can round up to the period itself.
  if (r >= period) r = 0.0;
  return r;
}

inline double wrap_circular(double t) { return wrap(t, kTwoPi); }
inline double wrap_axial(double t) { return wrap(t, kPi); }

/// Reduces `t` into (-period/2, period/2].
inline double wrap_signed(double t, double period) {
  double r = wrap(t, period);
  if (r > 0.5 * period) r -= period;
  return r;
}

/// Shortest arc length between two angles of the given period.
inline double arc_distance(double a, double b, double period) {
  return std::abs(wrap_signed(a - b, period));
}

inline double degrees_to_radians(double deg) { return deg * (kPi / 180.0); }
inline double radians_to_degrees(double rad) { return rad * (180.0 / kPi); }

/// A direction on the full circle, stored in [0, 2π).
class CircularAngle {
 public:
  static constexpr double period = kTwoPi;
  constexpr CircularAngle() = default;
  explicit CircularAngle(double radians) : value_(wrap_circular(radians)) {}
  double value() const noexcept { return value_; }
  explicit operator double() const noexcept { return value_; }
  friend bool operator==(CircularAngle, CircularAngle) = default;

 private:
  double value_ = 0.0;
};

/// An undirected orientation, stored in [0, π).
class AxialAngle {
 public:
  static constexpr double period = kPi;
  constexpr AxialAngle() = default;
  explicit AxialAngle(double radians) : value_(wrap_axial(radians)) {}
  double value() const noexcept { return value_; }
  explicit operator double() const noexcept { return value_; }
  friend bool operator==(AxialAngle, AxialAngle) = default;

 private:
  double value_ = 0.0;
};

}  // namespace circmix

#endif  // CIRCMIX_ANGLES_HPP
