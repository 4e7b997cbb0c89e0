#pragma once

#include <cmath>
#include <numbers>

namespace weakgrid {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Power-invariant scaling between a phase peak amplitude and the dq magnitude.
inline const double kDqPerPeak = std::sqrt(1.5);

/// System bases. Voltages are line-to-line RMS; per-unit quantities elsewhere
/// use the power-invariant convention (a balanced set with 1 pu phase peak has
/// dq magnitude sqrt(3/2)).
struct PerUnitBase {
  double v_base_sg = 11e3;
  double v_base_vsc = 3.3e3;
  double s_base = 5e6;
  double f_nominal = 50.0;
  double omega_nominal = kTwoPi * 50.0;

  static PerUnitBase from_frequency(double f_nominal);

  /// Throws std::invalid_argument on non-positive bases or inconsistent omega.
  void validate() const;
};

/// Angle in radians, always held in [0, 2pi).
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : value_(wrap(radians)) {}

  [[nodiscard]] double value() const { return value_; }

  Angle operator+(double radians) const { return Angle(value_ + radians); }
  Angle operator-(double radians) const { return Angle(value_ - radians); }
  Angle& operator+=(double radians) {
    value_ = wrap(value_ + radians);
    return *this;
  }

  static double wrap(double radians);

  /// Signed difference a - b folded into [-pi, pi).
  static double difference(Angle a, Angle b);

 private:
  double value_ = 0.0;
};

struct ThreePhaseSample {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  [[nodiscard]] bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
  }
  [[nodiscard]] double max_abs() const {
    return std::fmax(std::fabs(a), std::fmax(std::fabs(b), std::fabs(c)));
  }

  friend ThreePhaseSample operator+(ThreePhaseSample x, ThreePhaseSample y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c};
  }
  friend ThreePhaseSample operator-(ThreePhaseSample x, ThreePhaseSample y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c};
  }
  friend ThreePhaseSample operator*(double k, ThreePhaseSample x) {
    return {k * x.a, k * x.b, k * x.c};
  }
  friend bool operator==(const ThreePhaseSample&, const ThreePhaseSample&) = default;
};

struct DqVector {
  double d = 0.0;
  double q = 0.0;

  [[nodiscard]] double norm() const { return std::hypot(d, q); }
  [[nodiscard]] double norm_squared() const { return d * d + q * q; }
  [[nodiscard]] bool finite() const { return std::isfinite(d) && std::isfinite(q); }

  friend DqVector operator+(DqVector x, DqVector y) { return {x.d + y.d, x.q + y.q}; }
  friend DqVector operator-(DqVector x, DqVector y) { return {x.d - y.d, x.q - y.q}; }
  friend DqVector operator*(double k, DqVector x) { return {k * x.d, k * x.q}; }
  friend bool operator==(const DqVector&, const DqVector&) = default;
};

struct PowerPair {
  double p = 0.0;
  double q = 0.0;
};

/// Power-invariant Park transform. A balanced cosine set of peak A aligned with
/// theta maps to (sqrt(3/2) A, 0); the q axis leads d. Zero sequence is dropped.
DqVector abc_to_dq(const ThreePhaseSample& x, Angle theta);

/// Inverse of abc_to_dq for zero-sequence-free signals.
ThreePhaseSample dq_to_abc(const DqVector& x, Angle theta);

/// Rotation between synchronous frames: returns T(delta) * x with
/// T = [[cos, -sin], [sin, cos]].
DqVector rotate_frame(const DqVector& x, double delta);
inline DqVector rotate_frame(const DqVector& x, Angle delta) {
  return rotate_frame(x, delta.value());
}

/// p = v^T i, q = v^T M i with M = [[0, 1], [-1, 0]], i.e. q = v_d i_q - v_q i_d.
/// Note this q is the negative of the usual v_q i_d - v_d i_q convention.
PowerPair instantaneous_power(const DqVector& v, const DqVector& i);

}  // namespace weakgrid
