#include "weakgrid/units_frames.hpp"

#include <stdexcept>
#include <string>

namespace weakgrid {

namespace {

// Mutation hook for the validate subcommand (see CONTRIBUTING.md).
#ifdef WEAKGRID_MUTATE_TRANSFORM
const double kParkScale = 0.8;
#else
const double kParkScale = std::sqrt(2.0 / 3.0);
#endif

constexpr double kPhaseShift = kTwoPi / 3.0;

}  // namespace

PerUnitBase PerUnitBase::from_frequency(double f_nominal) {
  PerUnitBase base;
  base.f_nominal = f_nominal;
  base.omega_nominal = kTwoPi * f_nominal;
  return base;
}

void PerUnitBase::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be strictly positive");
    }
  };
  positive(v_base_sg, "v_base_sg");
  positive(v_base_vsc, "v_base_vsc");
  positive(s_base, "s_base");
  positive(f_nominal, "f_nominal");
  positive(omega_nominal, "omega_nominal");
  const double expected = kTwoPi * f_nominal;
  if (std::fabs(omega_nominal - expected) > 1e-9 * expected) {
    throw std::invalid_argument("omega_nominal must equal 2*pi*f_nominal");
  }
}

double Angle::wrap(double radians) {
  double r = std::fmod(radians, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  // fmod of a tiny negative value can round up to exactly 2pi.
  if (r >= kTwoPi) {
    r = 0.0;
  }
  return r;
}

double Angle::difference(Angle a, Angle b) {
  double d = a.value() - b.value();
  if (d >= std::numbers::pi) {
    d -= kTwoPi;
  } else if (d < -std::numbers::pi) {
    d += kTwoPi;
  }
  return d;
}

DqVector abc_to_dq(const ThreePhaseSample& x, Angle theta) {
  const double th = theta.value();
  const double ca = std::cos(th);
  const double cb = std::cos(th - kPhaseShift);
  const double cc = std::cos(th + kPhaseShift);
  const double sa = std::sin(th);
  const double sb = std::sin(th - kPhaseShift);
  const double sc = std::sin(th + kPhaseShift);
  return {kParkScale * (x.a * ca + x.b * cb + x.c * cc),
          -kParkScale * (x.a * sa + x.b * sb + x.c * sc)};
}

ThreePhaseSample dq_to_abc(const DqVector& x, Angle theta) {
  const double th = theta.value();
  auto phase = [&](double offset) {
    return kParkScale * (x.d * std::cos(th + offset) - x.q * std::sin(th + offset));
  };
  return {phase(0.0), phase(-kPhaseShift), phase(kPhaseShift)};
}

DqVector rotate_frame(const DqVector& x, double delta) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {c * x.d - s * x.q, s * x.d + c * x.q};
}

PowerPair instantaneous_power(const DqVector& v, const DqVector& i) {
  return {v.d * i.d + v.q * i.q, v.d * i.q - v.q * i.d};
}

}  // namespace weakgrid
