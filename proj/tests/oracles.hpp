#pragma once

// Independent reference formulas used to check the library. Written from the
// textbook definitions, not from the library code.

#include <cmath>
#include <complex>
#include <random>

#include "weakgrid/scenario.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

struct Dq {
  double d;
  double q;
};

// Power-invariant Clarke then rotation into a frame at theta.
inline Dq park(double a, double b, double c, double theta) {
  const double k = std::sqrt(2.0 / 3.0);
  const double alpha = k * (a - 0.5 * b - 0.5 * c);
  const double beta = k * (std::sqrt(3.0) / 2.0) * (b - c);
  return {alpha * std::cos(theta) + beta * std::sin(theta),
          -alpha * std::sin(theta) + beta * std::cos(theta)};
}

// 2x2 rotation matrix product.
inline Dq rotate(Dq x, double delta) {
  const double m[2][2] = {{std::cos(delta), -std::sin(delta)}, {std::sin(delta), std::cos(delta)}};
  return {m[0][0] * x.d + m[0][1] * x.q, m[1][0] * x.d + m[1][1] * x.q};
}

// Phase-domain instantaneous power; q carries the library's sign (v_d i_q - v_q i_d).
inline double p_abc(const double v[3], const double i[3]) {
  return v[0] * i[0] + v[1] * i[1] + v[2] * i[2];
}
inline double q_abc(const double v[3], const double i[3]) {
  return -((v[1] - v[2]) * i[0] + (v[2] - v[0]) * i[1] + (v[0] - v[1]) * i[2]) / std::sqrt(3.0);
}

// Power-reference law in complex form: i = S / conj(v) with S = P + jQ, under q = Im(conj(v) i).
inline std::complex<double> current_for(std::complex<double> v, double p, double q) {
  return v * std::complex<double>(p, q) / std::norm(v);
}

// Time for 1 - exp(-t/tc) style decay to enter a relative band.
inline double exp_settle(double tc, double band) { return tc * std::log(1.0 / band); }

inline double max_abs_diff(const weakgrid::Trace& a, const weakgrid::Trace& b,
                           double (*get)(const weakgrid::TraceRow&)) {
  double worst = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) {
    worst = std::fmax(worst, std::fabs(get(a[k]) - get(b[k])));
  }
  return worst;
}

}  // namespace oracle
