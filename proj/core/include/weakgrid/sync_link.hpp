#pragma once

#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>

#include "weakgrid/controller.hpp"
#include "weakgrid/units_frames.hpp"

namespace weakgrid {

enum class SyncMode { PccSync, StrongGridSync };

std::string_view to_string(SyncMode mode);
/// Accepts "pcc" or "sg"; throws std::invalid_argument otherwise.
SyncMode parse_sync_mode(std::string_view text);

ThreePhaseSample select_sync_voltage(SyncMode mode, const ThreePhaseSample& v_pcc,
                                     const ThreePhaseSample& v_sg);

struct TimestampedAngle {
  double stamp = 0.0;  // producer-side time, s
  Angle angle;
};

class ChannelUnderrun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-delay, lossless, ordered channel. A receiver at time t sees the newest
/// sample stamped at or before t - delay.
class DelayChannel {
 public:
  DelayChannel(double delay, double tick);

  /// Stamps must be strictly increasing.
  void push(const TimestampedAngle& sample);

  /// Returns the sample visible at t_receiver and drops everything older.
  /// Throws ChannelUnderrun if no such sample has been produced.
  TimestampedAngle pop(double t_receiver);

  [[nodiscard]] double delay() const { return delay_; }
  [[nodiscard]] std::size_t size() const { return buffer_.size(); }

 private:
  double delay_;
  double tolerance_;
  std::deque<TimestampedAngle> buffer_;
};

/// phi_tau + tau * omega_N, wrapped. Exact when the source runs at nominal
/// frequency. tau >= 1 / f_N is accepted: the timestamp resolves whole cycles.
Angle compensate_angle(Angle phi_tau, double tau, const PerUnitBase& base);

/// Strong-grid-point synchronization: a PLL co-located with the strong-grid
/// measurement whose angle reaches the converter through a DelayChannel.
class RemoteSync {
 public:
  /// The channel is pre-filled with the steady history phi(t) = phase0 +
  /// omega_N * t for stamps in [-delay, 0) so that the receiver never starves.
  RemoteSync(const ControlParams& control, const PerUnitBase& base, double delay,
             bool compensate, Angle initial_phase, int decimation = 1);

  /// Runs the remote PLL on v_sg at tick k (time k * t_sample) and returns the
  /// angle the converter uses at that tick.
  Angle tick(long long k, const ThreePhaseSample& v_sg);

  [[nodiscard]] const PllState& remote_pll() const { return pll_; }

 private:
  ControlParams control_;
  PerUnitBase base_;
  PllState pll_;
  DelayChannel channel_;
  bool compensate_;
  int decimation_;
};

}  // namespace weakgrid
