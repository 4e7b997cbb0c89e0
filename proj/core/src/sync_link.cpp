#include "weakgrid/sync_link.hpp"

#include <cmath>

namespace weakgrid {

std::string_view to_string(SyncMode mode) {
  return mode == SyncMode::PccSync ? "pcc" : "sg";
}

SyncMode parse_sync_mode(std::string_view text) {
  if (text == "pcc") {
    return SyncMode::PccSync;
  }
  if (text == "sg") {
    return SyncMode::StrongGridSync;
  }
  throw std::invalid_argument("sync mode must be 'pcc' or 'sg', got '" + std::string(text) + "'");
}

ThreePhaseSample select_sync_voltage(SyncMode mode, const ThreePhaseSample& v_pcc,
                                     const ThreePhaseSample& v_sg) {
  return mode == SyncMode::PccSync ? v_pcc : v_sg;
}

DelayChannel::DelayChannel(double delay, double tick) : delay_(delay), tolerance_(0.25 * tick) {
  if (!(delay >= 0.0) || !std::isfinite(delay)) {
    throw std::invalid_argument("channel delay must be >= 0");
  }
  if (!(tick > 0.0)) {
    throw std::invalid_argument("channel tick must be > 0");
  }
}

void DelayChannel::push(const TimestampedAngle& sample) {
  if (!buffer_.empty() && !(sample.stamp > buffer_.back().stamp)) {
    throw std::logic_error("channel stamps must be strictly increasing");
  }
  buffer_.push_back(sample);
}

TimestampedAngle DelayChannel::pop(double t_receiver) {
  const double target = t_receiver - delay_ + tolerance_;
  if (buffer_.empty() || buffer_.front().stamp > target) {
    throw ChannelUnderrun("no angle sample available for receiver time " +
                          std::to_string(t_receiver));
  }
  while (buffer_.size() > 1 && buffer_[1].stamp <= target) {
    buffer_.pop_front();
  }
  return buffer_.front();
}

Angle compensate_angle(Angle phi_tau, double tau, const PerUnitBase& base) {
  return phi_tau + tau * base.omega_nominal;
}

RemoteSync::RemoteSync(const ControlParams& control, const PerUnitBase& base, double delay,
                       bool compensate, Angle initial_phase, int decimation)
    : control_(control),
      base_(base),
      channel_(delay, control.t_sample * decimation),
      compensate_(compensate),
      decimation_(decimation) {
  if (decimation < 1) {
    throw std::invalid_argument("channel decimation must be >= 1");
  }
  pll_.phase = initial_phase;
  pll_.omega = base.omega_nominal;
  const double period = control.t_sample * decimation;
  const auto history = static_cast<long long>(std::ceil(delay / period - 1e-9));
  for (long long k = -history; k < 0; ++k) {
    const double stamp = static_cast<double>(k) * period;
    channel_.push({stamp, initial_phase + base.omega_nominal * stamp});
  }
}

Angle RemoteSync::tick(long long k, const ThreePhaseSample& v_sg) {
  const double t = static_cast<double>(k) * control_.t_sample;
  if (k % decimation_ == 0) {
    channel_.push({t, pll_.phase});
  }
  pll_ = pll_update(pll_, v_sg, control_, base_);
  const TimestampedAngle seen = channel_.pop(t);
  if (!compensate_) {
    return seen.angle;
  }
  return compensate_angle(seen.angle, t - seen.stamp, base_);
}

}  // namespace weakgrid
