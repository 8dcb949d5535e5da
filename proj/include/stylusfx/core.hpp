#pragma once
// Channels, waveform shapes, pulses and actuation timelines: the common
// currency between effect synthesis, simulation and the device protocol.
//
// A timeline holds per-channel, non-overlapping pulses whose boundaries sit
// on a 0.1 ms grid (the haptic driver's start-up resolution). Timelines are
// plain values: build one, then treat it as immutable.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "stylusfx/io.hpp"

namespace stylusfx {

enum class Channel : int { VibeTip = 0, VibeEnd = 1, Motor = 2 };

inline constexpr int kChannelCount = 3;
inline constexpr double kTickMs = 0.1;

inline const char* to_string(Channel c) {
  switch (c) {
    case Channel::VibeTip: return "vibe_tip";
    case Channel::VibeEnd: return "vibe_end";
    case Channel::Motor: return "motor";
  }
  throw error("invalid channel");
}

enum class WaveformShape : int { Square = 0, IncreasingRamp = 1, DecreasingRamp = 2 };

inline const char* to_string(WaveformShape s) {
  switch (s) {
    case WaveformShape::Square: return "square";
    case WaveformShape::IncreasingRamp: return "increasing";
    case WaveformShape::DecreasingRamp: return "decreasing";
  }
  throw error("invalid waveform shape");
}

inline WaveformShape parse_shape(const std::string& name) {
  if (name == "square" || name == "sq") return WaveformShape::Square;
  if (name == "increasing" || name == "inc") return WaveformShape::IncreasingRamp;
  if (name == "decreasing" || name == "dec") return WaveformShape::DecreasingRamp;
  throw error("unknown waveform shape: " + name);
}

// Normalized drive envelope at phase u = (t - start) / on_duration, u in [0, 1).
inline double shape_envelope(WaveformShape s, double u) {
  switch (s) {
    case WaveformShape::Square: return 1.0;
    case WaveformShape::IncreasingRamp: return u;
    case WaveformShape::DecreasingRamp: return 1.0 - u;
  }
  throw error("invalid waveform shape");
}

/// One drive pulse. The interval is half-open: [start, start + on).
struct Pulse {
  double start_ms = 0.0;
  double on_ms = 0.0;
  double amplitude = 1.0;  // normalized drive, (0, 1]
  WaveformShape shape = WaveformShape::Square;
  int polarity = +1;  // +1 / -1; only meaningful on the motor channel

  double end_ms() const { return start_ms + on_ms; }

  bool operator==(const Pulse&) const = default;
};

/// Per-channel pulse schedule at 0.1 ms resolution.
struct ActuationTimeline {
  std::array<std::vector<Pulse>, kChannelCount> channels;
  double total_duration_ms = 0.0;

  const std::vector<Pulse>& channel(Channel c) const {
    int i = static_cast<int>(c);
    if (i < 0 || i >= kChannelCount) throw error("invalid channel");
    return channels[static_cast<size_t>(i)];
  }

  std::vector<Pulse>& channel(Channel c) {
    int i = static_cast<int>(c);
    if (i < 0 || i >= kChannelCount) throw error("invalid channel");
    return channels[static_cast<size_t>(i)];
  }

  bool operator==(const ActuationTimeline&) const = default;
};

inline double snap_to_tick(double t_ms) { return std::round(t_ms / kTickMs) * kTickMs; }

/// Signed drive level in [-1, 1] at time t. Zero outside every pulse; inside
/// a pulse the value is polarity x amplitude x shape envelope (vibe channels
/// ignore polarity and report unsigned drive).
inline double sample(const ActuationTimeline& tl, Channel ch, double t_ms) {
  const auto& pulses = tl.channel(ch);
  auto it = std::upper_bound(pulses.begin(), pulses.end(), t_ms,
                             [](double t, const Pulse& p) { return t < p.start_ms; });
  if (it == pulses.begin()) return 0.0;
  const Pulse& p = *(it - 1);
  if (t_ms >= p.end_ms()) return 0.0;
  double u = (t_ms - p.start_ms) / p.on_ms;
  double v = p.amplitude * shape_envelope(p.shape, u);
  return ch == Channel::Motor ? static_cast<double>(p.polarity) * v : v;
}

/// True while t lies inside a pulse on the channel (on-time), false in the
/// gaps (off-time). Off-time is what selects the motor driver's off-state
/// behavior, independent of the commanded level being zero.
inline bool within_pulse(const ActuationTimeline& tl, Channel ch, double t_ms) {
  const auto& pulses = tl.channel(ch);
  auto it = std::upper_bound(pulses.begin(), pulses.end(), t_ms,
                             [](double t, const Pulse& p) { return t < p.start_ms; });
  if (it == pulses.begin()) return false;
  return t_ms < (it - 1)->end_ms();
}

enum class ViolationKind {
  NegativeStart,
  NonPositiveDuration,
  AmplitudeOutOfRange,
  OffGridBoundary,
  Overlap,
  TotalDurationShort,
};

struct Violation {
  ViolationKind kind;
  Channel channel;
  int pulse_index;  // -1 when the violation is not tied to a single pulse
  std::string message;
};

namespace detail {
inline bool on_grid(double t_ms) {
  double ticks = t_ms / kTickMs;
  return std::abs(ticks - std::round(ticks)) < 1e-6;
}
}  // namespace detail

/// Collects every invariant violation; an empty list means the timeline is valid.
inline std::vector<Violation> validate(const ActuationTimeline& tl) {
  std::vector<Violation> out;
  for (int c = 0; c < kChannelCount; ++c) {
    Channel ch = static_cast<Channel>(c);
    const auto& pulses = tl.channels[static_cast<size_t>(c)];
    for (size_t i = 0; i < pulses.size(); ++i) {
      const Pulse& p = pulses[i];
      int idx = static_cast<int>(i);
      if (p.start_ms < 0.0)
        out.push_back({ViolationKind::NegativeStart, ch, idx, "pulse starts before t=0"});
      if (!(p.on_ms > 0.0))
        out.push_back({ViolationKind::NonPositiveDuration, ch, idx, "pulse duration must be > 0"});
      if (!(p.amplitude > 0.0) || p.amplitude > 1.0)
        out.push_back({ViolationKind::AmplitudeOutOfRange, ch, idx, "amplitude must be in (0, 1]"});
      if (!detail::on_grid(p.start_ms) || !detail::on_grid(p.end_ms()))
        out.push_back({ViolationKind::OffGridBoundary, ch, idx, "pulse boundary off the 0.1 ms grid"});
      if (i > 0 && p.start_ms < pulses[i - 1].end_ms() - 1e-9)
        out.push_back({ViolationKind::Overlap, ch, idx, "pulse overlaps its predecessor"});
    }
    if (!pulses.empty() && tl.total_duration_ms < pulses.back().end_ms() - 1e-9)
      out.push_back({ViolationKind::TotalDurationShort, ch, -1,
                     "total_duration ends before the last pulse"});
  }
  return out;
}

inline void require_valid(const ActuationTimeline& tl) {
  auto v = validate(tl);
  if (!v.empty()) throw error("invalid timeline: " + v.front().message);
}

/// Uniformly sampled drive levels; element k equals sample(tl, ch, k*dt).
/// dt is in seconds. Sample count is ceil(total/dt) + 1 so the grid covers
/// [0, total] inclusive.
inline std::vector<double> quantize(const ActuationTimeline& tl, Channel ch, double dt_s) {
  if (!(dt_s > 0.0)) throw error("quantize: dt must be > 0");
  double dt_ms = dt_s * 1000.0;
  size_t n = static_cast<size_t>(std::ceil(tl.total_duration_ms / dt_ms - 1e-9)) + 1;
  std::vector<double> out(n);
  for (size_t k = 0; k < n; ++k) out[k] = sample(tl, ch, static_cast<double>(k) * dt_ms);
  return out;
}

/// CSV export: header `t_ms,vibe_tip,vibe_end,motor`, one row per 0.1 ms tick
/// over [0, total_duration], fixed-point with 6 decimals.
inline void write_timeline_csv(const ActuationTimeline& tl, std::ostream& os) {
  os << "t_ms,vibe_tip,vibe_end,motor\n";
  size_t n = static_cast<size_t>(std::ceil(tl.total_duration_ms / kTickMs - 1e-9)) + 1;
  for (size_t k = 0; k < n; ++k) {
    double t = static_cast<double>(k) * kTickMs;
    os << io::fixed(t, 6) << ',' << io::fixed(sample(tl, Channel::VibeTip, t), 6) << ','
       << io::fixed(sample(tl, Channel::VibeEnd, t), 6) << ','
       << io::fixed(sample(tl, Channel::Motor, t), 6) << '\n';
  }
}

}  // namespace stylusfx
