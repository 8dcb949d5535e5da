#pragma once
// Brushed DC motor and ERM actuator simulation.
//
// Electrical/mechanical model:
//   di/dt = (v - R*i - k_e*w) / L
//   dw/dt = (k_t*i - b*w) / J
// driven by v(t) = v_supply * timeline drive. During off-time the driver
// either shorts the winding (Brake: v = 0, circuit closed) or opens it
// (Coast: i forced to 0, rotor decays under friction alone).
//
// The casing torque is the reaction to rotor acceleration,
// tau_casing = -J * dw/dt. Sample k stores the average torque over step k
// (-J * delta_w / dt), which makes the momentum bookkeeping
//   sum(tau * dt) = -J * (w_end - w_start)
// hold exactly; the final sample is a terminal state snapshot with tau = 0.
//
// Integration is classical fixed-step 4th-order Runge-Kutta. Fixed stepping
// keeps profiles bit-reproducible; pick dt so it divides the 0.1 ms command
// grid (the defaults do).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stylusfx/core.hpp"

namespace stylusfx {

enum class OffMode : int { Brake = 0, Coast = 1 };

inline const char* to_string(OffMode m) { return m == OffMode::Brake ? "brake" : "coast"; }

inline OffMode parse_off_mode(const std::string& s) {
  if (s == "brake") return OffMode::Brake;
  if (s == "coast") return OffMode::Coast;
  throw error("unknown off_mode: " + s);
}

/// Electromechanical constants, SI units. Defaults approximate a 13 mm
/// coreless micromotor; override via params file for other hardware.
struct DcMotorParams {
  double resistance_ohm = 10.0;        // R
  double inductance_h = 0.5e-3;        // L
  double torque_constant = 0.005;      // k_t, N*m/A
  double back_emf_constant = 0.005;    // k_e, V*s/rad
  double rotor_inertia = 1e-7;         // J, kg*m^2
  double viscous_friction = 1e-7;      // b, N*m*s/rad
  double v_supply = 3.0;               // volts at drive level 1.0
  OffMode off_mode = OffMode::Brake;

  void validate() const {
    if (!(resistance_ohm > 0.0) || !(inductance_h > 0.0) || !(torque_constant > 0.0) ||
        !(back_emf_constant > 0.0) || !(rotor_inertia > 0.0))
      throw error("invalid motor params: R, L, k_t, k_e, J must be > 0");
    if (viscous_friction < 0.0) throw error("invalid motor params: b must be >= 0");
    if (!(v_supply > 0.0)) throw error("invalid motor params: v_supply must be > 0");
  }

  /// Terminal angular velocity under constant full drive.
  double omega_max() const {
    return torque_constant * v_supply /
           (resistance_ohm * viscous_friction + torque_constant * back_emf_constant);
  }

  double electrical_tc_s() const { return inductance_h / resistance_ohm; }

  /// Slowest decay constant of the off-state: winding shorted couples the
  /// back-EMF into braking, open circuit leaves friction only.
  double settling_tc_s(OffMode mode) const {
    if (mode == OffMode::Brake)
      return rotor_inertia * resistance_ohm /
             (resistance_ohm * viscous_friction + torque_constant * back_emf_constant);
    return rotor_inertia / std::max(viscous_friction, 1e-12);
  }

  static DcMotorParams from_key_values(const std::vector<std::pair<std::string, std::string>>& kv);
  static DcMotorParams from_file(const std::string& path);
};

struct MotorState {
  double t_s = 0.0;
  double omega = 0.0;       // rad/s
  double current = 0.0;     // A
  double tau_casing = 0.0;  // N*m, average over the step starting at t_s
};

struct TorqueProfile {
  double dt_s = 0.0;
  std::vector<MotorState> samples;
};

struct ErmParams {
  DcMotorParams motor;
  double eccentric_mass_kg = 0.5e-3;
  double eccentric_radius_m = 1e-3;

  void validate() const {
    motor.validate();
    if (!(eccentric_mass_kg > 0.0) || !(eccentric_radius_m > 0.0))
      throw error("invalid erm params: mass and radius must be > 0");
  }

  static ErmParams from_file(const std::string& path);
};

/// Vibration force envelope F(t) = m * r * w(t)^2 alongside the motor states.
struct ErmProfile {
  TorqueProfile motor;
  std::vector<double> force_n;
};

namespace detail {

// Pulse list for one channel in seconds, plus a monotone cursor.
struct DriveTrack {
  struct Seg {
    double start_s, end_s, on_s, amplitude;
    WaveformShape shape;
    double polarity;
  };
  std::vector<Seg> segs;
  size_t idx = 0;

  DriveTrack(const ActuationTimeline& tl, Channel ch, bool signed_channel) {
    for (const Pulse& p : tl.channel(ch)) {
      segs.push_back({p.start_ms * 1e-3, p.end_ms() * 1e-3, p.on_ms * 1e-3, p.amplitude, p.shape,
                      signed_channel ? static_cast<double>(p.polarity) : 1.0});
    }
  }

  // Requires non-decreasing query times.
  bool within(double t_s) {
    while (idx < segs.size() && t_s >= segs[idx].end_s) ++idx;
    return idx < segs.size() && t_s >= segs[idx].start_s;
  }

  double level(double t_s) const {
    const Seg& s = segs[idx];
    return s.polarity * s.amplitude * shape_envelope(s.shape, (t_s - s.start_s) / s.on_s);
  }
};

}  // namespace detail

/// Integrates the motor driven by the given timeline channel for the
/// timeline duration plus tail_ms (tail defaults to 10 settling time
/// constants so the rotor returns to rest). dt must resolve the fastest
/// time constant with at least 5 steps.
inline TorqueProfile simulate_channel(const DcMotorParams& params, const ActuationTimeline& timeline,
                                      Channel channel, double dt_s = 1e-5, double tail_ms = -1.0) {
  params.validate();
  require_valid(timeline);
  double tc_min = std::min(params.electrical_tc_s(),
                           params.rotor_inertia / std::max(params.viscous_friction, 1e-12));
  if (!(dt_s > 0.0) || dt_s > tc_min / 5.0 * (1.0 + 1e-9))
    throw error("step size out of range: dt must be in (0, min(L/R, J/b)/5]");
  if (tail_ms < 0.0) tail_ms = 10.0 * params.settling_tc_s(params.off_mode) * 1e3;

  const double R = params.resistance_ohm, L = params.inductance_h;
  const double kt = params.torque_constant, ke = params.back_emf_constant;
  const double J = params.rotor_inertia, b = params.viscous_friction;
  const bool coast = params.off_mode == OffMode::Coast;

  detail::DriveTrack track(timeline, channel, channel == Channel::Motor);

  double t_end = timeline.total_duration_ms * 1e-3 + tail_ms * 1e-3;
  size_t n_steps = static_cast<size_t>(std::ceil(t_end / dt_s - 1e-9));

  TorqueProfile profile;
  profile.dt_s = dt_s;
  profile.samples.reserve(n_steps + 1);

  double i = 0.0, w = 0.0;
  struct Deriv {
    double di, dw;
  };
  auto rhs = [&](double t, double ci, double cw) -> Deriv {
    if (track.within(t)) {
      double v = params.v_supply * track.level(t);
      return {(v - R * ci - ke * cw) / L, (kt * ci - b * cw) / J};
    }
    if (coast) return {0.0, -b * cw / J};
    return {(-R * ci - ke * cw) / L, (kt * ci - b * cw) / J};
  };

  profile.samples.push_back({0.0, w, i, 0.0});
  for (size_t k = 0; k < n_steps; ++k) {
    double t = static_cast<double>(k) * dt_s;
    double h = dt_s;
    Deriv k1 = rhs(t, i, w);
    Deriv k2 = rhs(t + h / 2, i + h / 2 * k1.di, w + h / 2 * k1.dw);
    Deriv k3 = rhs(t + h / 2, i + h / 2 * k2.di, w + h / 2 * k2.dw);
    Deriv k4 = rhs(t + h, i + h * k3.di, w + h * k3.dw);
    i += h / 6 * (k1.di + 2 * k2.di + 2 * k3.di + k4.di);
    w += h / 6 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
    double t_next = static_cast<double>(k + 1) * dt_s;
    if (coast && !track.within(t_next)) i = 0.0;
    if (!std::isfinite(i) || !std::isfinite(w))
      throw divergence_error("motor simulation diverged (non-finite state)");
    double w_prev = profile.samples.back().omega;
    profile.samples.back().tau_casing = -J * (w - w_prev) / h;
    profile.samples.push_back({t_next, w, i, 0.0});
  }
  return profile;
}

inline TorqueProfile simulate_motor(const DcMotorParams& params, const ActuationTimeline& timeline,
                                    double dt_s = 1e-5, double tail_ms = -1.0) {
  return simulate_channel(params, timeline, Channel::Motor, dt_s, tail_ms);
}

inline ErmProfile simulate_erm(const ErmParams& params, const ActuationTimeline& timeline,
                               Channel channel, double dt_s = 1e-5, double tail_ms = -1.0) {
  params.validate();
  if (channel != Channel::VibeTip && channel != Channel::VibeEnd)
    throw error("simulate_erm: channel must be a vibe channel");
  ErmProfile out;
  out.motor = simulate_channel(params.motor, timeline, channel, dt_s, tail_ms);
  out.force_n.reserve(out.motor.samples.size());
  for (const MotorState& s : out.motor.samples)
    out.force_n.push_back(params.eccentric_mass_kg * params.eccentric_radius_m * s.omega * s.omega);
  return out;
}

struct AsymmetryMetrics {
  double peak_intended = 0.0;  // N*m
  double peak_opposite = 0.0;  // N*m
  double ratio = 1.0;          // peak_intended / peak_opposite
  double net_impulse = 0.0;    // N*m*s, equals -J * delta_omega
};

/// Peak casing torque in the intended direction vs the opposite one, their
/// ratio, and the net torque impulse. intended_sign is the on-time casing
/// torque sign (see intended_casing_sign()).
inline AsymmetryMetrics asymmetry_metrics(const TorqueProfile& profile, int intended_sign) {
  if (profile.samples.empty()) throw error("asymmetry_metrics: empty profile");
  if (intended_sign != 1 && intended_sign != -1)
    throw error("asymmetry_metrics: intended_sign must be +1 or -1");
  AsymmetryMetrics m;
  double net = 0.0;
  for (const MotorState& s : profile.samples) {
    double aligned = intended_sign * s.tau_casing;
    m.peak_intended = std::max(m.peak_intended, aligned);
    m.peak_opposite = std::max(m.peak_opposite, -aligned);
    net += s.tau_casing * profile.dt_s;
  }
  m.net_impulse = net;
  if (m.peak_opposite < 1e-12)
    m.ratio = m.peak_intended < 1e-12 ? 1.0 : std::numeric_limits<double>::infinity();
  else
    m.ratio = m.peak_intended / m.peak_opposite;
  return m;
}

/// CSV export: `t_s,omega_rad_s,current_a,tau_casing_nm`.
inline void write_torque_csv(const TorqueProfile& p, std::ostream& os) {
  os << "t_s,omega_rad_s,current_a,tau_casing_nm\n";
  for (const MotorState& s : p.samples)
    os << io::fixed(s.t_s, 9) << ',' << io::sci(s.omega) << ',' << io::sci(s.current) << ','
       << io::sci(s.tau_casing) << '\n';
}

/// CSV export: `t_s,omega_rad_s,force_n`.
inline void write_erm_csv(const ErmProfile& p, std::ostream& os) {
  os << "t_s,omega_rad_s,force_n\n";
  for (size_t k = 0; k < p.motor.samples.size(); ++k)
    os << io::fixed(p.motor.samples[k].t_s, 9) << ',' << io::sci(p.motor.samples[k].omega) << ','
       << io::sci(p.force_n[k]) << '\n';
}

inline DcMotorParams DcMotorParams::from_key_values(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  DcMotorParams p;
  for (const auto& [key, value] : kv) {
    if (key == "R") p.resistance_ohm = io::parse_double(value, key);
    else if (key == "L") p.inductance_h = io::parse_double(value, key);
    else if (key == "k_t") p.torque_constant = io::parse_double(value, key);
    else if (key == "k_e") p.back_emf_constant = io::parse_double(value, key);
    else if (key == "J") p.rotor_inertia = io::parse_double(value, key);
    else if (key == "b") p.viscous_friction = io::parse_double(value, key);
    else if (key == "v_supply") p.v_supply = io::parse_double(value, key);
    else if (key == "off_mode") p.off_mode = parse_off_mode(value);
    else if (key == "eccentric_mass" || key == "eccentric_radius") { /* ERM keys, see ErmParams */ }
    else throw error("unknown motor params key: " + key);
  }
  p.validate();
  return p;
}

inline DcMotorParams DcMotorParams::from_file(const std::string& path) {
  return from_key_values(io::parse_key_values(io::read_file(path)));
}

inline ErmParams ErmParams::from_file(const std::string& path) {
  auto kv = io::parse_key_values(io::read_file(path));
  ErmParams p;
  p.motor = DcMotorParams::from_key_values(kv);
  for (const auto& [key, value] : kv) {
    if (key == "eccentric_mass") p.eccentric_mass_kg = io::parse_double(value, key);
    else if (key == "eccentric_radius") p.eccentric_radius_m = io::parse_double(value, key);
  }
  p.validate();
  return p;
}

}  // namespace stylusfx
