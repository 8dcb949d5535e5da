// Minimal tour: build a rotation effect, run the motor model, report the
// casing-torque asymmetry that makes the illusion work.

#include <cstdio>

#include "stylusfx/motor.hpp"
#include "stylusfx/rotation.hpp"

int main() {
  using namespace stylusfx;

  RotationSpec spec;
  spec.direction = RotationDirection::CW;
  spec.on_ms = 200.0;
  spec.off_ms = 200.0;
  spec.shape = WaveformShape::DecreasingRamp;
  spec.pulse_count = 3;

  ActuationTimeline timeline = schedule_rotation(spec);
  std::printf("timeline: %zu motor pulses, %.1f ms total\n",
              timeline.channel(Channel::Motor).size(), timeline.total_duration_ms);

  DcMotorParams params;
  TorqueProfile profile = simulate_motor(params, timeline);
  AsymmetryMetrics m = asymmetry_metrics(profile, intended_casing_sign(spec.direction));
  std::printf("peak torque intended %.3e N*m, opposite %.3e N*m, A = %.2f\n", m.peak_intended,
              m.peak_opposite, m.ratio);
  std::printf("net impulse %.3e N*m*s (rest-to-rest cancels)\n", m.net_impulse);
  return 0;
}
