#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "stylusfx/motor.hpp"
#include "stylusfx/rotation.hpp"

using namespace stylusfx;

namespace {

ActuationTimeline motor_pulse(double start_ms, double on_ms, WaveformShape shape, int polarity,
                              double total_ms) {
  ActuationTimeline tl;
  tl.channel(Channel::Motor).push_back({start_ms, on_ms, 1.0, shape, polarity});
  tl.total_duration_ms = total_ms;
  return tl;
}

}  // namespace

TEST_CASE("omega_max matches the closed form") {
  DcMotorParams p;
  double expected = p.torque_constant * p.v_supply /
                    (p.resistance_ohm * p.viscous_friction + p.torque_constant * p.back_emf_constant);
  CHECK(p.omega_max() == Catch::Approx(expected));
  CHECK(p.omega_max() == Catch::Approx(576.923076923).margin(1e-6));
}

TEST_CASE("simulate_motor: zero timeline stays at rest") {
  DcMotorParams p;
  ActuationTimeline tl;
  tl.total_duration_ms = 5.0;
  auto profile = simulate_motor(p, tl, 1e-5, 5.0);
  for (const auto& s : profile.samples) {
    CHECK(s.omega == 0.0);
    CHECK(s.current == 0.0);
    CHECK(s.tau_casing == 0.0);
  }
}

TEST_CASE("simulate_motor: constant drive reaches terminal velocity, torque dies out") {
  DcMotorParams p;
  double run_ms = snap_to_tick(20.0 * p.settling_tc_s(OffMode::Brake) * 1e3);
  auto tl = motor_pulse(0.0, run_ms, WaveformShape::Square, +1, run_ms);
  auto profile = simulate_motor(p, tl, 1e-5, 0.0);
  double omega_end = profile.samples.back().omega;
  CHECK(std::abs(omega_end - p.omega_max()) / p.omega_max() < 0.005);
  // last integration step: acceleration has vanished
  CHECK(std::abs(profile.samples[profile.samples.size() - 2].tau_casing) < 1e-6);
}

TEST_CASE("simulate_motor: onset and offset casing-torque transients (brake)") {
  DcMotorParams p;
  auto tl = motor_pulse(0.0, 200.0, WaveformShape::Square, +1, 400.0);
  auto profile = simulate_motor(p, tl, 1e-5, 100.0);

  // onset from rest: first nonzero casing torque opposes the rotor, i.e.
  // carries the intended (negative for +1 polarity) sign
  size_t k = 0;
  while (k < profile.samples.size() && profile.samples[k].tau_casing == 0.0) ++k;
  REQUIRE(k < profile.samples.size());
  CHECK(profile.samples[k].tau_casing < 0.0);
  CHECK(intended_casing_sign(RotationDirection::CW) == -1);

  // just past the offset the reaction torque reverses
  size_t off = static_cast<size_t>(std::llround(0.200 / profile.dt_s));
  CHECK(profile.samples[off + 1].tau_casing > 0.0);
}

TEST_CASE("simulate_motor: torque samples are exact step-average reactions") {
  DcMotorParams p;
  auto tl = motor_pulse(0.0, 50.0, WaveformShape::IncreasingRamp, +1, 100.0);
  auto profile = simulate_motor(p, tl, 1e-5, 20.0);
  for (size_t k = 0; k + 1 < profile.samples.size(); ++k) {
    double dw = profile.samples[k + 1].omega - profile.samples[k].omega;
    CHECK(profile.samples[k].tau_casing == -p.rotor_inertia * dw / profile.dt_s);
  }
  CHECK(profile.samples.back().tau_casing == 0.0);
}

TEST_CASE("simulate_motor: momentum bookkeeping is exact for both off-modes") {
  for (OffMode mode : {OffMode::Brake, OffMode::Coast}) {
    DcMotorParams p;
    p.off_mode = mode;
    RotationSpec spec;
    spec.on_ms = 80.0;
    spec.off_ms = 40.0;
    spec.pulse_count = 2;
    spec.shape = WaveformShape::DecreasingRamp;
    auto tl = schedule_rotation(spec);
    auto profile = simulate_motor(p, tl, 1e-5, 30.0);
    double net = 0.0;
    for (const auto& s : profile.samples) net += s.tau_casing * profile.dt_s;
    double domega = profile.samples.back().omega - profile.samples.front().omega;
    CHECK(std::abs(net + p.rotor_inertia * domega) < 1e-12);
  }
}

TEST_CASE("simulate_motor: rest-to-rest cycle leaves no net impulse") {
  DcMotorParams p;
  auto tl = motor_pulse(0.0, 200.0, WaveformShape::Square, +1, 400.0);
  double tail = 15.0 * p.settling_tc_s(OffMode::Brake) * 1e3;
  auto profile = simulate_motor(p, tl, 1e-5, tail);
  auto m = asymmetry_metrics(profile, -1);
  CHECK(std::abs(m.net_impulse) < 1e-9);
}

TEST_CASE("simulate_motor: halving dt barely moves the torque peaks") {
  DcMotorParams p;
  RotationSpec spec;  // (200, 200) square
  auto tl = schedule_rotation(spec);
  auto coarse = asymmetry_metrics(simulate_motor(p, tl, 1e-5), -1);
  auto fine = asymmetry_metrics(simulate_motor(p, tl, 5e-6), -1);
  CHECK(std::abs(coarse.peak_intended - fine.peak_intended) / fine.peak_intended < 1e-3);
  CHECK(std::abs(coarse.peak_opposite - fine.peak_opposite) / fine.peak_opposite < 1e-3);
}

TEST_CASE("simulate_motor: torque scales linearly with supply voltage (b = 0)") {
  DcMotorParams lo;
  lo.viscous_friction = 0.0;
  DcMotorParams hi = lo;
  hi.v_supply = 2.0 * lo.v_supply;
  auto tl = motor_pulse(0.0, 100.0, WaveformShape::Square, +1, 200.0);
  auto a = simulate_motor(lo, tl, 1e-5, 50.0);
  auto b = simulate_motor(hi, tl, 1e-5, 50.0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t k = 0; k < a.samples.size(); k += 100) {
    CHECK(b.samples[k].omega == Catch::Approx(2.0 * a.samples[k].omega).margin(1e-12));
    CHECK(b.samples[k].tau_casing == Catch::Approx(2.0 * a.samples[k].tau_casing).margin(1e-12));
  }
}

TEST_CASE("simulate_motor: coast opens the circuit and decays under friction alone") {
  DcMotorParams p;
  p.off_mode = OffMode::Coast;
  auto tl = motor_pulse(0.0, 100.0, WaveformShape::Square, +1, 100.0);
  auto profile = simulate_motor(p, tl, 1e-5, 200.0);
  size_t at_end = static_cast<size_t>(std::llround(0.100 / profile.dt_s));
  size_t later = static_cast<size_t>(std::llround(0.200 / profile.dt_s));
  CHECK(profile.samples[at_end + 1].current == 0.0);
  CHECK(profile.samples[later].current == 0.0);
  double expected_ratio = std::exp(-(profile.samples[later].t_s - profile.samples[at_end].t_s) *
                                   p.viscous_friction / p.rotor_inertia);
  CHECK(profile.samples[later].omega / profile.samples[at_end].omega ==
        Catch::Approx(expected_ratio).margin(1e-9));
}

TEST_CASE("waveform asymmetry ordering: decreasing > square > increasing") {
  DcMotorParams p;
  auto run = [&](WaveformShape shape) {
    RotationSpec spec;
    spec.on_ms = 200.0;
    spec.off_ms = 200.0;
    spec.shape = shape;
    auto profile = simulate_motor(p, schedule_rotation(spec), 5e-6);
    return asymmetry_metrics(profile, intended_casing_sign(spec.direction)).ratio;
  };
  double dec = run(WaveformShape::DecreasingRamp);
  double sq = run(WaveformShape::Square);
  double inc = run(WaveformShape::IncreasingRamp);
  CAPTURE(dec, sq, inc);
  CHECK(dec > sq);
  CHECK(sq > inc);
}

TEST_CASE("asymmetry_metrics: conventions and errors") {
  TorqueProfile zero;
  zero.dt_s = 1e-5;
  zero.samples.assign(100, MotorState{});
  auto m = asymmetry_metrics(zero, +1);
  CHECK(m.peak_intended == 0.0);
  CHECK(m.peak_opposite == 0.0);
  CHECK(m.ratio == 1.0);
  CHECK(m.net_impulse == 0.0);

  TorqueProfile one_sided = zero;
  one_sided.samples[10].tau_casing = -2e-3;
  auto m2 = asymmetry_metrics(one_sided, -1);
  CHECK(m2.peak_intended == 2e-3);
  CHECK(m2.peak_opposite == 0.0);
  CHECK(std::isinf(m2.ratio));

  CHECK_THROWS_AS(asymmetry_metrics(TorqueProfile{}, +1), error);
  CHECK_THROWS_AS(asymmetry_metrics(zero, 2), error);
}

TEST_CASE("simulate_motor: step-size guard and validation") {
  DcMotorParams p;
  ActuationTimeline tl;
  tl.total_duration_ms = 1.0;
  CHECK_THROWS_AS(simulate_motor(p, tl, 0.0, 0.0), error);
  CHECK_THROWS_AS(simulate_motor(p, tl, 2e-5, 0.0), error);  // > (L/R)/5
  CHECK_NOTHROW(simulate_motor(p, tl, 1e-5, 0.0));

  ActuationTimeline bad;
  bad.channel(Channel::Motor).push_back({-1.0, 10.0, 1.0, WaveformShape::Square, +1});
  bad.total_duration_ms = 10.0;
  CHECK_THROWS_AS(simulate_motor(p, bad, 1e-5, 0.0), error);

  DcMotorParams invalid;
  invalid.rotor_inertia = 0.0;
  CHECK_THROWS_AS(simulate_motor(invalid, tl, 1e-5, 0.0), error);
}

TEST_CASE("simulate_erm: force envelope follows m*r*omega^2") {
  ErmParams erm;
  ActuationTimeline silent;
  silent.total_duration_ms = 2.0;
  auto quiet = simulate_erm(erm, silent, Channel::VibeTip, 1e-5, 2.0);
  for (double f : quiet.force_n) CHECK(f == 0.0);

  // steady drive settles at m*r*omega_ss^2
  double run_ms = snap_to_tick(20.0 * erm.motor.settling_tc_s(OffMode::Brake) * 1e3);
  ActuationTimeline tl;
  tl.channel(Channel::VibeTip).push_back({0.0, run_ms, 1.0, WaveformShape::Square, +1});
  tl.total_duration_ms = run_ms;
  auto profile = simulate_erm(erm, tl, Channel::VibeTip, 1e-5, 0.0);
  double expected = erm.eccentric_mass_kg * erm.eccentric_radius_m * erm.motor.omega_max() *
                    erm.motor.omega_max();
  CHECK(profile.force_n.back() == Catch::Approx(expected).epsilon(0.01));

  // doubling the eccentric mass doubles the force
  ErmParams heavy = erm;
  heavy.eccentric_mass_kg *= 2.0;
  auto profile2 = simulate_erm(heavy, tl, Channel::VibeTip, 1e-5, 0.0);
  CHECK(profile2.force_n.back() == Catch::Approx(2.0 * profile.force_n.back()).margin(1e-12));

  CHECK_THROWS_AS(simulate_erm(erm, tl, Channel::Motor, 1e-5, 0.0), error);
  ErmParams bad = erm;
  bad.eccentric_radius_m = 0.0;
  CHECK_THROWS_AS(simulate_erm(bad, tl, Channel::VibeTip, 1e-5, 0.0), error);
}

TEST_CASE("motor params file: round-trip and rejection of unknown keys") {
  std::string path = "motor_params_test.txt";
  io::write_file(path,
                 "# test params\n"
                 "R = 12.5\n"
                 "L = 0.001\n"
                 "k_t = 0.004\n"
                 "k_e = 0.0045\n"
                 "J = 2e-7\n"
                 "b = 5e-8\n"
                 "v_supply = 5\n"
                 "off_mode = coast\n"
                 "eccentric_mass = 1e-3\n"
                 "eccentric_radius = 2e-3\n");
  auto p = DcMotorParams::from_file(path);
  CHECK(p.resistance_ohm == 12.5);
  CHECK(p.inductance_h == 0.001);
  CHECK(p.torque_constant == 0.004);
  CHECK(p.back_emf_constant == 0.0045);
  CHECK(p.rotor_inertia == 2e-7);
  CHECK(p.viscous_friction == 5e-8);
  CHECK(p.v_supply == 5.0);
  CHECK(p.off_mode == OffMode::Coast);
  auto e = ErmParams::from_file(path);
  CHECK(e.eccentric_mass_kg == 1e-3);
  CHECK(e.eccentric_radius_m == 2e-3);
  std::remove(path.c_str());

  io::write_file(path, "R = 10\nbogus_key = 1\n");
  CHECK_THROWS_AS(DcMotorParams::from_file(path), error);
  std::remove(path.c_str());
}
