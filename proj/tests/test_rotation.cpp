#include <catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "stylusfx/rotation.hpp"

using namespace stylusfx;

TEST_CASE("schedule_rotation: pulse train placement and polarity") {
  RotationSpec spec;
  spec.direction = RotationDirection::CW;
  spec.on_ms = 200.0;
  spec.off_ms = 200.0;
  spec.pulse_count = 3;
  auto tl = schedule_rotation(spec);
  const auto& pulses = tl.channel(Channel::Motor);
  REQUIRE(pulses.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(pulses[static_cast<size_t>(k)].start_ms == k * 400.0);
    CHECK(pulses[static_cast<size_t>(k)].on_ms == 200.0);
    CHECK(pulses[static_cast<size_t>(k)].polarity == +1);
  }
  CHECK(tl.total_duration_ms == 1200.0);
  CHECK(tl.channel(Channel::VibeTip).empty());
  CHECK(tl.channel(Channel::VibeEnd).empty());
  CHECK(validate(tl).empty());
}

TEST_CASE("schedule_rotation: zero off-time gives contiguous pulses") {
  RotationSpec spec;
  spec.direction = RotationDirection::CCW;
  spec.on_ms = 50.0;
  spec.off_ms = 0.0;
  spec.pulse_count = 2;
  auto tl = schedule_rotation(spec);
  const auto& pulses = tl.channel(Channel::Motor);
  REQUIRE(pulses.size() == 2);
  CHECK(pulses[0].start_ms == 0.0);
  CHECK(pulses[1].start_ms == 50.0);
  CHECK(pulses[0].polarity == -1);
  CHECK(pulses[1].polarity == -1);
  CHECK(tl.total_duration_ms == 100.0);
  CHECK(validate(tl).empty());
}

TEST_CASE("schedule_rotation: decreasing ramp decays 1 to 0 over the on-time") {
  RotationSpec spec;
  spec.on_ms = 200.0;
  spec.off_ms = 200.0;
  spec.shape = WaveformShape::DecreasingRamp;
  spec.pulse_count = 1;
  auto tl = schedule_rotation(spec);
  CHECK(sample(tl, Channel::Motor, 0.0) == 1.0);
  CHECK(sample(tl, Channel::Motor, 100.0) == Catch::Approx(0.5));
  CHECK(sample(tl, Channel::Motor, 199.9999) == Catch::Approx(0.0).margin(1e-5));
  CHECK(sample(tl, Channel::Motor, 250.0) == 0.0);
}

TEST_CASE("schedule_rotation: polarity inversion leaves timing untouched") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    RotationSpec spec;
    spec.on_ms = 0.1 * (1 + rng.below(6000));
    spec.off_ms = 0.1 * rng.below(6000);
    spec.pulse_count = 1 + static_cast<int>(rng.below(5));
    spec.shape = static_cast<WaveformShape>(rng.below(3));
    spec.direction = RotationDirection::CW;
    auto cw = schedule_rotation(spec);
    spec.direction = RotationDirection::CCW;
    auto ccw = schedule_rotation(spec);

    REQUIRE(cw.channel(Channel::Motor).size() == ccw.channel(Channel::Motor).size());
    double on = snap_to_tick(spec.on_ms), off = snap_to_tick(spec.off_ms);
    for (size_t k = 0; k < cw.channel(Channel::Motor).size(); ++k) {
      const Pulse& a = cw.channel(Channel::Motor)[k];
      const Pulse& b = ccw.channel(Channel::Motor)[k];
      CHECK(a.start_ms == b.start_ms);
      CHECK(a.start_ms == Catch::Approx(static_cast<double>(k) * (on + off)).margin(1e-9));
      CHECK(a.on_ms == b.on_ms);
      CHECK(a.polarity == -b.polarity);
    }
    CHECK(validate(cw).empty());
    CHECK(validate(ccw).empty());
  }
}

TEST_CASE("schedule_rotation: invalid specs rejected") {
  RotationSpec s;
  s.on_ms = 0.0;
  CHECK_THROWS_AS(schedule_rotation(s), error);
  s = {};
  s.off_ms = -1.0;
  CHECK_THROWS_AS(schedule_rotation(s), error);
  s = {};
  s.pulse_count = 0;
  CHECK_THROWS_AS(schedule_rotation(s), error);
  s = {};
  s.amplitude = 2.0;
  CHECK_THROWS_AS(schedule_rotation(s), error);
}

TEST_CASE("default rotation table: waveform anchors are exact") {
  auto table = RotationPerceptTable::default_table();
  CHECK(predict_direction_accuracy(200, 200, WaveformShape::Square, table) ==
        Catch::Approx(0.90).margin(1e-12));
  CHECK(predict_direction_accuracy(200, 200, WaveformShape::IncreasingRamp, table) ==
        Catch::Approx(0.78).margin(1e-12));
  CHECK(predict_direction_accuracy(200, 200, WaveformShape::DecreasingRamp, table) ==
        Catch::Approx(0.955).margin(1e-12));
}

TEST_CASE("default rotation table: corner values and duration monotonicity") {
  auto table = RotationPerceptTable::default_table();
  CHECK(predict_direction_accuracy(25, 25, WaveformShape::Square, table) == Catch::Approx(0.55));
  CHECK(predict_direction_accuracy(575, 575, WaveformShape::Square, table) == Catch::Approx(0.95));
  CHECK(predict_direction_accuracy(575, 575, WaveformShape::Square, table) >
        predict_direction_accuracy(25, 25, WaveformShape::Square, table));
  table.validate();  // monotone in both axes for every shape

  // anchor ordering mirrors the identification rates
  double sq = predict_direction_accuracy(200, 200, WaveformShape::Square, table);
  double inc = predict_direction_accuracy(200, 200, WaveformShape::IncreasingRamp, table);
  double dec = predict_direction_accuracy(200, 200, WaveformShape::DecreasingRamp, table);
  CHECK(dec > sq);
  CHECK(sq > inc);
}

TEST_CASE("predict_direction_accuracy: clamps to hull, rejects bad durations") {
  auto table = RotationPerceptTable::default_table();
  CHECK(predict_direction_accuracy(1, 1, WaveformShape::Square, table) == Catch::Approx(0.55));
  CHECK(predict_direction_accuracy(10000, 10000, WaveformShape::Square, table) == Catch::Approx(0.95));
  CHECK_THROWS_AS(predict_direction_accuracy(0, 100, WaveformShape::Square, table), error);
  CHECK_THROWS_AS(predict_direction_accuracy(100, 0, WaveformShape::Square, table), error);
}

TEST_CASE("rotation table loader: round-trip and monotonicity rejection") {
  auto table = RotationPerceptTable::default_table();
  const auto& g = RotationPerceptTable::grid();
  std::ostringstream os;
  os << "shape,on_ms,off_ms,p_correct\n";
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g.size(); ++j)
        os << to_string(static_cast<WaveformShape>(s)) << ',' << g[i] << ',' << g[j] << ','
           << table.cell(static_cast<WaveformShape>(s), i, j) << "\n";
  std::string path = "rotation_table_test.csv";
  io::write_file(path, os.str());
  auto loaded = RotationPerceptTable::load_csv(path);
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g.size(); ++j)
        CHECK(loaded.cell(static_cast<WaveformShape>(s), i, j) ==
              Catch::Approx(table.cell(static_cast<WaveformShape>(s), i, j)).margin(1e-12));
  std::remove(path.c_str());

  // non-monotone grid must be rejected by the loader
  RotationPerceptTable bad = RotationPerceptTable::default_table();
  bad.set_cell(WaveformShape::Square, 3, 3, 0.6);  // dips below its neighbors
  CHECK_THROWS_AS(bad.validate(), error);

  RotationPerceptTable out_of_range = RotationPerceptTable::default_table();
  out_of_range.set_cell(WaveformShape::Square, 0, 0, 0.3);
  CHECK_THROWS_AS(out_of_range.validate(), error);
}

TEST_CASE("perceive_rotation: degenerate probabilities") {
  RotationPerceptTable sure;
  const auto& g = RotationPerceptTable::grid();
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g.size(); ++j) sure.set_cell(static_cast<WaveformShape>(s), i, j, 1.0);
  RotationSpec spec;
  spec.direction = RotationDirection::CCW;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) CHECK(perceive_rotation(spec, sure, rng) == RotationDirection::CCW);
}

TEST_CASE("perceive_rotation: chance-level cell splits 50/50") {
  RotationPerceptTable coin;
  const auto& g = RotationPerceptTable::grid();
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < g.size(); ++i)
      for (size_t j = 0; j < g.size(); ++j) coin.set_cell(static_cast<WaveformShape>(s), i, j, 0.5);
  RotationSpec spec;
  Rng rng(11);
  int correct = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) correct += perceive_rotation(spec, coin, rng) == spec.direction;
  CHECK(std::abs(100.0 * correct / n - 50.0) < 2.0);
}

TEST_CASE("perceive_rotation: zero off-time is a valid spec and clamps to the hull") {
  auto table = RotationPerceptTable::default_table();
  RotationSpec spec;
  spec.on_ms = 100.0;
  spec.off_ms = 0.0;
  Rng rng(5);
  CHECK_NOTHROW(perceive_rotation(spec, table, rng));
  // clamped accuracy equals the off=25 column edge
  CHECK(perceive_rotation_at(spec, table, 0.0) == spec.direction);
}

TEST_CASE("perceive_rotation: CW and CCW share the same accuracy path") {
  auto table = RotationPerceptTable::default_table();
  RotationSpec cw;
  cw.direction = RotationDirection::CW;
  RotationSpec ccw = cw;
  ccw.direction = RotationDirection::CCW;
  // identical draws -> identical correctness on both polarities
  for (int i = 0; i < 500; ++i) {
    double u = static_cast<double>(i) / 500.0;
    bool cw_correct = perceive_rotation_at(cw, table, u) == cw.direction;
    bool ccw_correct = perceive_rotation_at(ccw, table, u) == ccw.direction;
    CHECK(cw_correct == ccw_correct);
  }
}
