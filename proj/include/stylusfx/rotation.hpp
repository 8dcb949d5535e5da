#pragma once
// Rotational-torque effect about the stylus long axis: trains of motor
// pulses with selectable on/off durations and drive waveform, plus a
// table-driven model of how reliably a user identifies the intended
// direction. The perceiver is table-driven on purpose: identification rates
// are an empirical property of the stimulus, not something the torque
// physics alone predicts.

#include <array>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "stylusfx/core.hpp"
#include "stylusfx/rng.hpp"

namespace stylusfx {

enum class RotationDirection : int { CW = 0, CCW = 1 };

inline const char* to_string(RotationDirection d) { return d == RotationDirection::CW ? "cw" : "ccw"; }

inline RotationDirection opposite(RotationDirection d) {
  return d == RotationDirection::CW ? RotationDirection::CCW : RotationDirection::CW;
}

inline int polarity_of(RotationDirection d) { return d == RotationDirection::CW ? +1 : -1; }

/// Sign of the casing torque felt during on-time for a commanded direction.
/// The casing reaction opposes the accelerating rotor, so it is the negative
/// of the drive polarity.
inline int intended_casing_sign(RotationDirection d) { return -polarity_of(d); }

struct RotationSpec {
  RotationDirection direction = RotationDirection::CW;
  double on_ms = 200.0;
  double off_ms = 200.0;
  WaveformShape shape = WaveformShape::Square;
  int pulse_count = 3;
  double amplitude = 1.0;
};

inline void validate_spec(const RotationSpec& s) {
  if (!(s.on_ms > 0.0)) throw error("invalid rotation spec: on must be > 0");
  if (s.off_ms < 0.0) throw error("invalid rotation spec: off must be >= 0");
  if (s.pulse_count < 1) throw error("invalid rotation spec: pulse count must be >= 1");
  if (!(s.amplitude > 0.0) || s.amplitude > 1.0)
    throw error("invalid rotation spec: amplitude must be in (0, 1]");
}

/// Motor pulse k occupies [k*(on+off), k*(on+off)+on); polarity +1 for CW,
/// -1 for CCW. Total duration includes the trailing off-time.
inline ActuationTimeline schedule_rotation(const RotationSpec& spec) {
  validate_spec(spec);
  double on = snap_to_tick(spec.on_ms);
  double off = snap_to_tick(spec.off_ms);
  ActuationTimeline tl;
  for (int k = 0; k < spec.pulse_count; ++k) {
    tl.channel(Channel::Motor)
        .push_back({k * (on + off), on, spec.amplitude, spec.shape, polarity_of(spec.direction)});
  }
  tl.total_duration_ms = spec.pulse_count * (on + off);
  return tl;
}

/// Correct-identification probability per waveform shape on the
/// on x off grid {25,75,175,275,375,575}^2 ms. Probabilities live in
/// [0.5, 1], are non-decreasing in both durations, and are identical for CW
/// and CCW (direction symmetry is a model property).
class RotationPerceptTable {
 public:
  static const std::vector<double>& grid() {
    static const std::vector<double> g{25.0, 75.0, 175.0, 275.0, 375.0, 575.0};
    return g;
  }

  RotationPerceptTable() {
    for (auto& m : shapes_) m.assign(grid().size() * grid().size(), 0.5);
  }

  double cell(WaveformShape s, size_t on_index, size_t off_index) const {
    return shapes_[static_cast<size_t>(s)].at(on_index * grid().size() + off_index);
  }

  void set_cell(WaveformShape s, size_t on_index, size_t off_index, double p) {
    shapes_[static_cast<size_t>(s)].at(on_index * grid().size() + off_index) = p;
  }

  double interpolate(double on_ms, double off_ms, WaveformShape s) const {
    auto [i0, i1, u] = bracket(on_ms);
    auto [j0, j1, v] = bracket(off_ms);
    double a = cell(s, i0, j0) * (1 - v) + cell(s, i0, j1) * v;
    double b = cell(s, i1, j0) * (1 - v) + cell(s, i1, j1) * v;
    return a * (1 - u) + b * u;
  }

  /// Range and monotonicity checks; rejects non-monotone grids.
  void validate() const {
    size_t n = grid().size();
    for (int s = 0; s < 3; ++s) {
      WaveformShape sh = static_cast<WaveformShape>(s);
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
          double p = cell(sh, i, j);
          if (p < 0.5 - 1e-12 || p > 1.0 + 1e-12)
            throw error("invalid rotation table: probability out of [0.5, 1]");
          if (i > 0 && p < cell(sh, i - 1, j) - 1e-12)
            throw error("invalid rotation table: not monotone in on-time");
          if (j > 0 && p < cell(sh, i, j - 1) - 1e-12)
            throw error("invalid rotation table: not monotone in off-time");
        }
    }
  }

  /// Defaults: a smooth monotone square-wave surface from 0.55 at (25,25) to
  /// 0.95 at (575,575), with constant per-shape offsets (-0.12 increasing,
  /// +0.055 decreasing, clamped to [0.5, 1]) chosen so that bilinear
  /// interpolation at (200,200) lands exactly on 0.90 / 0.78 / 0.955.
  static RotationPerceptTable default_table() {
    // clang-format off
    static const double square[6][6] = {
        {0.550, 0.620, 0.680, 0.720, 0.750, 0.780},
        {0.620, 0.720, 0.800, 0.840, 0.860, 0.880},
        {0.680, 0.800, 0.890, 0.910, 0.920, 0.930},
        {0.720, 0.840, 0.910, 0.930, 0.935, 0.940},
        {0.750, 0.860, 0.920, 0.935, 0.940, 0.945},
        {0.780, 0.880, 0.930, 0.940, 0.945, 0.950},
    };
    // clang-format on
    RotationPerceptTable t;
    size_t n = grid().size();
    auto clamp = [](double p) { return std::min(1.0, std::max(0.5, p)); };
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        double base = square[i][j];
        t.set_cell(WaveformShape::Square, i, j, base);
        t.set_cell(WaveformShape::IncreasingRamp, i, j, clamp(base - 0.12));
        t.set_cell(WaveformShape::DecreasingRamp, i, j, clamp(base + 0.055));
      }
    t.validate();
    return t;
  }

  /// CSV loader, columns `shape,on_ms,off_ms,p_correct`; expects one row per
  /// shape and grid cell (108 rows).
  static RotationPerceptTable load_csv(const std::string& path) {
    auto text = io::read_file(path);
    auto lines = io::split(text, '\n');
    if (lines.empty() || io::trim(lines[0]) != "shape,on_ms,off_ms,p_correct")
      throw error("invalid rotation table: bad header in " + path);
    RotationPerceptTable t;
    size_t n = grid().size();
    std::array<std::vector<bool>, 3> seen;
    for (auto& s : seen) s.assign(n * n, false);
    for (size_t li = 1; li < lines.size(); ++li) {
      std::string line = io::trim(lines[li]);
      if (line.empty()) continue;
      auto cols = io::split(line, ',');
      if (cols.size() != 4) throw error("invalid rotation table: wrong column count");
      WaveformShape sh = parse_shape(io::trim(cols[0]));
      size_t i = index_of(io::parse_double(cols[1], "on_ms"));
      size_t j = index_of(io::parse_double(cols[2], "off_ms"));
      auto& sv = seen[static_cast<size_t>(sh)];
      if (sv[i * n + j]) throw error("invalid rotation table: duplicate cell");
      sv[i * n + j] = true;
      t.set_cell(sh, i, j, io::parse_double(cols[3], "p_correct"));
    }
    for (const auto& sv : seen)
      for (bool s : sv)
        if (!s) throw error("invalid rotation table: missing grid cell");
    t.validate();
    return t;
  }

 private:
  static size_t index_of(double v) {
    const auto& g = grid();
    for (size_t i = 0; i < g.size(); ++i)
      if (std::abs(g[i] - v) < 1e-9) return i;
    throw error("invalid rotation table: value off the grid");
  }

  static std::tuple<size_t, size_t, double> bracket(double v) {
    const auto& g = grid();
    if (v <= g.front()) return {0, 0, 0.0};
    if (v >= g.back()) return {g.size() - 1, g.size() - 1, 0.0};
    size_t i = 0;
    while (g[i + 1] < v) ++i;
    return {i, i + 1, (v - g[i]) / (g[i + 1] - g[i])};
  }

  std::array<std::vector<double>, 3> shapes_;
};

/// Probability that a user identifies the intended direction for the given
/// pulse parameters; bilinear within the grid, clamped to the hull.
inline double predict_direction_accuracy(double on_ms, double off_ms, WaveformShape shape,
                                         const RotationPerceptTable& table) {
  if (!(on_ms > 0.0) || !(off_ms > 0.0))
    throw error("predict_direction_accuracy: durations must be > 0");
  return table.interpolate(on_ms, off_ms, shape);
}

/// Deterministic core of the simulated subject: correct identification iff
/// the uniform draw u falls below the table probability. Symmetric in
/// CW/CCW by construction.
inline RotationDirection perceive_rotation_at(const RotationSpec& spec,
                                              const RotationPerceptTable& table, double u) {
  validate_spec(spec);
  double p = predict_direction_accuracy(spec.on_ms, std::max(spec.off_ms, 1e-9), spec.shape, table);
  return u < p ? spec.direction : opposite(spec.direction);
}

/// Simulated subject: reports the intended direction with the table
/// probability, the opposite otherwise.
inline RotationDirection perceive_rotation(const RotationSpec& spec, const RotationPerceptTable& table,
                                           Rng& rng) {
  return perceive_rotation_at(spec, table, rng.uniform());
}

}  // namespace stylusfx
