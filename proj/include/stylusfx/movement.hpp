#pragma once
// Apparent-motion effect along the stylus body: two vibration actuators fired
// with a controlled inter-stimulus onset interval (ISOI). Also hosts the
// percept-region model that predicts whether a (duration, ISOI) pair feels
// like a single stationary buzz, two discrete taps, or continuous travel.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stylusfx/core.hpp"
#include "stylusfx/rng.hpp"

namespace stylusfx {

enum class MovementDirection : int { TipToEnd = 0, EndToTip = 1 };

inline const char* to_string(MovementDirection d) {
  return d == MovementDirection::TipToEnd ? "tip_to_end" : "end_to_tip";
}

struct MovementSpec {
  MovementDirection direction = MovementDirection::TipToEnd;
  double d_ms = 100.0;     // stimulus duration of each vibe burst
  double isoi_ms = 50.0;   // onset delay of the trailing burst
  double amplitude = 1.0;  // (0, 1]
  int repetitions = 1;
  double inter_rep_gap_ms = 500.0;
};

inline void validate_spec(const MovementSpec& s) {
  if (!(s.d_ms > 0.0)) throw error("invalid movement spec: d must be > 0");
  if (s.isoi_ms < 0.0) throw error("invalid movement spec: isoi must be >= 0");
  if (!(s.amplitude > 0.0) || s.amplitude > 1.0)
    throw error("invalid movement spec: amplitude must be in (0, 1]");
  if (s.repetitions < 1) throw error("invalid movement spec: repetitions must be >= 1");
  if (s.inter_rep_gap_ms < 0.0) throw error("invalid movement spec: inter_rep_gap must be >= 0");
}

/// Leading channel pulses at [0, d), trailing channel at [isoi, isoi + d);
/// repetitions are offset by max(d, isoi + d) + gap. Boundaries snap to the
/// 0.1 ms grid. The motor channel stays empty.
inline ActuationTimeline schedule_movement(const MovementSpec& spec) {
  validate_spec(spec);
  double d = snap_to_tick(spec.d_ms);
  double isoi = snap_to_tick(spec.isoi_ms);
  double gap = snap_to_tick(spec.inter_rep_gap_ms);
  Channel leading = spec.direction == MovementDirection::TipToEnd ? Channel::VibeTip : Channel::VibeEnd;
  Channel trailing = spec.direction == MovementDirection::TipToEnd ? Channel::VibeEnd : Channel::VibeTip;

  double period = std::max(d, isoi + d) + gap;
  ActuationTimeline tl;
  for (int r = 0; r < spec.repetitions; ++r) {
    double base = r * period;
    tl.channel(leading).push_back({base, d, spec.amplitude, WaveformShape::Square, +1});
    tl.channel(trailing).push_back({base + isoi, d, spec.amplitude, WaveformShape::Square, +1});
  }
  tl.total_duration_ms = (spec.repetitions - 1) * period + isoi + d;
  return tl;
}

enum class PerceptLabel : int { SingleStationary = 0, Discrete = 1, Continuous = 2 };

inline const char* to_string(PerceptLabel l) {
  switch (l) {
    case PerceptLabel::SingleStationary: return "single_stationary";
    case PerceptLabel::Discrete: return "discrete";
    case PerceptLabel::Continuous: return "continuous";
  }
  throw error("invalid percept label");
}

using LabelProbabilities = std::array<double, 3>;  // indexed by PerceptLabel

/// Label-probability triples on the (duration, ISOI) grid
/// {50,100,200,300,400} x {50,100,200,300,400} ms, bilinearly interpolated
/// and clamped to the hull. Direction does not enter the model.
class PerceptRegionTable {
 public:
  static const std::vector<double>& grid() {
    static const std::vector<double> g{50.0, 100.0, 200.0, 300.0, 400.0};
    return g;
  }

  PerceptRegionTable() : cells_(grid().size() * grid().size(), {1.0, 0.0, 0.0}) {}

  const LabelProbabilities& cell(size_t d_index, size_t isoi_index) const {
    return cells_.at(d_index * grid().size() + isoi_index);
  }

  void set_cell(size_t d_index, size_t isoi_index, const LabelProbabilities& p) {
    cells_.at(d_index * grid().size() + isoi_index) = p;
  }

  /// Bilinear interpolation of the probability triple at (d, isoi), clamped
  /// to the grid hull. Convex combination, so the result still sums to 1.
  LabelProbabilities interpolate(double d_ms, double isoi_ms) const {
    auto [i0, i1, td] = bracket(d_ms);
    auto [j0, j1, ti] = bracket(isoi_ms);
    LabelProbabilities out{};
    for (int l = 0; l < 3; ++l) {
      double a = cell(i0, j0)[l] * (1 - ti) + cell(i0, j1)[l] * ti;
      double b = cell(i1, j0)[l] * (1 - ti) + cell(i1, j1)[l] * ti;
      out[l] = a * (1 - td) + b * td;
    }
    return out;
  }

  void validate() const {
    for (size_t i = 0; i < grid().size(); ++i)
      for (size_t j = 0; j < grid().size(); ++j) {
        const auto& p = cell(i, j);
        double sum = 0.0;
        for (double v : p) {
          if (v < 0.0 || v > 1.0) throw error("invalid percept table: probability out of [0, 1]");
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
          throw error("invalid percept table: cell probabilities must sum to 1");
      }
  }

  /// Region layout digitized from the three observed percept regions:
  /// continuous for d >= 100 ms and ISOI in [50, 200]; discrete for
  /// ISOI >= 300 and along the short-duration edge; single stationary in the
  /// small-d / small-ISOI corner. Dominant probability is 0.8 inside a
  /// region and softens linearly toward 0.5 at region boundaries.
  static PerceptRegionTable default_table() {
    const auto& g = grid();
    size_t n = g.size();
    auto dominant = [&](size_t i, size_t j) {
      double d = g[i], isoi = g[j];
      if (d >= 100.0 && isoi >= 50.0 && isoi <= 200.0) return PerceptLabel::Continuous;
      if (isoi >= 300.0 || (d <= 50.0 && isoi >= 100.0)) return PerceptLabel::Discrete;
      return PerceptLabel::SingleStationary;
    };
    PerceptRegionTable t;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        PerceptLabel dom = dominant(i, j);
        int same = 0, neighbors = 0;
        auto look = [&](int di, int dj) {
          int ni = static_cast<int>(i) + di, nj = static_cast<int>(j) + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<int>(n) || nj >= static_cast<int>(n)) return;
          ++neighbors;
          if (dominant(static_cast<size_t>(ni), static_cast<size_t>(nj)) == dom) ++same;
        };
        look(-1, 0);
        look(+1, 0);
        look(0, -1);
        look(0, +1);
        double p_dom = 0.5 + 0.3 * (neighbors > 0 ? static_cast<double>(same) / neighbors : 1.0);
        LabelProbabilities p{};
        for (int l = 0; l < 3; ++l)
          p[l] = (l == static_cast<int>(dom)) ? p_dom : (1.0 - p_dom) / 2.0;
        t.set_cell(i, j, p);
      }
    }
    t.validate();
    return t;
  }

  /// CSV loader, columns `d_ms,isoi_ms,p_single,p_discrete,p_continuous`;
  /// expects exactly one row per grid cell (25 rows).
  static PerceptRegionTable load_csv(const std::string& path) {
    auto text = io::read_file(path);
    auto lines = io::split(text, '\n');
    if (lines.empty() || io::trim(lines[0]) != "d_ms,isoi_ms,p_single,p_discrete,p_continuous")
      throw error("invalid percept table: bad header in " + path);
    PerceptRegionTable t;
    std::vector<bool> seen(grid().size() * grid().size(), false);
    for (size_t li = 1; li < lines.size(); ++li) {
      std::string line = io::trim(lines[li]);
      if (line.empty()) continue;
      auto cols = io::split(line, ',');
      if (cols.size() != 5) throw error("invalid percept table: wrong column count");
      double d = io::parse_double(cols[0], "d_ms");
      double isoi = io::parse_double(cols[1], "isoi_ms");
      size_t i = index_of(d), j = index_of(isoi);
      if (seen[i * grid().size() + j]) throw error("invalid percept table: duplicate cell");
      seen[i * grid().size() + j] = true;
      t.set_cell(i, j, {io::parse_double(cols[2], "p_single"), io::parse_double(cols[3], "p_discrete"),
                        io::parse_double(cols[4], "p_continuous")});
    }
    for (bool s : seen)
      if (!s) throw error("invalid percept table: missing grid cell");
    t.validate();
    return t;
  }

 private:
  static size_t index_of(double v) {
    const auto& g = grid();
    for (size_t i = 0; i < g.size(); ++i)
      if (std::abs(g[i] - v) < 1e-9) return i;
    throw error("invalid percept table: value off the grid");
  }

  // Returns (lower index, upper index, interpolation weight) for a clamped coordinate.
  static std::tuple<size_t, size_t, double> bracket(double v) {
    const auto& g = grid();
    if (v <= g.front()) return {0, 0, 0.0};
    if (v >= g.back()) return {g.size() - 1, g.size() - 1, 0.0};
    size_t i = 0;
    while (g[i + 1] < v) ++i;
    return {i, i + 1, (v - g[i]) / (g[i + 1] - g[i])};
  }

  std::vector<LabelProbabilities> cells_;
};

/// Dominant label plus the interpolated probability triple; ties resolve to
/// the earlier label in the order single < discrete < continuous.
inline std::pair<PerceptLabel, LabelProbabilities> classify_percept(double d_ms, double isoi_ms,
                                                                    const PerceptRegionTable& table) {
  if (!(d_ms > 0.0)) throw error("classify_percept: d must be > 0");
  if (isoi_ms < 0.0) throw error("classify_percept: isoi must be >= 0");
  LabelProbabilities p = table.interpolate(d_ms, isoi_ms);
  int best = 0;
  for (int l = 1; l < 3; ++l)
    if (p[l] > p[best]) best = l;
  return {static_cast<PerceptLabel>(best), p};
}

/// Inverse-CDF draw from a probability triple (label order is the CDF order).
inline PerceptLabel sample_percept_label(const LabelProbabilities& p, double u) {
  double c = 0.0;
  for (int l = 0; l < 2; ++l) {
    c += p[l];
    if (u < c) return static_cast<PerceptLabel>(l);
  }
  return PerceptLabel::Continuous;
}

/// Simulated subject: one percept draw from the classifier distribution.
inline PerceptLabel perceive_movement(double d_ms, double isoi_ms, const PerceptRegionTable& table,
                                      Rng& rng) {
  auto [label, p] = classify_percept(d_ms, isoi_ms, table);
  (void)label;
  return sample_percept_label(p, rng.uniform());
}

}  // namespace stylusfx
