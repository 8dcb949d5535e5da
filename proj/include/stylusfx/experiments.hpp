#pragma once
// Simulated-perceiver reproduction of the psychophysics experiments and the
// Spinning Tops game study.
//
// Every trial outcome is drawn from a counter-based stream keyed on
// (seed, experiment, participant, stratum), never from shared sequential
// state, so results are reproducible byte-for-byte and independent of
// evaluation order. Within a participant the repetition draws are
// stratified over [0,1), shared across cells and across the two mirrored
// stimulus directions (the perceiver models are direction-blind). This
// keeps pooled cell estimates tight around the model probabilities and
// makes direction symmetry and table monotonicity carry through to pooled
// results instead of drowning in binomial noise. Per-participant variation
// enters as a single probability offset per perceiver table (antithetic
// across participant pairs), which preserves each table's dominance and
// monotonicity structure.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stylusfx/core.hpp"
#include "stylusfx/io.hpp"
#include "stylusfx/movement.hpp"
#include "stylusfx/rng.hpp"
#include "stylusfx/rotation.hpp"

namespace stylusfx {

/// Apparent per-frame rotation of a pattern with the given rotational
/// symmetry: the visual system folds the true step into
/// (-symmetry/2, +symmetry/2). Exactly half the symmetry angle is
/// direction-ambiguous (the pattern looks stationary) and returns nullopt.
inline std::optional<double> apparent_step(double step_deg, double symmetry_deg = 180.0) {
  if (!(symmetry_deg > 0.0)) throw error("apparent_step: symmetry must be > 0");
  if (step_deg < 0.0) throw error("apparent_step: step must be >= 0");
  double v = std::fmod(step_deg + symmetry_deg / 2.0, symmetry_deg) - symmetry_deg / 2.0;
  if (std::abs(std::abs(v) - symmetry_deg / 2.0) < 1e-9) return std::nullopt;
  return v;
}

struct HarnessConfig {
  double sigma_subj = 0.05;        // per-participant probability offset scale
  double p_vis = 0.9;              // probability of following vision under cue conflict
  double oh_direction_target = 0.81;
  double oh_box_target = 0.65;
  double vh_lapse = 0.02;          // slip rate when visual + haptic cues agree
  int repetitions = 10;            // per cell per direction
  int tops_trials_per_condition = 20;
  uint64_t seed = 0;               // default stream seed; CLI flags override
  std::string movement_table_path;  // empty = built-in default table
  std::string rotation_table_path;

  static HarnessConfig from_key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
    HarnessConfig c;
    for (const auto& [key, value] : kv) {
      if (key == "sigma_subj") c.sigma_subj = io::parse_double(value, key);
      else if (key == "p_vis") c.p_vis = io::parse_double(value, key);
      else if (key == "oh_direction_target") c.oh_direction_target = io::parse_double(value, key);
      else if (key == "oh_box_target") c.oh_box_target = io::parse_double(value, key);
      else if (key == "vh_lapse") c.vh_lapse = io::parse_double(value, key);
      else if (key == "repetitions") c.repetitions = static_cast<int>(io::parse_double(value, key));
      else if (key == "tops_trials") c.tops_trials_per_condition = static_cast<int>(io::parse_double(value, key));
      else if (key == "seed") c.seed = static_cast<uint64_t>(io::parse_double(value, key));
      else if (key == "movement_table") c.movement_table_path = value;
      else if (key == "rotation_table") c.rotation_table_path = value;
      else throw error("unknown config key: " + key);
    }
    c.validate();
    return c;
  }

  static HarnessConfig from_file(const std::string& path) {
    return from_key_values(io::parse_key_values(io::read_file(path)));
  }

  /// Config named by HAPTI_CONFIG, or defaults when the variable is unset.
  static HarnessConfig from_env() {
    const char* path = std::getenv("HAPTI_CONFIG");
    if (path && *path) return from_file(path);
    return HarnessConfig{};
  }

  void validate() const {
    if (sigma_subj < 0.0) throw error("config: sigma_subj must be >= 0");
    if (p_vis < 0.0 || p_vis > 1.0) throw error("config: p_vis must be in [0, 1]");
    if (repetitions < 1) throw error("config: repetitions must be >= 1");
    if (tops_trials_per_condition < 4 || tops_trials_per_condition % 4 != 0)
      throw error("config: tops_trials must be a positive multiple of 4");
  }
};

struct Tables {
  PerceptRegionTable movement;
  RotationPerceptTable rotation;
};

inline Tables load_tables(const HarnessConfig& cfg) {
  Tables t;
  t.movement = cfg.movement_table_path.empty() ? PerceptRegionTable::default_table()
                                               : PerceptRegionTable::load_csv(cfg.movement_table_path);
  t.rotation = cfg.rotation_table_path.empty() ? RotationPerceptTable::default_table()
                                               : RotationPerceptTable::load_csv(cfg.rotation_table_path);
  return t;
}

/// A calibrated stochastic subject: the base perceiver tables shifted by a
/// per-participant offset (clamped back to each table's valid range).
/// Offsets are antithetic across consecutive participant pairs so cohort
/// means stay centered on the base tables.
struct ParticipantModel {
  int id = 0;
  uint64_t seed = 0;
  double table_shift = 0.0;
  PerceptRegionTable movement_table;
  RotationPerceptTable rotation_table;
};

inline ParticipantModel make_participant(int id, uint64_t exp_seed, double sigma, const Tables& base) {
  ParticipantModel m;
  m.id = id;
  m.seed = keyed_rng(exp_seed, {hash_tag("participant"), static_cast<uint64_t>(id)}).next_u64();
  double z = keyed_rng(exp_seed, {hash_tag("participant_noise"), static_cast<uint64_t>(id / 2)}).normal();
  m.table_shift = sigma * (id % 2 == 0 ? z : -z);

  const auto& mg = PerceptRegionTable::grid();
  m.movement_table = base.movement;
  for (size_t i = 0; i < mg.size(); ++i)
    for (size_t j = 0; j < mg.size(); ++j) {
      LabelProbabilities p = base.movement.cell(i, j);
      int dom = 0;
      for (int l = 1; l < 3; ++l)
        if (p[l] > p[dom]) dom = l;
      // Shift the dominant probability; keep it strictly above 1/3 so the
      // cell's dominant label survives the perturbation.
      double pd = std::min(0.98, std::max(0.34, p[dom] + m.table_shift));
      double rest = 1.0 - p[dom];
      LabelProbabilities q{};
      for (int l = 0; l < 3; ++l)
        q[l] = (l == dom) ? pd : (rest > 1e-12 ? p[l] * (1.0 - pd) / rest : (1.0 - pd) / 2.0);
      m.movement_table.set_cell(i, j, q);
    }

  const auto& rg = RotationPerceptTable::grid();
  m.rotation_table = base.rotation;
  for (int s = 0; s < 3; ++s)
    for (size_t i = 0; i < rg.size(); ++i)
      for (size_t j = 0; j < rg.size(); ++j) {
        double p = base.rotation.cell(static_cast<WaveformShape>(s), i, j);
        m.rotation_table.set_cell(static_cast<WaveformShape>(s), i, j,
                                  std::min(1.0, std::max(0.5, p + m.table_shift)));
      }
  return m;
}

struct Trial {
  std::vector<int> levels;
  int rep = 0;
};

/// Full factorial x repetitions, shuffled, split across sessions.
struct TrialSchedule {
  std::vector<Trial> trials;
  int sessions = 1;

  static TrialSchedule factorial(const std::vector<int>& level_counts, int reps, int sessions,
                                 Rng& rng) {
    TrialSchedule s;
    s.sessions = sessions;
    std::vector<int> combo(level_counts.size(), 0);
    for (;;) {
      for (int r = 0; r < reps; ++r) s.trials.push_back({combo, r});
      size_t d = 0;
      while (d < combo.size() && ++combo[d] == level_counts[d]) combo[d++] = 0;
      if (d == combo.size()) break;
    }
    rng.shuffle(s.trials);
    return s;
  }

  size_t session_size() const { return trials.size() / static_cast<size_t>(sessions); }
};

struct SummaryRow {
  std::string condition;
  double mean = 0.0;
  double sd = 0.0;
  int n = 0;
};

inline SummaryRow summarize(const std::string& name, const std::vector<double>& values) {
  SummaryRow r;
  r.condition = name;
  r.n = static_cast<int>(values.size());
  for (double v : values) r.mean += v;
  if (r.n > 0) r.mean /= r.n;
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (r.n - 1));
  }
  return r;
}

/// Per-cell response percentages (one value per participant) plus summary
/// rows. Cells are keyed by string tuples so every experiment can reuse the
/// same CSV writers.
struct ExperimentResult {
  std::vector<std::string> cell_columns;
  struct Cell {
    std::vector<std::string> key;
    std::vector<double> per_participant;  // percent
  };
  std::vector<Cell> cells;
  std::vector<SummaryRow> summary;
  int participants = 0;

  const Cell* find(const std::vector<std::string>& key) const {
    for (const auto& c : cells)
      if (c.key == key) return &c;
    return nullptr;
  }

  double pooled(const std::vector<std::string>& key) const {
    const Cell* c = find(key);
    if (!c) throw error("no such result cell");
    double s = 0.0;
    for (double v : c->per_participant) s += v;
    return c->per_participant.empty() ? 0.0 : s / static_cast<double>(c->per_participant.size());
  }

  const SummaryRow& summary_row(const std::string& condition) const {
    for (const auto& r : summary)
      if (r.condition == condition) return r;
    throw error("no such summary row: " + condition);
  }

  /// `cell_keys...,participant_id,percent`; each cell also gets a pooled row.
  void write_cells_csv(std::ostream& os) const {
    for (size_t i = 0; i < cell_columns.size(); ++i) os << cell_columns[i] << ',';
    os << "participant_id,percent\n";
    for (const auto& c : cells) {
      for (int p = 0; p < participants; ++p) {
        for (const auto& k : c.key) os << k << ',';
        os << p << ',' << io::fixed(c.per_participant[static_cast<size_t>(p)], 4) << '\n';
      }
      double pool = 0.0;
      for (double v : c.per_participant) pool += v;
      if (!c.per_participant.empty()) pool /= static_cast<double>(c.per_participant.size());
      for (const auto& k : c.key) os << k << ',';
      os << "pooled," << io::fixed(pool, 4) << '\n';
    }
  }

  /// `condition,mean,sd,n`
  void write_summary_csv(std::ostream& os) const {
    os << "condition,mean,sd,n\n";
    for (const auto& r : summary)
      os << r.condition << ',' << io::fixed(r.mean, 4) << ',' << io::fixed(r.sd, 4) << ',' << r.n
         << '\n';
  }
};

namespace detail {

// Stratified repetition draws for one participant: repetition r draws from
// stratum r of [0,1). The perceiver models are direction-blind, so the two
// mirrored presentations of a repetition share one draw; per-direction
// response percentages then agree exactly instead of merely in expectation.
// Within each stratum the jitter is Latin-hypercube distributed across the
// cohort (a keyed permutation assigns each participant one sub-stratum), so
// pooled counts land on a full participants-by-repetitions lattice and the
// pooled cell percentages track the cohort-mean probabilities to about one
// trial, while each participant's own draws stay marginally uniform.
class StratifiedDraws {
 public:
  StratifiedDraws(uint64_t seed, uint64_t tag, int participant, int reps, int cohort) : reps_(reps) {
    v_.resize(static_cast<size_t>(reps));
    std::vector<int> slots(static_cast<size_t>(cohort));
    for (int r = 0; r < reps; ++r) {
      for (int j = 0; j < cohort; ++j) slots[static_cast<size_t>(j)] = j;
      Rng perm = keyed_rng(seed, {tag, hash_tag("lhs"), static_cast<uint64_t>(r)});
      perm.shuffle(slots);
      double w =
          keyed_rng(seed, {tag, hash_tag("u"), static_cast<uint64_t>(participant), static_cast<uint64_t>(r)})
              .uniform();
      v_[static_cast<size_t>(r)] = (slots[static_cast<size_t>(participant)] + w) / cohort;
    }
  }

  double u(int rep) const { return (rep + v_[static_cast<size_t>(rep)]) / reps_; }

 private:
  int reps_;
  std::vector<double> v_;
};

// Stratified draws over a flat trial list, in shuffled stratum order.
class TrialDraws {
 public:
  TrialDraws(uint64_t seed, uint64_t tag, int participant, int trials) : n_(trials) {
    order_.resize(static_cast<size_t>(trials));
    for (int i = 0; i < trials; ++i) order_[static_cast<size_t>(i)] = i;
    Rng perm = keyed_rng(seed, {tag, hash_tag("perm"), static_cast<uint64_t>(participant)});
    perm.shuffle(order_);
    v_.resize(static_cast<size_t>(trials));
    for (int t = 0; t < trials; ++t)
      v_[static_cast<size_t>(t)] =
          keyed_rng(seed, {tag, hash_tag("u"), static_cast<uint64_t>(participant), static_cast<uint64_t>(t)})
              .uniform();
  }

  double u(int trial) const {
    return (order_[static_cast<size_t>(trial)] + v_[static_cast<size_t>(trial)]) / n_;
  }

 private:
  int n_;
  std::vector<int> order_;
  std::vector<double> v_;
};

inline double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace detail

/// Experiment: movement percept classification over the
/// {50,100,200,300,400}^2 ms grid, both directions, cfg.repetitions trials
/// per cell per direction per participant.
inline ExperimentResult run_experiment1(int participants, const Tables& tables,
                                        const HarnessConfig& cfg, uint64_t seed) {
  const auto& g = PerceptRegionTable::grid();
  const int n_cells = static_cast<int>(g.size() * g.size());
  const int R = cfg.repetitions;

  ExperimentResult res;
  res.participants = participants;
  res.cell_columns = {"d_ms", "isoi_ms", "direction", "label"};

  // counts[participant][cell][direction][label]
  std::vector<std::array<std::array<int, 3>, 2>> zero(static_cast<size_t>(n_cells));
  std::vector<decltype(zero)> counts(static_cast<size_t>(participants), zero);
  std::vector<double> agreement(static_cast<size_t>(participants), 0.0);
  std::vector<std::array<double, 3>> label_share(static_cast<size_t>(participants), {0, 0, 0});

  for (int j = 0; j < participants; ++j) {
    ParticipantModel model = make_participant(j, seed, cfg.sigma_subj, tables);
    detail::StratifiedDraws draws(seed, hash_tag("exp1"), j, R, participants);
    Rng sched_rng = keyed_rng(seed, {hash_tag("exp1_sched"), static_cast<uint64_t>(j)});
    TrialSchedule schedule = TrialSchedule::factorial(
        {static_cast<int>(g.size()), static_cast<int>(g.size()), 2}, R, 2, sched_rng);

    for (const Trial& trial : schedule.trials) {
      int a = trial.levels[0], b = trial.levels[1], dir = trial.levels[2];
      double u = draws.u(trial.rep);
      LabelProbabilities p = model.movement_table.interpolate(g[static_cast<size_t>(a)],
                                                              g[static_cast<size_t>(b)]);
      PerceptLabel label = sample_percept_label(p, u);
      int cell = a * static_cast<int>(g.size()) + b;
      counts[static_cast<size_t>(j)][static_cast<size_t>(cell)][static_cast<size_t>(dir)]
            [static_cast<size_t>(label)]++;
      label_share[static_cast<size_t>(j)][static_cast<size_t>(label)] += 1.0;
      auto [base_dom, base_p] =
          classify_percept(g[static_cast<size_t>(a)], g[static_cast<size_t>(b)], tables.movement);
      (void)base_p;
      if (label == base_dom) agreement[static_cast<size_t>(j)] += 1.0;
    }
    double total = static_cast<double>(schedule.trials.size());
    agreement[static_cast<size_t>(j)] *= 100.0 / total;
    for (auto& v : label_share[static_cast<size_t>(j)]) v *= 100.0 / total;
  }

  static const char* dir_names[] = {"tip_to_end", "end_to_tip", "pooled"};
  for (size_t a = 0; a < g.size(); ++a)
    for (size_t b = 0; b < g.size(); ++b) {
      int cell = static_cast<int>(a * g.size() + b);
      for (int dir = 0; dir < 3; ++dir)
        for (int l = 0; l < 3; ++l) {
          ExperimentResult::Cell c;
          c.key = {io::fixed(g[a], 0), io::fixed(g[b], 0), dir_names[dir],
                   to_string(static_cast<PerceptLabel>(l))};
          for (int j = 0; j < participants; ++j) {
            const auto& cc = counts[static_cast<size_t>(j)][static_cast<size_t>(cell)];
            double num, den;
            if (dir < 2) {
              num = cc[static_cast<size_t>(dir)][static_cast<size_t>(l)];
              den = R;
            } else {
              num = cc[0][static_cast<size_t>(l)] + cc[1][static_cast<size_t>(l)];
              den = 2.0 * R;
            }
            c.per_participant.push_back(100.0 * num / den);
          }
          res.cells.push_back(std::move(c));
        }
    }

  for (int l = 0; l < 3; ++l) {
    std::vector<double> vals;
    for (int j = 0; j < participants; ++j)
      vals.push_back(label_share[static_cast<size_t>(j)][static_cast<size_t>(l)]);
    res.summary.push_back(summarize(to_string(static_cast<PerceptLabel>(l)), vals));
  }
  res.summary.push_back(summarize("dominant_agreement", agreement));
  return res;
}

/// Experiment: rotational torque direction identification over the
/// {25,75,175,275,375,575}^2 ms on/off grid with square pulses.
inline ExperimentResult run_experiment2(int participants, const Tables& tables,
                                        const HarnessConfig& cfg, uint64_t seed) {
  const auto& g = RotationPerceptTable::grid();
  const int n_cells = static_cast<int>(g.size() * g.size());
  const int R = cfg.repetitions;

  ExperimentResult res;
  res.participants = participants;
  res.cell_columns = {"on_ms", "off_ms", "direction"};

  std::vector<std::array<int, 2>> zero(static_cast<size_t>(n_cells), {0, 0});
  std::vector<decltype(zero)> correct(static_cast<size_t>(participants), zero);
  std::vector<double> overall(static_cast<size_t>(participants), 0.0);
  std::vector<std::array<double, 2>> per_dir(static_cast<size_t>(participants), {0.0, 0.0});

  for (int j = 0; j < participants; ++j) {
    ParticipantModel model = make_participant(j, seed, cfg.sigma_subj, tables);
    detail::StratifiedDraws draws(seed, hash_tag("exp2"), j, R, participants);
    Rng sched_rng = keyed_rng(seed, {hash_tag("exp2_sched"), static_cast<uint64_t>(j)});
    TrialSchedule schedule = TrialSchedule::factorial(
        {static_cast<int>(g.size()), static_cast<int>(g.size()), 2}, R, 3, sched_rng);

    for (const Trial& trial : schedule.trials) {
      int a = trial.levels[0], b = trial.levels[1], dir = trial.levels[2];
      RotationSpec spec;
      spec.direction = dir == 0 ? RotationDirection::CW : RotationDirection::CCW;
      spec.on_ms = g[static_cast<size_t>(a)];
      spec.off_ms = g[static_cast<size_t>(b)];
      spec.shape = WaveformShape::Square;
      RotationDirection answer =
          perceive_rotation_at(spec, model.rotation_table, draws.u(trial.rep));
      if (answer == spec.direction) {
        correct[static_cast<size_t>(j)][static_cast<size_t>(a * static_cast<int>(g.size()) + b)]
               [static_cast<size_t>(dir)]++;
        overall[static_cast<size_t>(j)] += 1.0;
        per_dir[static_cast<size_t>(j)][static_cast<size_t>(dir)] += 1.0;
      }
    }
    double total = static_cast<double>(schedule.trials.size());
    overall[static_cast<size_t>(j)] *= 100.0 / total;
    for (auto& v : per_dir[static_cast<size_t>(j)]) v *= 100.0 / (total / 2.0);
  }

  static const char* dir_names[] = {"cw", "ccw", "pooled"};
  for (size_t a = 0; a < g.size(); ++a)
    for (size_t b = 0; b < g.size(); ++b) {
      int cell = static_cast<int>(a * g.size() + b);
      for (int dir = 0; dir < 3; ++dir) {
        ExperimentResult::Cell c;
        c.key = {io::fixed(g[a], 0), io::fixed(g[b], 0), dir_names[dir]};
        for (int j = 0; j < participants; ++j) {
          const auto& cc = correct[static_cast<size_t>(j)][static_cast<size_t>(cell)];
          double v = dir < 2 ? 100.0 * cc[static_cast<size_t>(dir)] / R
                             : 100.0 * (cc[0] + cc[1]) / (2.0 * R);
          c.per_participant.push_back(v);
        }
        res.cells.push_back(std::move(c));
      }
    }

  res.summary.push_back(summarize("direction_accuracy", overall));
  std::vector<double> cw, ccw;
  for (int j = 0; j < participants; ++j) {
    cw.push_back(per_dir[static_cast<size_t>(j)][0]);
    ccw.push_back(per_dir[static_cast<size_t>(j)][1]);
  }
  res.summary.push_back(summarize("cw_accuracy", cw));
  res.summary.push_back(summarize("ccw_accuracy", ccw));
  return res;
}

/// Experiment: waveform study on the {50,200,350}^2 ms grid, all three
/// shapes, both directions.
inline ExperimentResult run_experiment3(int participants, const Tables& tables,
                                        const HarnessConfig& cfg, uint64_t seed) {
  static const std::vector<double> g{50.0, 200.0, 350.0};
  const int R = cfg.repetitions;
  const int n_cells = static_cast<int>(g.size() * g.size()) * 3;

  ExperimentResult res;
  res.participants = participants;
  res.cell_columns = {"shape", "on_ms", "off_ms", "direction"};

  std::vector<std::array<int, 2>> zero(static_cast<size_t>(n_cells), {0, 0});
  std::vector<decltype(zero)> correct(static_cast<size_t>(participants), zero);
  std::vector<std::array<double, 3>> shape_pc(static_cast<size_t>(participants), {0, 0, 0});

  for (int j = 0; j < participants; ++j) {
    ParticipantModel model = make_participant(j, seed, cfg.sigma_subj, tables);
    detail::StratifiedDraws draws(seed, hash_tag("exp3"), j, R, participants);
    Rng sched_rng = keyed_rng(seed, {hash_tag("exp3_sched"), static_cast<uint64_t>(j)});
    TrialSchedule schedule = TrialSchedule::factorial(
        {3, static_cast<int>(g.size()), static_cast<int>(g.size()), 2}, R, 2, sched_rng);

    for (const Trial& trial : schedule.trials) {
      int sh = trial.levels[0], a = trial.levels[1], b = trial.levels[2], dir = trial.levels[3];
      RotationSpec spec;
      spec.direction = dir == 0 ? RotationDirection::CW : RotationDirection::CCW;
      spec.on_ms = g[static_cast<size_t>(a)];
      spec.off_ms = g[static_cast<size_t>(b)];
      spec.shape = static_cast<WaveformShape>(sh);
      RotationDirection answer =
          perceive_rotation_at(spec, model.rotation_table, draws.u(trial.rep));
      if (answer == spec.direction) {
        int cell = (sh * static_cast<int>(g.size()) + a) * static_cast<int>(g.size()) + b;
        correct[static_cast<size_t>(j)][static_cast<size_t>(cell)][static_cast<size_t>(dir)]++;
        shape_pc[static_cast<size_t>(j)][static_cast<size_t>(sh)] += 1.0;
      }
    }
    double per_shape_trials = static_cast<double>(schedule.trials.size()) / 3.0;
    for (auto& v : shape_pc[static_cast<size_t>(j)]) v *= 100.0 / per_shape_trials;
  }

  static const char* dir_names[] = {"cw", "ccw", "pooled"};
  for (int sh = 0; sh < 3; ++sh)
    for (size_t a = 0; a < g.size(); ++a)
      for (size_t b = 0; b < g.size(); ++b) {
        int cell = (sh * static_cast<int>(g.size()) + static_cast<int>(a)) * static_cast<int>(g.size()) +
                   static_cast<int>(b);
        for (int dir = 0; dir < 3; ++dir) {
          ExperimentResult::Cell c;
          c.key = {to_string(static_cast<WaveformShape>(sh)), io::fixed(g[a], 0), io::fixed(g[b], 0),
                   dir_names[dir]};
          for (int j = 0; j < participants; ++j) {
            const auto& cc = correct[static_cast<size_t>(j)][static_cast<size_t>(cell)];
            double v = dir < 2 ? 100.0 * cc[static_cast<size_t>(dir)] / R
                               : 100.0 * (cc[0] + cc[1]) / (2.0 * R);
            c.per_participant.push_back(v);
          }
          res.cells.push_back(std::move(c));
        }
      }

  for (int sh = 0; sh < 3; ++sh) {
    std::vector<double> vals;
    for (int j = 0; j < participants; ++j)
      vals.push_back(shape_pc[static_cast<size_t>(j)][static_cast<size_t>(sh)]);
    res.summary.push_back(summarize(to_string(static_cast<WaveformShape>(sh)), vals));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Spinning Tops game study
// ---------------------------------------------------------------------------

enum class TopsCondition : int { NVH = 0, OH = 1, OV = 2, VH = 3, MVH = 4 };

inline const char* to_string(TopsCondition c) {
  switch (c) {
    case TopsCondition::NVH: return "NVH";
    case TopsCondition::OH: return "OH";
    case TopsCondition::OV: return "OV";
    case TopsCondition::VH: return "VH";
    case TopsCondition::MVH: return "MVH";
  }
  throw error("invalid tops condition");
}

inline TopsCondition parse_tops_condition(const std::string& s) {
  if (s == "NVH" || s == "nvh") return TopsCondition::NVH;
  if (s == "OH" || s == "oh") return TopsCondition::OH;
  if (s == "OV" || s == "ov") return TopsCondition::OV;
  if (s == "VH" || s == "vh") return TopsCondition::VH;
  if (s == "MVH" || s == "mvh") return TopsCondition::MVH;
  throw error("unknown tops condition: " + s);
}

inline constexpr std::array<TopsCondition, 5> kAllTopsConditions{
    TopsCondition::NVH, TopsCondition::OH, TopsCondition::OV, TopsCondition::VH, TopsCondition::MVH};

/// Scene state for one game trial: three tops spinning at different speeds,
/// one open drop box per side, a running score.
struct GameState {
  static constexpr int kFrameRateHz = 30;
  struct Top {
    RotationDirection spin = RotationDirection::CW;
    double step_deg_per_frame = 90.0;  // one of 45 / 90 / 135
  };
  std::array<Top, 3> tops;
  std::array<int, 2> open_box{0, 0};  // open box index (0..2) per side: [ccw, cw]
  int score = 0;
};

/// One game condition for all participants. Direction correctness is scored
/// against the haptically conveyed (true) spin; box correctness against the
/// open box on the true side.
inline ExperimentResult run_spinning_tops(TopsCondition condition, int participants,
                                          const Tables& tables, const HarnessConfig& cfg,
                                          uint64_t seed) {
  const int T = cfg.tops_trials_per_condition;
  const uint64_t cond_key = static_cast<uint64_t>(condition);

  ExperimentResult res;
  res.participants = participants;
  res.cell_columns = {"condition", "task"};

  std::vector<double> dir_pc(static_cast<size_t>(participants), 0.0);
  std::vector<double> box_pc(static_cast<size_t>(participants), 0.0);
  std::vector<double> full_pc(static_cast<size_t>(participants), 0.0);

  double base_oh_accuracy =
      predict_direction_accuracy(200.0, 200.0, WaveformShape::DecreasingRamp, tables.rotation);
  double oh_scale = cfg.oh_direction_target / base_oh_accuracy;

  for (int j = 0; j < participants; ++j) {
    ParticipantModel model = make_participant(j, seed, cfg.sigma_subj, tables);
    detail::TrialDraws dir_draws(seed, hash_tag("tops_dir") ^ cond_key, j, T);
    detail::TrialDraws box_draws(seed, hash_tag("tops_box") ^ cond_key, j, T);
    Rng sched_rng = keyed_rng(seed, {hash_tag("tops_sched"), cond_key, static_cast<uint64_t>(j)});
    Rng truth_rng = keyed_rng(seed, {hash_tag("tops_truth"), cond_key, static_cast<uint64_t>(j)});

    // Spin directions are balanced; MVH also balances the two step
    // magnitudes that flip the apparent direction.
    TrialSchedule schedule =
        condition == TopsCondition::MVH
            ? TrialSchedule::factorial({2, 2}, T / 4, 1, sched_rng)
            : TrialSchedule::factorial({2}, T / 2, 1, sched_rng);

    double p_dir_oh =
        detail::clamp01(predict_direction_accuracy(200.0, 200.0, WaveformShape::DecreasingRamp,
                                                   model.rotation_table) *
                        oh_scale);
    double p_box_oh = detail::clamp01(cfg.oh_box_target + model.table_shift);

    GameState game;
    game.tops = {{{RotationDirection::CW, 45.0},
                  {RotationDirection::CW, 90.0},
                  {RotationDirection::CCW, 135.0}}};

    int dir_ok = 0, box_ok = 0, full_ok = 0;
    for (size_t t = 0; t < schedule.trials.size(); ++t) {
      const Trial& trial = schedule.trials[t];
      RotationDirection spin = trial.levels[0] == 0 ? RotationDirection::CW : RotationDirection::CCW;

      double step_deg;
      switch (condition) {
        case TopsCondition::NVH:
        case TopsCondition::OH: step_deg = 90.0; break;
        case TopsCondition::OV:
        case TopsCondition::VH: step_deg = 45.0; break;
        case TopsCondition::MVH: step_deg = trial.levels[1] == 0 ? 45.0 : 135.0; break;
        default: throw error("invalid tops condition");
      }

      // Scene for this trial; the target top carries the trial's parameters.
      game.tops[0] = {spin, step_deg};
      game.open_box = {static_cast<int>(truth_rng.below(3)), static_cast<int>(truth_rng.below(3))};

      // Signed visual impression: fold the per-frame step through the
      // pattern symmetry, signed by the spin direction.
      std::optional<double> folded = apparent_step(step_deg);
      std::optional<RotationDirection> visual;
      if (folded.has_value()) {
        double signed_step = (spin == RotationDirection::CW ? 1.0 : -1.0) * *folded;
        visual = signed_step > 0 ? RotationDirection::CW : RotationDirection::CCW;
      }

      // The haptic cue conveys the scored truth. Under MVH it deliberately
      // opposes the apparent visual direction.
      RotationDirection truth = spin;
      if (condition == TopsCondition::MVH) truth = opposite(*visual);

      double u_dir = dir_draws.u(static_cast<int>(t));
      RotationDirection answer;
      switch (condition) {
        case TopsCondition::NVH:
          answer = u_dir < 0.5 ? RotationDirection::CW : RotationDirection::CCW;
          break;
        case TopsCondition::OH:
          answer = u_dir < p_dir_oh ? truth : opposite(truth);
          break;
        case TopsCondition::OV:
          answer = *visual;
          break;
        case TopsCondition::VH:
          answer = u_dir < cfg.vh_lapse ? opposite(*visual) : *visual;
          break;
        case TopsCondition::MVH:
          answer = u_dir < cfg.p_vis ? *visual : truth;
          break;
        default: throw error("invalid tops condition");
      }
      bool dir_correct = answer == truth;

      int true_side = truth == RotationDirection::CW ? 1 : 0;
      int open = game.open_box[static_cast<size_t>(true_side)];
      double u_box = box_draws.u(static_cast<int>(t));
      bool box_correct;
      if (condition == TopsCondition::OH) {
        // Movement-effect detection of the open box; a miss means dropping
        // on a closed box, which scores as incorrect.
        box_correct = u_box < p_box_oh;
      } else {
        int guess = std::min(2, static_cast<int>(u_box * 3.0));
        box_correct = guess == open;
      }

      dir_ok += dir_correct;
      box_ok += box_correct;
      if (dir_correct && box_correct) {
        ++full_ok;
        ++game.score;
      }
    }
    dir_pc[static_cast<size_t>(j)] = 100.0 * dir_ok / static_cast<double>(T);
    box_pc[static_cast<size_t>(j)] = 100.0 * box_ok / static_cast<double>(T);
    full_pc[static_cast<size_t>(j)] = 100.0 * full_ok / static_cast<double>(T);
  }

  std::string cond = to_string(condition);
  res.cells.push_back({{cond, "direction"}, dir_pc});
  res.cells.push_back({{cond, "box"}, box_pc});
  res.summary.push_back(summarize(cond + "_direction", dir_pc));
  res.summary.push_back(summarize(cond + "_box", box_pc));
  res.summary.push_back(summarize(cond + "_full_trial", full_pc));
  return res;
}

}  // namespace stylusfx
