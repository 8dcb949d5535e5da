// stylusfx command-line front end: synthesize effect timelines, run motor
// simulations, encode/decode protocol frames, and run the experiment
// harness. Exit codes: 0 success, 2 usage/validation error, 3 numerical
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "stylusfx/stylusfx.hpp"
#include "stylusfx/stats.hpp"

namespace sfx = stylusfx;

namespace {

struct EffectFlags {
  // movement
  double d_ms = 100.0, isoi_ms = 50.0;
  std::string mv_dir = "tip-to-end";
  int reps = 1;
  double gap_ms = 500.0;
  // rotation
  double on_ms = 200.0, off_ms = 200.0;
  std::string rot_dir = "cw";
  std::string shape = "square";
  int count = 3;
  // shared
  double amp = 1.0;
};

sfx::MovementSpec movement_spec(const EffectFlags& f) {
  sfx::MovementSpec s;
  if (f.mv_dir == "tip-to-end") s.direction = sfx::MovementDirection::TipToEnd;
  else if (f.mv_dir == "end-to-tip") s.direction = sfx::MovementDirection::EndToTip;
  else throw sfx::error("unknown direction: " + f.mv_dir + " (want tip-to-end|end-to-tip)");
  s.d_ms = f.d_ms;
  s.isoi_ms = f.isoi_ms;
  s.amplitude = f.amp;
  s.repetitions = f.reps;
  s.inter_rep_gap_ms = f.gap_ms;
  return s;
}

sfx::RotationSpec rotation_spec(const EffectFlags& f) {
  sfx::RotationSpec s;
  if (f.rot_dir == "cw") s.direction = sfx::RotationDirection::CW;
  else if (f.rot_dir == "ccw") s.direction = sfx::RotationDirection::CCW;
  else throw sfx::error("unknown direction: " + f.rot_dir + " (want cw|ccw)");
  s.on_ms = f.on_ms;
  s.off_ms = f.off_ms;
  s.shape = sfx::parse_shape(f.shape);
  s.pulse_count = f.count;
  s.amplitude = f.amp;
  return s;
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    sfx::io::write_file(out_path, content);
  }
}

std::string ratio_str(double a) {
  if (std::isinf(a)) return "inf";
  return sfx::io::fixed(a, 6);
}

sfx::HarnessConfig load_config(const std::string& config_path) {
  if (!config_path.empty()) return sfx::HarnessConfig::from_file(config_path);
  return sfx::HarnessConfig::from_env();
}

void print_summary(const sfx::ExperimentResult& res) {
  std::printf("%-28s %10s %10s %4s\n", "condition", "mean", "sd", "n");
  for (const auto& row : res.summary)
    std::printf("%-28s %10.4f %10.4f %4d\n", row.condition.c_str(), row.mean, row.sd, row.n);
}

void write_result_csvs(const sfx::ExperimentResult& res, const std::string& out_dir,
                       const std::string& stem) {
  std::filesystem::create_directories(out_dir);
  std::ostringstream cells, summary;
  res.write_cells_csv(cells);
  res.write_summary_csv(summary);
  sfx::io::write_file(out_dir + "/" + stem + "_cells.csv", cells.str());
  sfx::io::write_file(out_dir + "/" + stem + "_summary.csv", summary.str());
}

void print_anova(const std::string& label, const std::vector<double>& a,
                 const std::vector<double>& b) {
  std::vector<std::vector<double>> m;
  for (size_t i = 0; i < a.size(); ++i) m.push_back({a[i], b[i]});
  sfx::AnovaResult r = sfx::rm_anova_oneway(m);
  std::printf("rm-anova %s: F(%d,%d)=%.3f, p=%.3e\n", label.c_str(), r.df_num, r.df_den, r.F, r.p);
}

int run(int argc, char** argv) {
  CLI::App app{"haptic stylus effect synthesis, simulation and experiment toolkit"};
  app.require_subcommand(1);

  EffectFlags fx;
  std::string out_path;
  std::string params_path;
  std::string config_path;
  uint64_t seed = 0;

  // ---- effect ----
  auto* effect = app.add_subcommand("effect", "synthesize an actuation timeline as CSV");
  effect->require_subcommand(1);
  auto* e_mov = effect->add_subcommand("movement", "apparent-motion effect");
  e_mov->add_option("--d", fx.d_ms, "stimulus duration ms");
  e_mov->add_option("--isoi", fx.isoi_ms, "inter-stimulus onset interval ms");
  e_mov->add_option("--dir", fx.mv_dir, "tip-to-end|end-to-tip");
  e_mov->add_option("--amp", fx.amp, "amplitude (0,1]");
  e_mov->add_option("--reps", fx.reps, "repetitions");
  e_mov->add_option("--gap", fx.gap_ms, "inter-repetition gap ms");
  e_mov->add_option("--out", out_path, "output file (default stdout)");
  auto* e_rot = effect->add_subcommand("rotation", "rotational torque effect");
  e_rot->add_option("--on", fx.on_ms, "on-time ms");
  e_rot->add_option("--off", fx.off_ms, "off-time ms");
  e_rot->add_option("--dir", fx.rot_dir, "cw|ccw");
  e_rot->add_option("--shape", fx.shape, "square|inc|dec");
  e_rot->add_option("--count", fx.count, "pulse count");
  e_rot->add_option("--amp", fx.amp, "amplitude (0,1]");
  e_rot->add_option("--out", out_path, "output file (default stdout)");

  // ---- sim ----
  double dt_us = 10.0;
  double tail_ms = -1.0;
  std::string erm_channel = "tip";
  auto* sim = app.add_subcommand("sim", "simulate motor/actuator physics, emit profile CSV");
  sim->require_subcommand(1);
  auto* s_torque = sim->add_subcommand("torque", "DC motor casing-torque profile for a rotation effect");
  s_torque->add_option("--on", fx.on_ms, "on-time ms");
  s_torque->add_option("--off", fx.off_ms, "off-time ms");
  s_torque->add_option("--dir", fx.rot_dir, "cw|ccw");
  s_torque->add_option("--shape", fx.shape, "square|inc|dec");
  s_torque->add_option("--count", fx.count, "pulse count");
  s_torque->add_option("--amp", fx.amp, "amplitude (0,1]");
  s_torque->add_option("--params", params_path, "motor params file (key=value)");
  s_torque->add_option("--dt-us", dt_us, "integration step, microseconds");
  s_torque->add_option("--tail-ms", tail_ms, "extra settling time after the last pulse");
  s_torque->add_option("--out", out_path, "output file (default stdout)");
  auto* s_erm = sim->add_subcommand("erm", "ERM vibration force profile for a movement effect");
  s_erm->add_option("--d", fx.d_ms, "stimulus duration ms");
  s_erm->add_option("--isoi", fx.isoi_ms, "inter-stimulus onset interval ms");
  s_erm->add_option("--dir", fx.mv_dir, "tip-to-end|end-to-tip");
  s_erm->add_option("--amp", fx.amp, "amplitude (0,1]");
  s_erm->add_option("--reps", fx.reps, "repetitions");
  s_erm->add_option("--channel", erm_channel, "tip|end");
  s_erm->add_option("--params", params_path, "motor/erm params file (key=value)");
  s_erm->add_option("--dt-us", dt_us, "integration step, microseconds");
  s_erm->add_option("--tail-ms", tail_ms, "extra settling time after the last pulse");
  s_erm->add_option("--out", out_path, "output file (default stdout)");

  // ---- proto ----
  std::string hex_input;
  std::string encode_what;
  int amp_u8 = 255;
  auto* proto = app.add_subcommand("proto", "encode/decode device protocol frames");
  proto->require_subcommand(1);
  std::string enc_dir;
  auto* p_enc = proto->add_subcommand("encode", "emit a frame as uppercase hex");
  p_enc->add_option("what", encode_what, "ping|stop|status|vibe|movement|rotation")->required();
  p_enc->add_option("--d", fx.d_ms, "movement d ms / vibe duration ms");
  p_enc->add_option("--isoi", fx.isoi_ms, "movement isoi ms");
  p_enc->add_option("--on", fx.on_ms, "rotation on ms");
  p_enc->add_option("--off", fx.off_ms, "rotation off ms");
  p_enc->add_option("--shape", fx.shape, "square|inc|dec");
  p_enc->add_option("--count", fx.count, "rotation pulse count");
  p_enc->add_option("--reps", fx.reps, "movement repetitions");
  p_enc->add_option("--dir", enc_dir, "tip-to-end|end-to-tip (movement), cw|ccw (rotation)");
  p_enc->add_option("--channel", erm_channel, "vibe channel tip|end");
  p_enc->add_option("--amp", amp_u8, "drive amplitude byte 0..255");
  auto* p_dec = proto->add_subcommand("decode", "decode a hex byte stream");
  p_dec->add_option("--hex", hex_input, "space-separated hex bytes")->required();
  auto* p_dev = proto->add_subcommand(
      "device", "virtual device loopback: hex frames on stdin, replies on stdout");

  // ---- exp ----
  std::string exp_id;
  std::string condition = "all";
  int participants = -1;
  std::string out_dir;
  auto* exp = app.add_subcommand("exp", "run the experiment harness");
  exp->require_subcommand(1);
  auto* x_run = exp->add_subcommand("run", "run an experiment and emit result CSVs");
  x_run->add_option("id", exp_id, "1|2|3|tops")->required();
  x_run->add_option("--condition", condition, "tops condition NVH|OH|OV|VH|MVH|all");
  x_run->add_option("--participants", participants, "number of simulated participants");
  x_run->add_option("--seed", seed, "rng seed");
  x_run->add_option("--out", out_dir, "directory for result CSVs");
  x_run->add_option("--config", config_path, "harness config file (overrides HAPTI_CONFIG)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (e_mov->parsed()) {
    auto tl = sfx::schedule_movement(movement_spec(fx));
    std::ostringstream os;
    sfx::write_timeline_csv(tl, os);
    emit(out_path, os.str());
    return 0;
  }
  if (e_rot->parsed()) {
    auto tl = sfx::schedule_rotation(rotation_spec(fx));
    std::ostringstream os;
    sfx::write_timeline_csv(tl, os);
    emit(out_path, os.str());
    return 0;
  }

  if (s_torque->parsed()) {
    sfx::DcMotorParams params =
        params_path.empty() ? sfx::DcMotorParams{} : sfx::DcMotorParams::from_file(params_path);
    auto spec = rotation_spec(fx);
    auto tl = sfx::schedule_rotation(spec);
    if (!(dt_us > 0.0)) throw sfx::error("--dt-us must be > 0");
    auto profile = sfx::simulate_motor(params, tl, dt_us * 1e-6, tail_ms);
    auto m = sfx::asymmetry_metrics(profile, sfx::intended_casing_sign(spec.direction));
    std::ostringstream os;
    sfx::write_torque_csv(profile, os);
    os << "# peak_fwd=" << sfx::io::sci(m.peak_intended) << " peak_rev=" << sfx::io::sci(m.peak_opposite)
       << " A=" << ratio_str(m.ratio) << " net=" << sfx::io::sci(m.net_impulse) << "\n";
    emit(out_path, os.str());
    return 0;
  }
  if (s_erm->parsed()) {
    sfx::ErmParams params =
        params_path.empty() ? sfx::ErmParams{} : sfx::ErmParams::from_file(params_path);
    auto tl = sfx::schedule_movement(movement_spec(fx));
    sfx::Channel ch;
    if (erm_channel == "tip") ch = sfx::Channel::VibeTip;
    else if (erm_channel == "end") ch = sfx::Channel::VibeEnd;
    else throw sfx::error("unknown channel: " + erm_channel + " (want tip|end)");
    if (!(dt_us > 0.0)) throw sfx::error("--dt-us must be > 0");
    auto profile = sfx::simulate_erm(params, tl, ch, dt_us * 1e-6, tail_ms);
    auto m = sfx::asymmetry_metrics(profile.motor, -1);
    std::ostringstream os;
    sfx::write_erm_csv(profile, os);
    os << "# peak_fwd=" << sfx::io::sci(m.peak_intended) << " peak_rev=" << sfx::io::sci(m.peak_opposite)
       << " A=" << ratio_str(m.ratio) << " net=" << sfx::io::sci(m.net_impulse) << "\n";
    emit(out_path, os.str());
    return 0;
  }

  if (p_enc->parsed()) {
    if (amp_u8 < 0 || amp_u8 > 255) throw sfx::error("--amp must be in 0..255");
    sfx::proto::Frame f;
    if (encode_what == "ping") f = sfx::proto::make_ping();
    else if (encode_what == "stop") f = sfx::proto::make_stop();
    else if (encode_what == "status") f = sfx::proto::make_status();
    else if (encode_what == "vibe") {
      uint8_t ch = erm_channel == "tip" ? 0 : erm_channel == "end" ? 1 : 255;
      if (ch == 255) throw sfx::error("unknown channel: " + erm_channel);
      f = sfx::proto::make_vibe(ch, static_cast<uint8_t>(amp_u8), static_cast<uint16_t>(fx.d_ms));
    } else if (encode_what == "movement") {
      if (!enc_dir.empty()) fx.mv_dir = enc_dir;
      auto spec = movement_spec(fx);
      f = sfx::proto::make_movement(spec.direction, static_cast<uint16_t>(fx.d_ms),
                                    static_cast<uint16_t>(fx.isoi_ms), static_cast<uint8_t>(amp_u8),
                                    static_cast<uint8_t>(fx.reps));
    } else if (encode_what == "rotation") {
      if (!enc_dir.empty()) fx.rot_dir = enc_dir;
      auto spec = rotation_spec(fx);
      f = sfx::proto::make_rotation(spec.direction, static_cast<uint16_t>(fx.on_ms),
                                    static_cast<uint16_t>(fx.off_ms), spec.shape,
                                    static_cast<uint8_t>(fx.count), static_cast<uint8_t>(amp_u8));
    } else {
      throw sfx::error("unknown frame: " + encode_what);
    }
    std::cout << sfx::proto::to_hex(sfx::proto::encode_frame(f)) << "\n";
    return 0;
  }
  if (p_dec->parsed()) {
    auto bytes = sfx::proto::parse_hex(hex_input);
    sfx::proto::StreamDecoder dec;
    auto frames = dec.feed(bytes);
    for (const auto& f : frames) std::cout << sfx::proto::describe(f) << "\n";
    const auto& d = dec.diagnostics();
    if (d.resyncs || d.crc_failures || dec.pending_bytes())
      std::cout << "# resyncs=" << d.resyncs << " crc_failures=" << d.crc_failures
                << " pending_bytes=" << dec.pending_bytes() << "\n";
    return 0;
  }
  if (p_dev->parsed()) {
    sfx::proto::StreamDecoder dec;
    sfx::proto::VirtualDevice dev;
    std::string line;
    while (std::getline(std::cin, line)) {
      line = sfx::io::trim(line);
      if (line.empty()) continue;
      if (line == "quit") break;
      if (line.rfind("tick ", 0) == 0) {
        dev.tick(sfx::io::parse_double(line.substr(5), "tick"));
        std::cout << "# clock_ms=" << sfx::io::fixed(dev.clock_ms(), 1) << " busy=" << dev.busy()
                  << " queued=" << dev.queued() << "\n";
        continue;
      }
      for (const auto& f : dec.feed(sfx::proto::parse_hex(line))) {
        std::cout << "> " << sfx::proto::describe(f) << "\n";
        if (auto reply = dev.execute(f))
          std::cout << "< " << sfx::proto::to_hex(sfx::proto::encode_frame(*reply)) << "\n";
      }
    }
    return 0;
  }

  if (x_run->parsed()) {
    sfx::HarnessConfig cfg = load_config(config_path);
    sfx::Tables tables = sfx::load_tables(cfg);
    if (x_run->count("--seed") == 0) seed = cfg.seed;  // flag wins over config
    if (exp_id == "1" || exp_id == "2" || exp_id == "3") {
      int n = participants > 0 ? participants : 10;
      sfx::ExperimentResult res;
      if (exp_id == "1") res = sfx::run_experiment1(n, tables, cfg, seed);
      else if (exp_id == "2") res = sfx::run_experiment2(n, tables, cfg, seed);
      else res = sfx::run_experiment3(n, tables, cfg, seed);
      print_summary(res);
      if (!out_dir.empty()) write_result_csvs(res, out_dir, "exp" + exp_id);
      return 0;
    }
    if (exp_id == "tops") {
      int n = participants > 0 ? participants : 15;
      std::vector<sfx::TopsCondition> conds;
      if (condition == "all") {
        conds.assign(sfx::kAllTopsConditions.begin(), sfx::kAllTopsConditions.end());
      } else {
        conds.push_back(sfx::parse_tops_condition(condition));
      }
      sfx::ExperimentResult merged;
      merged.cell_columns = {"condition", "task"};
      merged.participants = n;
      std::map<std::string, std::vector<double>> dir_by_cond;
      for (auto c : conds) {
        auto res = sfx::run_spinning_tops(c, n, tables, cfg, seed);
        for (auto& cell : res.cells) {
          if (cell.key[1] == "direction") dir_by_cond[cell.key[0]] = cell.per_participant;
          merged.cells.push_back(std::move(cell));
        }
        for (auto& row : res.summary) merged.summary.push_back(std::move(row));
      }
      print_summary(merged);
      if (dir_by_cond.count("NVH") && dir_by_cond.count("OH"))
        print_anova("NVH-vs-OH direction", dir_by_cond["NVH"], dir_by_cond["OH"]);
      if (dir_by_cond.count("VH") && dir_by_cond.count("MVH"))
        print_anova("VH-vs-MVH direction", dir_by_cond["VH"], dir_by_cond["MVH"]);
      if (!out_dir.empty()) write_result_csvs(merged, out_dir, "tops");
      return 0;
    }
    throw sfx::error("unknown experiment id: " + exp_id + " (want 1|2|3|tops)");
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sfx::divergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
