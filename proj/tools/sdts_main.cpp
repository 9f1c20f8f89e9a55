#include <CLI11.hpp>

#include "sdts/codec.hpp"
#include "sdts/config.hpp"
#include "sdts/enhance.hpp"
#include "sdts/frame_io.hpp"
#include "sdts/metrics.hpp"
#include "sdts/plot.hpp"
#include "sdts/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace sdts;

namespace {

/// Removes every tracked output unless the run committed, so failed commands
/// leave no partial files behind.
struct OutputGuard {
  std::vector<fs::path> paths;
  bool committed = false;

  void track(const fs::path& p) { paths.push_back(p); }
  void commit() { committed = true; }
  ~OutputGuard() {
    if (committed) return;
    for (const fs::path& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

void save_clip_tracked(const Clip& clip, const ClipManifest& manifest, OutputGuard& guard) {
  fs::create_directories(manifest.dir);
  for (int i = 0; i < clip.count(); ++i)
    guard.track(manifest.dir / expand_pattern(manifest.pattern, i));
  if (clip.role != ClipRole::raw) guard.track(manifest.dir / "labels.csv");
  save_clip(clip, manifest);
}

void check_labels_match_period(const Clip& degraded, int period, const std::string& where) {
  for (int i = 0; i < degraded.count(); ++i) {
    const FrameLabel expect = i % period == 0 ? FrameLabel::HQF : FrameLabel::LQF;
    if (degraded.labels[i] != expect)
      throw std::runtime_error(where + ": labels.csv disagrees with period " +
                               std::to_string(period) + " at frame " + std::to_string(i));
  }
}

struct CommonOpts {
  std::string config_file;
  RunConfig cfg;

  void add_config_flag(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value config file");
  }
  void load() {
    if (!config_file.empty()) cfg.load_file(config_file);
  }
};

int cmd_synth(const std::string& kind, int frames, int height, int width, Scalar shift,
              std::uint64_t seed, const std::string& output) {
  const Clip clip = synth_clip(synth_kind_from_string(kind), frames, height, width, shift, seed);
  OutputGuard guard;
  save_clip_tracked(clip, ClipManifest{output, "frame_%04d.pgm", -1, ClipRole::raw}, guard);
  guard.commit();
  std::cout << "wrote " << clip.count() << " frames to " << output << "\n";
  return 0;
}

int cmd_degrade(CommonOpts& common, const std::string& input, const std::string& output,
                const std::string& preset) {
  if (!preset.empty()) {
    const DegradeConfig p = DegradeConfig::preset(preset);
    common.cfg.degrade.q_low = p.q_low;
    common.cfg.degrade.q_high = p.q_high;
  }
  common.cfg.echo(std::cout);
  const Clip raw = load_clip(ClipManifest{input, "frame_%04d.pgm", -1, ClipRole::raw});
  const Clip degraded = degrade_clip(raw, common.cfg.degrade);
  OutputGuard guard;
  save_clip_tracked(degraded, ClipManifest{output, "frame_%04d.pgm", -1, ClipRole::degraded},
                    guard);
  guard.commit();
  std::cout << "wrote " << degraded.count() << " degraded frames to " << output << "\n";
  return 0;
}

int cmd_train(CommonOpts& common, const std::string& raw_dir, const std::string& degraded_dir,
              const std::string& phase, const std::string& variant_name, std::uint64_t seed,
              bool seed_given, const std::string& out_path, std::string log_path,
              const std::string& mc_path, const std::string& init_path,
              const std::string& finetune_path) {
  if (seed_given) common.cfg.train.seed = seed;
  common.cfg.echo(std::cout);

  if (phase == "2" && mc_path.empty())
    throw CLI::ValidationError("--phase 2 requires --mc <checkpoint>");
  if (phase == "3" && init_path.empty() && finetune_path.empty())
    throw CLI::ValidationError("--phase 3 requires --init or --finetune-from");
  if (!init_path.empty() && !finetune_path.empty())
    throw CLI::ValidationError("--init and --finetune-from are mutually exclusive");

  const Variant variant = variant_from_string(variant_name);
  const int period = common.cfg.degrade.period;
  Clip raw = load_clip(ClipManifest{raw_dir, "frame_%04d.pgm", -1, ClipRole::raw});
  Clip degraded =
      load_clip(ClipManifest{degraded_dir, "frame_%04d.pgm", -1, ClipRole::degraded});
  check_labels_match_period(degraded, period, "train");

  Trainer trainer(std::move(raw), std::move(degraded), common.cfg.train, common.cfg.net,
                  variant, period);
  Checkpoint result;
  if (phase == "1") {
    result = trainer.run_phase1();
  } else if (phase == "2") {
    result = trainer.run_phase2(Checkpoint::load(mc_path));
  } else if (phase == "3") {
    if (!finetune_path.empty())
      result = trainer.finetune(Checkpoint::load(finetune_path), finetune_path);
    else
      result = trainer.run_phase3(Checkpoint::load(init_path));
  } else if (phase == "all") {
    result = trainer.run_all();
  } else {
    throw CLI::ValidationError("--phase must be 1, 2, 3 or all");
  }

  if (log_path.empty()) log_path = out_path + ".loss.csv";
  OutputGuard guard;
  guard.track(out_path);
  guard.track(log_path);
  result.save(out_path);
  trainer.write_log(log_path);
  guard.commit();
  std::cout << "wrote checkpoint " << out_path << " (variant " << to_string(result.variant)
            << ", epoch " << result.epoch << ") and loss log " << log_path << "\n";
  return 0;
}

int cmd_enhance(CommonOpts& common, const std::string& degraded_dir,
                const std::string& ckpt_lqf, const std::string& ckpt_hqf,
                const std::string& output) {
  common.cfg.echo(std::cout);
  const int period = common.cfg.degrade.period;
  const Clip degraded =
      load_clip(ClipManifest{degraded_dir, "frame_%04d.pgm", -1, ClipRole::degraded});
  check_labels_match_period(degraded, period, "enhance");

  const Checkpoint lqf = Checkpoint::load(ckpt_lqf);
  const Checkpoint hqf = Checkpoint::load(ckpt_hqf);
  std::vector<Routing> routing;
  const Clip enhanced = enhance_clip(degraded, lqf, hqf, period, &routing);

  OutputGuard guard;
  save_clip_tracked(enhanced, ClipManifest{output, "frame_%04d.pgm", -1, ClipRole::enhanced},
                    guard);
  const fs::path routing_path = fs::path(output) / "routing.csv";
  guard.track(routing_path);
  std::ofstream rout(routing_path, std::ios::trunc);
  if (!rout) throw std::runtime_error("cannot write " + routing_path.string());
  rout << "frame,model,prev_ref,next_ref\n";
  for (std::size_t i = 0; i < routing.size(); ++i) {
    rout << i << "," << to_string(routing[i].model) << "," << routing[i].prev_ref << ","
         << routing[i].next_ref << "\n";
    std::cout << "route: frame " << i << " -> " << to_string(routing[i].model) << " (prev "
              << routing[i].prev_ref << ", next " << routing[i].next_ref << ")\n";
  }
  guard.commit();
  std::cout << "wrote " << enhanced.count() << " enhanced frames to " << output << "\n";
  return 0;
}

int cmd_eval(CommonOpts& common, const std::string& raw_dir, const std::string& degraded_dir,
             const std::string& enhanced_dir, const std::string& report_path,
             const std::string& plot_path) {
  common.cfg.echo(std::cout);
  const int period = common.cfg.degrade.period;
  const Clip raw = load_clip(ClipManifest{raw_dir, "frame_%04d.pgm", -1, ClipRole::raw});
  const Clip degraded =
      load_clip(ClipManifest{degraded_dir, "frame_%04d.pgm", -1, ClipRole::degraded});
  const Clip enhanced =
      load_clip(ClipManifest{enhanced_dir, "frame_%04d.pgm", -1, ClipRole::enhanced});
  check_labels_match_period(degraded, period, "eval");

  const MetricsReport report = evaluate_enhanced(raw, degraded, enhanced, period);
  OutputGuard guard;
  guard.track(report_path);
  write_report_csv(report, report_path);
  if (!plot_path.empty()) {
    guard.track(plot_path);
    fluctuation_plot(report, plot_path);
  }
  guard.commit();

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", report.mean_delta);
  std::cout << "mean delta_psnr: " << buf << "\n";
  if (report.mean_delta_hqf) {
    std::snprintf(buf, sizeof(buf), "%.6f", *report.mean_delta_hqf);
    std::cout << "mean delta_psnr (HQF): " << buf << "\n";
  }
  if (report.mean_delta_lqf) {
    std::snprintf(buf, sizeof(buf), "%.6f", *report.mean_delta_lqf);
    std::cout << "mean delta_psnr (LQF): " << buf << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video quality enhancement pipeline: codec simulator, motion-compensated "
               "multi-frame enhancement network, trainer and metrics harness"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a deterministic test clip");
  std::string sy_kind = "translate", sy_out;
  int sy_frames = 16, sy_h = 32, sy_w = 32;
  Scalar sy_shift = 1.0;
  std::uint64_t sy_seed = 1;
  synth->add_option("--kind", sy_kind, "translate|still|ramp");
  synth->add_option("--frames", sy_frames, "frame count (>= 3)");
  synth->add_option("--height", sy_h, "frame height");
  synth->add_option("--width", sy_w, "frame width");
  synth->add_option("--shift", sy_shift, "pixels per frame (translate)");
  synth->add_option("--seed", sy_seed, "texture seed");
  synth->add_option("--output", sy_out, "output clip directory")->required();

  // degrade
  auto* degrade = app.add_subcommand("degrade", "compress a raw clip with the codec simulator");
  CommonOpts deg_common;
  std::string deg_in, deg_out, deg_preset;
  int deg_period = -1;
  degrade->add_option("--input", deg_in, "raw clip directory")->required();
  degrade->add_option("--output", deg_out, "degraded clip directory")->required();
  degrade->add_option("--preset", deg_preset, "q37|q32 quantization preset");
  degrade->add_option("--period", deg_period, "frames between HQFs");
  deg_common.add_config_flag(degrade);

  // train
  auto* train = app.add_subcommand("train", "run one or all training phases");
  CommonOpts tr_common;
  std::string tr_raw, tr_degraded, tr_phase = "all", tr_variant, tr_out, tr_log, tr_mc,
              tr_init, tr_finetune;
  std::uint64_t tr_seed = 0;
  int tr_period = -1;
  train->add_option("--raw", tr_raw, "raw clip directory")->required();
  train->add_option("--degraded", tr_degraded, "degraded clip directory")->required();
  train->add_option("--phase", tr_phase, "1|2|3|all");
  train->add_option("--variant", tr_variant, "lqf|hqf")->required();
  auto* seed_opt = train->add_option("--seed", tr_seed, "training seed");
  train->add_option("--out", tr_out, "output checkpoint path")->required();
  train->add_option("--log", tr_log, "loss log CSV path (default <out>.loss.csv)");
  train->add_option("--mc", tr_mc, "MC checkpoint (phase 2)");
  train->add_option("--init", tr_init, "initial checkpoint (phase 3)");
  train->add_option("--finetune-from", tr_finetune, "full-model checkpoint to fine-tune");
  train->add_option("--period", tr_period, "frames between HQFs");
  tr_common.add_config_flag(train);

  // enhance
  auto* enhance = app.add_subcommand("enhance", "enhance a degraded clip with trained models");
  CommonOpts en_common;
  std::string en_degraded, en_lqf, en_hqf, en_out;
  int en_period = -1;
  enhance->add_option("--degraded", en_degraded, "degraded clip directory")->required();
  enhance->add_option("--ckpt-lqf", en_lqf, "LQF model checkpoint")->required();
  enhance->add_option("--ckpt-hqf", en_hqf, "HQF model checkpoint")->required();
  enhance->add_option("--period", en_period, "frames between HQFs");
  enhance->add_option("--output", en_out, "enhanced clip directory")->required();
  en_common.add_config_flag(enhance);

  // eval
  auto* eval = app.add_subcommand("eval", "score an enhanced clip against raw and degraded");
  CommonOpts ev_common;
  std::string ev_raw, ev_degraded, ev_enhanced, ev_report, ev_plot;
  int ev_period = -1;
  eval->add_option("--raw", ev_raw, "raw clip directory")->required();
  eval->add_option("--degraded", ev_degraded, "degraded clip directory")->required();
  eval->add_option("--enhanced", ev_enhanced, "enhanced clip directory")->required();
  eval->add_option("--report", ev_report, "metrics CSV path")->required();
  eval->add_option("--plot", ev_plot, "fluctuation plot SVG path");
  eval->add_option("--period", ev_period, "frames between HQFs");
  ev_common.add_config_flag(eval);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth(sy_kind, sy_frames, sy_h, sy_w, sy_shift, sy_seed, sy_out);
    if (degrade->parsed()) {
      deg_common.load();
      if (deg_period > 0) deg_common.cfg.degrade.period = deg_period;
      return cmd_degrade(deg_common, deg_in, deg_out, deg_preset);
    }
    if (train->parsed()) {
      tr_common.load();
      if (tr_period > 0) tr_common.cfg.degrade.period = tr_period;
      return cmd_train(tr_common, tr_raw, tr_degraded, tr_phase, tr_variant, tr_seed,
                       !seed_opt->empty(), tr_out, tr_log, tr_mc, tr_init, tr_finetune);
    }
    if (enhance->parsed()) {
      en_common.load();
      if (en_period > 0) en_common.cfg.degrade.period = en_period;
      return cmd_enhance(en_common, en_degraded, en_lqf, en_hqf, en_out);
    }
    if (eval->parsed()) {
      ev_common.load();
      if (ev_period > 0) ev_common.cfg.degrade.period = ev_period;
      return cmd_eval(ev_common, ev_raw, ev_degraded, ev_enhanced, ev_report, ev_plot);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const TrainingDiverged& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
