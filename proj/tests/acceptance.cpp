// Acceptance suite: runs every gate criterion at its pinned tolerance and
// prints one [PASS]/[FAIL] line per criterion. Exit code 0 iff all pass.

#include "sdts/codec.hpp"
#include "sdts/enhance.hpp"
#include "sdts/frame_io.hpp"
#include "sdts/metrics.hpp"
#include "sdts/optim.hpp"
#include "sdts/plot.hpp"
#include "sdts/trainer.hpp"
#include "testutil.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace sdts;
using namespace sdts::testutil;
namespace fs = std::filesystem;

namespace {

struct Ctx {
  fs::path work;
  fs::path lqf_ckpt, hqf_ckpt, lqf_log, hqf_log;
  fs::path raw_dir, deg_dir, enh_dir;
};

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw Failure(msg);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SDTS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), "cannot open " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

bool within_one_ulp(Scalar value, Scalar expect) {
  return std::abs(value - expect) <=
         std::abs(std::nextafter(expect, std::numeric_limits<Scalar>::infinity()) - expect);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double interior_mse(const Frame& a, const Frame& b, int margin = 4) {
  return (a.block(margin, margin, a.rows() - 2 * margin, a.cols() - 2 * margin) -
          b.block(margin, margin, b.rows() - 2 * margin, b.cols() - 2 * margin))
      .square()
      .mean();
}

// --- criteria -------------------------------------------------------------

std::string gradient_suite(Ctx&) {
  std::mt19937_64 rng(2025);
  double worst = 0;
  int checked = 0;
  const auto track = [&](const GradCheck& r) {
    worst = std::max(worst, r.max_rel);
    checked += r.checked;
  };

  {  // conv2d
    Tensor x = random_tensor(Shape{2, 2, 4, 4}, rng, -1.0, 1.0, true);
    Tensor w = random_tensor(Shape{3, 2, 3, 3}, rng, -0.5, 0.5, true);
    Tensor b = random_tensor(Shape{1, 3, 1, 1}, rng, -0.5, 0.5, true);
    const Tensor t = random_tensor(Shape{2, 3, 4, 4}, rng, -1.0, 1.0);
    track(grad_check({x, w, b}, [&] { return mse_loss(conv2d(x, w, b, 1, 1), t); }, rng));
  }
  {  // relu away from its kink
    Tensor x = random_tensor(Shape{1, 2, 4, 4}, rng, 0.2, 2.0, true);
    Tensor y = random_tensor(Shape{1, 2, 4, 4}, rng, -2.0, -0.2, true);
    const Tensor t = random_tensor(Shape{1, 2, 4, 4}, rng, -1.0, 1.0);
    track(grad_check({x, y}, [&] { return mse_loss(relu(add(x, y)), t); }, rng));
  }
  {  // bilinear_sample in image and flow
    Tensor image = random_tensor(Shape{1, 2, 6, 6}, rng, -2.0, 2.0, true);
    Tensor flow = safe_random_flow(1, 6, 6, rng);
    const Tensor t = random_tensor(Shape{1, 2, 6, 6}, rng, -2.0, 2.0);
    track(grad_check({image, flow},
                     [&] { return mse_loss(bilinear_sample(image, flow), t); }, rng, 40));
  }
  {  // pyramid ops, concat/slice, add/scale through one expression
    Tensor x = random_tensor(Shape{1, 4, 4, 4}, rng, -1.0, 1.0, true);
    const Tensor t = random_tensor(Shape{1, 4, 4, 4}, rng, -1.0, 1.0);
    const auto forward = [&] {
      const Tensor up = bilinear_upsample2(avg_downsample2(x));
      const auto [lo, hi] = slice_channels(up, 2);
      return mse_loss(scale(add(concat_channels({hi, lo}), up), 0.5), t);
    };
    track(grad_check({x}, forward, rng));
  }
  {  // full sdts_forward composite at the default NetConfig on an 8x8 fixture
    const NetConfig cfg;
    SdtsParams params = SdtsParams::create(cfg, rng());
    const auto scatter = [&](Tensor t, Scalar s) {
      for (std::int64_t i = 0; i < t.size(); ++i) t.mutable_value()[i] = uniform(rng, -s, s);
    };
    for (FlowEstimator* est : {&params.mc.coarse, &params.mc.fine, &params.mc.still}) {
      scatter(est->weights.back(), 0.02);
      scatter(est->biases.back(), 0.02);
    }
    scatter(params.enet.tail_w, 0.05);
    scatter(params.enet.tail_b, 0.05);
    const Tensor prev = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
    const Tensor target = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
    const Tensor next = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
    const Tensor raw = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
    const auto forward = [&] {
      const SdtsOutput out = sdts_forward(prev, target, next, params, cfg);
      const Tensor me = mc_loss(raw, {prev, next}, {out.prev.flow, out.next.flow});
      return add(me, scale(mse_loss(out.recon, raw), 0.01));
    };
    track(grad_check(params.parameters(), forward, rng, 3));
  }

  require(worst < 1e-6, "max rel err " + fmt("%.3g", worst) + " >= 1e-6");
  return "max rel err " + fmt("%.3g", worst) + " over " + std::to_string(checked) + " coords";
}

std::string identity_at_init(Ctx& ctx) {
  const fs::path dir = ctx.work / "identity";
  fs::create_directories(dir);
  // 30x30 frames also exercise the pad/crop path
  save_clip(synth_clip(SynthKind::translate, 9, 30, 30, 1.0, 77),
            {dir / "raw", "frame_%04d.pgm", -1, ClipRole::raw});
  require(run_cli("degrade --input " + (dir / "raw").string() + " --output " +
                  (dir / "deg").string() + " --preset q37") == 0,
          "degrade failed");

  const SdtsParams params = SdtsParams::create(NetConfig{}, 1);
  const auto freeze = [&](Variant v) {
    NamedParams copy;
    for (const auto& [name, tensor] : params.named())
      copy.emplace_back(name, Tensor::from_data(tensor.shape(), tensor.value(), true));
    return make_checkpoint(v, NetConfig{}, TrainConfig{}, 0, 0, "identity", std::move(copy));
  };
  freeze(Variant::lqf).save(dir / "lqf.ckpt");
  freeze(Variant::hqf).save(dir / "hqf.ckpt");

  require(run_cli("enhance --degraded " + (dir / "deg").string() + " --ckpt-lqf " +
                  (dir / "lqf.ckpt").string() + " --ckpt-hqf " + (dir / "hqf.ckpt").string() +
                  " --output " + (dir / "enh").string()) == 0,
          "enhance failed");
  for (int i = 0; i < 9; ++i) {
    const std::string name = expand_pattern("frame_%04d.pgm", i);
    require(read_file(dir / "deg" / name) == read_file(dir / "enh" / name),
            "frame " + std::to_string(i) + " bytes differ");
  }
  return "9 frames bit-equal through cmd_enhance";
}

std::string warp_oracle(Ctx&) {
  std::mt19937_64 rng(3);
  const Tensor image = random_tensor(Shape{2, 3, 7, 5}, rng, 0.0, 255.0);
  const Tensor zero = Tensor::zeros(Shape{2, 2, 7, 5});
  require((bilinear_sample(image, zero).value() - image.value()).abs().maxCoeff() == 0.0,
          "zero-flow warp is not the exact identity");

  Array img(4);
  img << 1, 2, 3, 4;
  const Tensor grid = Tensor::from_data(Shape{1, 1, 2, 2}, std::move(img));
  Array down(8);
  down << 0, 0, 0, 0, 1, 1, 1, 1;
  const Tensor shifted =
      bilinear_sample(grid, Tensor::from_data(Shape{1, 2, 2, 2}, std::move(down)));
  const Scalar expect_down[4] = {3, 4, 3, 4};
  for (int i = 0; i < 4; ++i)
    require(std::abs(shifted.value()[i] - expect_down[i]) < 1e-12, "row-shift example");

  Array half(8);
  half << 0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0;
  const Tensor halfpx =
      bilinear_sample(grid, Tensor::from_data(Shape{1, 2, 2, 2}, std::move(half)));
  const Scalar expect_half[4] = {1.5, 2, 3.5, 4};
  for (int i = 0; i < 4; ++i)
    require(std::abs(halfpx.value()[i] - expect_half[i]) < 1e-12, "half-pixel example");
  return "identity exact, hand examples within 1e-12";
}

std::string phase1_mc_oracle(Ctx&) {
  const Clip clip = synth_clip(SynthKind::translate, 8, 32, 32, 2.0, 2024);
  McParams params = McParams::create(NetConfig{}.mc_channels, derive_seed(7, 0));
  AdamState adam;
  adam.lr = 1e-4;
  std::mt19937_64 rng(derive_seed(7, 1));
  std::vector<Tensor> trainable = params.parameters();

  for (int step = 0; step < 400; ++step) {
    std::vector<Frame> targets, neighbors;
    for (int b = 0; b < 8; ++b) {
      const int t = 1 + int(rng() % std::uint64_t(clip.count() - 1));
      targets.push_back(clip.frames[t]);
      neighbors.push_back(clip.frames[t - 1]);
    }
    const Tensor target = tensor_from_frames(targets);
    const Tensor neighbor = tensor_from_frames(neighbors);
    Graph graph;
    const Compensation comp = compensate(target, neighbor, params);
    Tensor loss = mc_loss(target, {neighbor}, {comp.flow});
    graph.backward(loss);
    adam_step(trainable, adam);
  }

  double warped_mse = 0, neighbor_mse = 0, mean_dx = 0;
  for (int t = 1; t < clip.count(); ++t) {
    const Compensation comp = compensate(tensor_from_frame(clip.frames[t]),
                                         tensor_from_frame(clip.frames[t - 1]), params);
    warped_mse += interior_mse(frame_from_tensor(comp.warped), clip.frames[t]);
    neighbor_mse += interior_mse(clip.frames[t - 1], clip.frames[t]);
    mean_dx += frame_from_tensor(comp.flow, 0, 0).block(4, 4, 24, 24).mean();
  }
  mean_dx /= clip.count() - 1;
  const double ratio = warped_mse / neighbor_mse;
  require(ratio <= 0.5, "interior MSE ratio " + fmt("%.4g", ratio) + " > 0.5");
  require(mean_dx > -2.6 && mean_dx < -1.4,
          "mean dx " + fmt("%.3f", mean_dx) + " outside [-2.6, -1.4]");
  return "interior MSE ratio " + fmt("%.3g", ratio) + ", mean dx " + fmt("%.2f", mean_dx);
}

std::string still_scene_oracle(Ctx&) {
  const Clip raw = synth_clip(SynthKind::still, 16, 32, 32, 0.0, 515);
  const Clip degraded = degrade_clip(raw, DegradeConfig::preset("q37"));
  TrainConfig cfg;
  cfg.seed = 99;
  const NetConfig net;
  Trainer trainer(raw, degraded, cfg, net, Variant::lqf, 4);
  const Checkpoint mc = trainer.run_phase1();

  McParams params = McParams::create(net.mc_channels, 0);
  load_params(params, mc);
  double flow_abs = 0;
  int measured = 0;
  for (int i = 0; i < degraded.count(); ++i) {
    const Routing r = route_frame(i, 4, degraded.count());
    for (const int ref : {r.prev_ref, r.next_ref}) {
      const Compensation comp = compensate(tensor_from_frame(degraded.frames[i]),
                                           tensor_from_frame(degraded.frames[ref]), params);
      flow_abs += comp.flow.value().abs().mean();
      ++measured;
    }
  }
  flow_abs /= measured;
  require(flow_abs < 0.1, "mean |total flow| " + fmt("%.4f", flow_abs) + " px >= 0.1 px");
  return "mean |total flow| " + fmt("%.4g", flow_abs) + " px after phase 1";
}

std::string end_to_end_overfit(Ctx& ctx) {
  const fs::path dir = ctx.work / "e2e";
  fs::create_directories(dir);
  ctx.raw_dir = dir / "raw";
  ctx.deg_dir = dir / "deg";
  ctx.enh_dir = dir / "enh";
  ctx.lqf_ckpt = dir / "lqf.ckpt";
  ctx.hqf_ckpt = dir / "hqf.ckpt";
  ctx.lqf_log = dir / "lqf.loss.csv";
  ctx.hqf_log = dir / "hqf.loss.csv";

  require(run_cli("synth --kind translate --frames 16 --height 32 --width 32 --shift 0.5 "
                  "--seed 11 --output " + ctx.raw_dir.string()) == 0,
          "synth failed");
  require(run_cli("degrade --input " + ctx.raw_dir.string() + " --output " +
                  ctx.deg_dir.string() + " --preset q37") == 0,
          "degrade failed");
  // full default desk-scale config, all three phases, both variants
  require(run_cli("train --raw " + ctx.raw_dir.string() + " --degraded " +
                  ctx.deg_dir.string() + " --phase all --variant lqf --seed 1 --out " +
                  ctx.lqf_ckpt.string() + " --log " + ctx.lqf_log.string()) == 0,
          "lqf training failed");
  require(run_cli("train --raw " + ctx.raw_dir.string() + " --degraded " +
                  ctx.deg_dir.string() + " --phase all --variant hqf --seed 2 --out " +
                  ctx.hqf_ckpt.string() + " --log " + ctx.hqf_log.string()) == 0,
          "hqf training failed");
  require(run_cli("enhance --degraded " + ctx.deg_dir.string() + " --ckpt-lqf " +
                  ctx.lqf_ckpt.string() + " --ckpt-hqf " + ctx.hqf_ckpt.string() +
                  " --output " + ctx.enh_dir.string()) == 0,
          "enhance failed");
  require(run_cli("eval --raw " + ctx.raw_dir.string() + " --degraded " +
                  ctx.deg_dir.string() + " --enhanced " + ctx.enh_dir.string() +
                  " --report " + (dir / "report.csv").string() + " --plot " +
                  (dir / "plot.svg").string()) == 0,
          "eval failed");

  const Clip raw = load_clip({ctx.raw_dir, "frame_%04d.pgm", -1, ClipRole::raw});
  const Clip deg = load_clip({ctx.deg_dir, "frame_%04d.pgm", -1, ClipRole::degraded});
  const Clip enh = load_clip({ctx.enh_dir, "frame_%04d.pgm", -1, ClipRole::enhanced});
  const MetricsReport report = evaluate_enhanced(raw, deg, enh, 4);
  require(report.mean_delta >= 0.5,
          "mean delta PSNR " + fmt("%.4f", report.mean_delta) + " dB < +0.5 dB");
  return "mean delta PSNR " + fmt("%.3f", report.mean_delta) + " dB (HQF " +
         fmt("%.3f", report.mean_delta_hqf.value_or(0)) + ", LQF " +
         fmt("%.3f", report.mean_delta_lqf.value_or(0)) + ")";
}

std::string joint_loss_identity(Ctx& ctx) {
  int rows = 0;
  for (const fs::path& log : {ctx.lqf_log, ctx.hqf_log}) {
    require(fs::exists(log), "loss log missing (end-to-end run incomplete)");
    for (const LossRow& r : read_loss_csv(log)) {
      require(within_one_ulp(r.loss_total, r.loss_me + 0.01 * r.loss_enet),
              "step " + std::to_string(r.step) + ": total deviates by more than 1 ulp");
      ++rows;
    }
  }
  return std::to_string(rows) + " logged steps satisfy total = me + 0.01*enet";
}

std::string schedule_conformance(Ctx& ctx) {
  require(fs::exists(ctx.lqf_log), "loss log missing (end-to-end run incomplete)");
  const auto rows = read_loss_csv(ctx.lqf_log);
  const TrainConfig defaults;
  require(int(rows.size()) == defaults.total_epochs * defaults.steps_per_epoch,
          "row count " + std::to_string(rows.size()) + " does not cover 30 epochs");
  int max_epoch = 0;
  for (const LossRow& r : rows) {
    max_epoch = std::max(max_epoch, r.epoch);
    const Scalar expect = r.epoch < 10 ? 1e-4 : 1e-4 / 10.0;
    require(r.lr == expect, "epoch " + std::to_string(r.epoch) + " lr " + fmt("%.9g", r.lr));
  }
  require(max_epoch == 29, "training did not halt at epoch 30");

  const Checkpoint ckpt = Checkpoint::load(ctx.lqf_ckpt);
  require(ckpt.train.batch_size == 8, "checkpoint batch size != 8");
  require(ckpt.epoch == 30, "checkpoint epoch != 30");
  return "lr(0)=1e-4, lr(10)=1e-5, halt at 30 epochs, batch 8";
}

std::string determinism(Ctx& ctx) {
  const fs::path dir = ctx.work / "determinism";
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "tiny.cfg");
    cfg << "total_epochs=3\nphase1_epochs=1\nphase2_epochs=1\nphase3_epochs=1\n"
        << "steps_per_epoch=2\nbatch_size=4\npatch_size=16\n"
        << "channels=8\nblocks=2\nslice_split=4\nmc_channels=4\n";
  }
  require(run_cli("synth --frames 9 --height 16 --width 16 --shift 0.5 --seed 21 --output " +
                  (dir / "raw").string()) == 0,
          "synth failed");
  require(run_cli("degrade --input " + (dir / "raw").string() + " --output " +
                  (dir / "deg").string() + " --preset q37") == 0,
          "degrade failed");
  const std::string base = "train --raw " + (dir / "raw").string() + " --degraded " +
                           (dir / "deg").string() +
                           " --phase all --variant lqf --seed 5 --config " +
                           (dir / "tiny.cfg").string();
  require(run_cli(base + " --out " + (dir / "a.ckpt").string()) == 0, "run A failed");
  require(run_cli(base + " --out " + (dir / "b.ckpt").string()) == 0, "run B failed");
  require(read_file(dir / "a.ckpt") == read_file(dir / "b.ckpt"),
          "checkpoints differ between identical runs");
  require(read_file(dir / "a.ckpt.loss.csv") == read_file(dir / "b.ckpt.loss.csv"),
          "loss logs differ between identical runs");
  return "checkpoints and loss logs bit-identical across reruns";
}

std::string routing_fluctuation(Ctx& ctx) {
  const fs::path dir = ctx.work / "routing";
  fs::create_directories(dir);
  require(run_cli("synth --frames 15 --height 32 --width 32 --shift 1 --seed 4 --output " +
                  (dir / "raw").string()) == 0,
          "synth failed");
  require(run_cli("degrade --input " + (dir / "raw").string() + " --output " +
                  (dir / "deg").string() + " --preset q37") == 0,
          "degrade failed");
  require(run_cli("eval --raw " + (dir / "raw").string() + " --degraded " +
                  (dir / "deg").string() + " --enhanced " + (dir / "deg").string() +
                  " --report " + (dir / "report.csv").string() + " --plot " +
                  (dir / "plot.svg").string()) == 0,
          "eval failed");

  std::ifstream in(dir / "report.csv");
  std::string line;
  require(bool(std::getline(in, line)), "empty report");
  std::vector<std::string> labels;
  std::vector<double> psnr_in;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string frame, label, model, pin;
    std::getline(ss, frame, ',');
    std::getline(ss, label, ',');
    std::getline(ss, model, ',');
    std::getline(ss, pin, ',');
    labels.push_back(label);
    psnr_in.push_back(std::stod(pin));
  }
  require(labels.size() == 15, "report has " + std::to_string(labels.size()) + " rows, not 15");
  for (int i = 0; i < 15; ++i)
    require((labels[i] == "HQF") == (i % 4 == 0), "label at frame " + std::to_string(i));
  for (int i = 0; i < 15; i += 4) {
    if (i > 0) require(psnr_in[i] > psnr_in[i - 1], "no PSNR peak at HQF " + std::to_string(i));
    if (i + 1 < 15) require(psnr_in[i] > psnr_in[i + 1],
                            "no PSNR peak at HQF " + std::to_string(i));
  }
  return "15 rows, HQF labels at i%4==0, PSNR peaks on HQF frames";
}

std::string psnr_oracle(Ctx&) {
  const Frame a = Frame::Constant(8, 8, 10.0);
  require(psnr(a, a) == 100.0, "identical-frame cap");
  const Scalar zero_db = psnr(Frame::Zero(8, 8), Frame::Constant(8, 8, 255.0));
  require(std::abs(zero_db - 0.0) < 1e-3, "255-difference should give 0 dB");
  const Scalar sixteen = psnr(a, Frame::Constant(8, 8, 26.0));
  require(std::abs(sixteen - 24.0484039556) < 1e-3,
          "16-difference PSNR " + fmt("%.6f", sixteen));
  return "cap 100 dB, 0 dB, 24.048 dB reproduced within 1e-3 dB";
}

}  // namespace

int main() {
  Ctx ctx;
  {
    std::string templ = (fs::temp_directory_path() / "sdts_acceptance_XXXXXX").string();
    char* made = ::mkdtemp(templ.data());
    if (!made) {
      std::cerr << "cannot create work directory\n";
      return 1;
    }
    ctx.work = fs::path(made);
  }

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<std::string(Ctx&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient-suite", 60, gradient_suite},
      {"identity-at-init", 120, identity_at_init},
      {"warp-oracle", 60, warp_oracle},
      {"phase1-mc-oracle", 300, phase1_mc_oracle},
      {"still-scene-oracle", 300, still_scene_oracle},
      {"end-to-end-overfit", 900, end_to_end_overfit},
      {"joint-loss-identity", 60, joint_loss_identity},
      {"schedule-conformance", 60, schedule_conformance},
      {"determinism", 300, determinism},
      {"routing-fluctuation", 120, routing_fluctuation},
      {"psnr-oracle", 60, psnr_oracle},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = c.run(ctx);
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (ok && seconds > c.budget_s) {
      ok = false;
      detail = "exceeded runtime budget: " + fmt("%.1f", seconds) + " s > " +
               fmt("%.0f", c.budget_s) + " s";
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << detail << " ("
              << fmt("%.1f", seconds) << " s)\n";
    std::cout.flush();
    if (!ok) ++failed;
  }

  if (failed == 0) {
    fs::remove_all(ctx.work);
    std::cout << "acceptance: all " << criteria.size() << " criteria passed\n";
    return 0;
  }
  std::cout << "acceptance: " << failed << " of " << criteria.size()
            << " criteria FAILED (artifacts kept in " << ctx.work.string() << ")\n";
  return 1;
}
