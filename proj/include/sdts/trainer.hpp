#pragma once

#include "sdts/checkpoint.hpp"
#include "sdts/clip.hpp"

#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

namespace sdts {

/// Which model handles a frame and which HQF indices serve as references.
/// Frames at the clip edges reuse the nearest existing HQF (index 0 refs
/// itself on the left).
struct Routing {
  Variant model;
  int prev_ref;
  int next_ref;
};

Routing route_frame(int index, int period, int n_frames);

/// Co-located raw/compressed patches for one target frame and its routed
/// HQF references.
struct TrainingPair {
  int target_index = 0;
  FrameLabel label = FrameLabel::LQF;
  Frame raw_target, cmp_target;
  Frame raw_prev, cmp_prev;
  Frame raw_next, cmp_next;
};

/// Seeded stream of training pairs for one model variant: uniformly random
/// target index (within the variant's frame class) and patch origin.
class PairSampler {
 public:
  PairSampler(const Clip& raw, const Clip& degraded, const TrainConfig& cfg,
              Variant variant, int period, std::uint64_t seed);
  TrainingPair next();

 private:
  const Clip* raw_;
  const Clip* degraded_;
  TrainConfig cfg_;
  int period_;
  std::vector<int> candidates_;
  std::mt19937_64 rng_;
  int max_oy_ = 0;
  int max_ox_ = 0;
};

struct LossRow {
  long step = 0;
  int epoch = 0;
  Scalar lr = 0;
  Scalar loss_me = 0;
  Scalar loss_enet = 0;
  Scalar loss_total = 0;
};

void write_loss_csv(const std::vector<LossRow>& rows, const std::filesystem::path& path);
std::vector<LossRow> read_loss_csv(const std::filesystem::path& path);

/// Thrown when a training step produces a non-finite loss.
struct TrainingDiverged : std::runtime_error {
  long failed_step;
  TrainingDiverged(long step, const std::string& msg)
      : std::runtime_error(msg), failed_step(step) {}
};

/// Three-phase training on one aligned raw/degraded clip pair:
///   phase 1 trains the MC branches on the motion loss,
///   phase 2 trains fusion + enhancement with the MC branches frozen,
///   phase 3 fine-tunes everything on loss_me + lambda2 * loss_enet.
/// Epochs count globally across phases and drive the lr schedule. Losses
/// a phase does not compute are logged as zero; the logged total is always
/// loss_me + lambda2 * loss_enet.
class Trainer {
 public:
  Trainer(Clip raw, Clip degraded, TrainConfig cfg, NetConfig net, Variant variant,
          int period);

  Checkpoint run_phase1();
  Checkpoint run_phase2(const Checkpoint& mc_ckpt);
  Checkpoint run_phase3(const Checkpoint& init_ckpt);
  Checkpoint run_all();
  /// Loads all parameters from src, then runs the phase-3 schedule on this
  /// trainer's data.
  Checkpoint finetune(const Checkpoint& src, const std::string& src_label);

  const std::vector<LossRow>& log() const { return log_; }
  void write_log(const std::filesystem::path& path) const { write_loss_csv(log_, path); }
  const SdtsParams& params() const { return params_; }

 private:
  enum class Objective { motion, enhancement, joint };

  void train_range(Objective obj, int epoch_begin, int epoch_end,
                   std::vector<Tensor> trainable, PairSampler& sampler);
  Checkpoint snapshot(Variant variant, int epoch, int phase, std::string provenance,
                      bool mc_only) const;
  void do_phase1();
  void do_phase2();
  void do_phase3();

  Clip raw_;
  Clip degraded_;
  TrainConfig cfg_;
  NetConfig net_;
  Variant variant_;
  int period_;
  SdtsParams params_;
  std::vector<LossRow> log_;
  long global_step_ = 0;
};

}  // namespace sdts
