#include "sdts/trainer.hpp"

#include "sdts/optim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdts {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (lr < 0.0) throw std::invalid_argument("lr must be >= 0");
  if (decay_epoch < 0) throw std::invalid_argument("decay_epoch must be >= 0");
  if (decay_factor <= 0.0) throw std::invalid_argument("decay_factor must be > 0");
  if (total_epochs < 1) throw std::invalid_argument("total_epochs must be >= 1");
  if (lambda2 <= 0.0) throw std::invalid_argument("lambda2 must be > 0");
  if (patch_size < 4 || patch_size % 4 != 0)
    throw std::invalid_argument("patch_size must be a positive multiple of 4");
  if (phase1_epochs < 0 || phase2_epochs < 0 || phase3_epochs < 0)
    throw std::invalid_argument("phase lengths must be >= 0");
  if (phase1_epochs + phase2_epochs + phase3_epochs != total_epochs)
    throw std::invalid_argument("phase lengths must sum to total_epochs");
  if (steps_per_epoch < 1) throw std::invalid_argument("steps_per_epoch must be >= 1");
}

Scalar lr_schedule(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.total_epochs)
    throw std::invalid_argument("epoch " + std::to_string(epoch) +
                                " outside the training budget [0, " +
                                std::to_string(cfg.total_epochs) + ")");
  return epoch < cfg.decay_epoch ? cfg.lr : cfg.lr / cfg.decay_factor;
}

Routing route_frame(int index, int period, int n_frames) {
  if (period < 2) throw std::invalid_argument("period must be >= 2");
  if (index < 0 || index >= n_frames)
    throw std::invalid_argument("frame index " + std::to_string(index) +
                                " out of range [0, " + std::to_string(n_frames) + ")");
  const int last_hqf = ((n_frames - 1) / period) * period;
  Routing r;
  r.model = index % period == 0 ? Variant::hqf : Variant::lqf;
  r.prev_ref = index == 0 ? 0 : ((index - 1) / period) * period;
  r.next_ref = std::min(((index + period) / period) * period, last_hqf);
  return r;
}

PairSampler::PairSampler(const Clip& raw, const Clip& degraded, const TrainConfig& cfg,
                         Variant variant, int period, std::uint64_t seed)
    : raw_(&raw), degraded_(&degraded), cfg_(cfg), period_(period), rng_(seed) {
  cfg.validate();
  raw.validate();
  degraded.validate();
  if (variant == Variant::mc)
    throw std::invalid_argument("pair sampling needs a frame-class variant (lqf or hqf)");
  if (raw.count() != degraded.count())
    throw std::invalid_argument("raw/degraded clip lengths differ: " +
                                std::to_string(raw.count()) + " vs " +
                                std::to_string(degraded.count()));
  if (raw.height() != degraded.height() || raw.width() != degraded.width())
    throw std::invalid_argument("raw/degraded clip dims differ");
  if (raw.count() < period + 1)
    throw std::invalid_argument("clip must have at least period+1 = " +
                                std::to_string(period + 1) + " frames, got " +
                                std::to_string(raw.count()));
  if (cfg.patch_size > raw.height() || cfg.patch_size > raw.width())
    throw std::invalid_argument("patch_size " + std::to_string(cfg.patch_size) +
                                " exceeds clip dims " + std::to_string(raw.height()) + "x" +
                                std::to_string(raw.width()));
  const bool want_hqf = variant == Variant::hqf;
  for (int i = 0; i < raw.count(); ++i)
    if ((i % period == 0) == want_hqf) candidates_.push_back(i);
  max_oy_ = raw.height() - cfg.patch_size;
  max_ox_ = raw.width() - cfg.patch_size;
}

TrainingPair PairSampler::next() {
  const int index = candidates_[rng_() % candidates_.size()];
  const int oy = int(rng_() % std::uint64_t(max_oy_ + 1));
  const int ox = int(rng_() % std::uint64_t(max_ox_ + 1));
  const Routing routing = route_frame(index, period_, raw_->count());
  const int p = cfg_.patch_size;

  TrainingPair pair;
  pair.target_index = index;
  pair.label = routing.model == Variant::hqf ? FrameLabel::HQF : FrameLabel::LQF;
  pair.raw_target = raw_->frames[index].block(oy, ox, p, p);
  pair.cmp_target = degraded_->frames[index].block(oy, ox, p, p);
  pair.raw_prev = raw_->frames[routing.prev_ref].block(oy, ox, p, p);
  pair.cmp_prev = degraded_->frames[routing.prev_ref].block(oy, ox, p, p);
  pair.raw_next = raw_->frames[routing.next_ref].block(oy, ox, p, p);
  pair.cmp_next = degraded_->frames[routing.next_ref].block(oy, ox, p, p);
  return pair;
}

void write_loss_csv(const std::vector<LossRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write loss log " + path.string());
  out << "step,epoch,lr,loss_me,loss_enet,loss_total\n";
  char buf[256];
  for (const LossRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%.17g,%.17g,%.17g,%.17g\n", r.step, r.epoch, r.lr,
                  r.loss_me, r.loss_enet, r.loss_total);
    out << buf;
  }
}

std::vector<LossRow> read_loss_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open loss log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,epoch,lr,loss_me,loss_enet,loss_total")
    throw std::runtime_error("bad loss log header in " + path.string());
  std::vector<LossRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossRow r;
    std::istringstream ss(line);
    char comma;
    ss >> r.step >> comma >> r.epoch >> comma >> r.lr >> comma >> r.loss_me >> comma >>
        r.loss_enet >> comma >> r.loss_total;
    if (!ss) throw std::runtime_error("bad loss log row in " + path.string());
    rows.push_back(r);
  }
  return rows;
}

Trainer::Trainer(Clip raw, Clip degraded, TrainConfig cfg, NetConfig net, Variant variant,
                 int period)
    : raw_(std::move(raw)),
      degraded_(std::move(degraded)),
      cfg_(cfg),
      net_(net),
      variant_(variant),
      period_(period),
      params_(SdtsParams::create(net, derive_seed(cfg.seed, 0))) {
  cfg_.validate();
  net_.validate();
  if (variant_ == Variant::mc)
    throw std::invalid_argument("trainer variant must be lqf or hqf");
  if (degraded_.role == ClipRole::degraded) {
    for (int i = 0; i < degraded_.count(); ++i) {
      const FrameLabel expect = i % period_ == 0 ? FrameLabel::HQF : FrameLabel::LQF;
      if (degraded_.labels[i] != expect)
        throw std::invalid_argument("degraded clip labels disagree with period " +
                                    std::to_string(period_) + " at frame " +
                                    std::to_string(i));
    }
  }
}

void Trainer::train_range(Objective obj, int epoch_begin, int epoch_end,
                          std::vector<Tensor> trainable, PairSampler& sampler) {
  AdamState adam;
  std::vector<Frame> raw_t(cfg_.batch_size), cmp_t(cfg_.batch_size);
  std::vector<Frame> raw_p(cfg_.batch_size), cmp_p(cfg_.batch_size);
  std::vector<Frame> raw_n(cfg_.batch_size), cmp_n(cfg_.batch_size);

  for (int epoch = epoch_begin; epoch < epoch_end; ++epoch) {
    adam.lr = lr_schedule(epoch, cfg_);
    for (int s = 0; s < cfg_.steps_per_epoch; ++s) {
      for (int b = 0; b < cfg_.batch_size; ++b) {
        TrainingPair pair = sampler.next();
        raw_t[b] = std::move(pair.raw_target);
        cmp_t[b] = std::move(pair.cmp_target);
        raw_p[b] = std::move(pair.raw_prev);
        cmp_p[b] = std::move(pair.cmp_prev);
        raw_n[b] = std::move(pair.raw_next);
        cmp_n[b] = std::move(pair.cmp_next);
      }
      const Tensor raw_target = tensor_from_frames(raw_t);
      const Tensor cmp_target = tensor_from_frames(cmp_t);
      const Tensor raw_prev = tensor_from_frames(raw_p);
      const Tensor cmp_prev = tensor_from_frames(cmp_p);
      const Tensor raw_next = tensor_from_frames(raw_n);
      const Tensor cmp_next = tensor_from_frames(cmp_n);

      Graph graph;
      Scalar me_v = 0.0, enet_v = 0.0;
      Tensor loss;
      switch (obj) {
        case Objective::motion: {
          const Compensation prev = compensate(cmp_target, cmp_prev, params_.mc);
          const Compensation next = compensate(cmp_target, cmp_next, params_.mc);
          loss = mc_loss(raw_target, {raw_prev, raw_next}, {prev.flow, next.flow});
          me_v = loss.item();
          break;
        }
        case Objective::enhancement: {
          const SdtsOutput out = sdts_forward(cmp_prev, cmp_target, cmp_next, params_, net_);
          loss = mse_loss(out.recon, raw_target);
          enet_v = loss.item();
          break;
        }
        case Objective::joint: {
          const SdtsOutput out = sdts_forward(cmp_prev, cmp_target, cmp_next, params_, net_);
          const Tensor me =
              mc_loss(raw_target, {raw_prev, raw_next}, {out.prev.flow, out.next.flow});
          const Tensor enet = mse_loss(out.recon, raw_target);
          loss = add(me, scale(enet, cfg_.lambda2));
          me_v = me.item();
          enet_v = enet.item();
          break;
        }
      }
      const Scalar total_v = me_v + cfg_.lambda2 * enet_v;
      if (!std::isfinite(total_v))
        throw TrainingDiverged(global_step_, "non-finite loss at step " +
                                                 std::to_string(global_step_) +
                                                 "; last good step " +
                                                 std::to_string(global_step_ - 1));
      graph.backward(loss);
      adam_step(trainable, adam);
      log_.push_back({global_step_, epoch, adam.lr, me_v, enet_v, total_v});
      ++global_step_;
    }
  }
}

Checkpoint Trainer::snapshot(Variant variant, int epoch, int phase, std::string provenance,
                             bool mc_only) const {
  NamedParams named;
  if (mc_only)
    params_.mc.collect("mc", named);
  else
    named = params_.named();
  // deep-copy values so later training does not mutate the checkpoint
  NamedParams frozen;
  frozen.reserve(named.size());
  for (const auto& [name, tensor] : named)
    frozen.emplace_back(name, Tensor::from_data(tensor.shape(), tensor.value(), true));
  return make_checkpoint(variant, net_, cfg_, epoch, phase, std::move(provenance),
                         std::move(frozen));
}

void Trainer::do_phase1() {
  PairSampler sampler(raw_, degraded_, cfg_, variant_, period_, derive_seed(cfg_.seed, 1));
  train_range(Objective::motion, 0, cfg_.phase1_epochs, params_.mc.parameters(), sampler);
}

void Trainer::do_phase2() {
  PairSampler sampler(raw_, degraded_, cfg_, variant_, period_, derive_seed(cfg_.seed, 2));
  params_.mc.set_requires_grad(false);
  try {
    train_range(Objective::enhancement, cfg_.phase1_epochs,
                cfg_.phase1_epochs + cfg_.phase2_epochs, params_.enhancement_parameters(),
                sampler);
  } catch (...) {
    params_.mc.set_requires_grad(true);
    throw;
  }
  params_.mc.set_requires_grad(true);
}

void Trainer::do_phase3() {
  PairSampler sampler(raw_, degraded_, cfg_, variant_, period_, derive_seed(cfg_.seed, 3));
  train_range(Objective::joint, cfg_.phase1_epochs + cfg_.phase2_epochs, cfg_.total_epochs,
              params_.parameters(), sampler);
}

Checkpoint Trainer::run_phase1() {
  do_phase1();
  return snapshot(Variant::mc, cfg_.phase1_epochs, 1,
                  "phase1(" + to_string(variant_) + ")", true);
}

Checkpoint Trainer::run_phase2(const Checkpoint& mc_ckpt) {
  if (!(mc_ckpt.net == net_))
    throw std::invalid_argument("MC checkpoint NetConfig does not match trainer config");
  load_params(params_.mc, mc_ckpt);
  do_phase2();
  return snapshot(variant_, cfg_.phase1_epochs + cfg_.phase2_epochs, 2,
                  mc_ckpt.provenance + " > phase2", false);
}

Checkpoint Trainer::run_phase3(const Checkpoint& init_ckpt) {
  if (!(init_ckpt.net == net_))
    throw std::invalid_argument("init checkpoint NetConfig does not match trainer config");
  load_params(params_, init_ckpt);
  do_phase3();
  return snapshot(variant_, cfg_.total_epochs, 3, init_ckpt.provenance + " > phase3", false);
}

Checkpoint Trainer::run_all() {
  do_phase1();
  do_phase2();
  do_phase3();
  return snapshot(variant_, cfg_.total_epochs, 3,
                  "phase1(" + to_string(variant_) + ") > phase2 > phase3", false);
}

Checkpoint Trainer::finetune(const Checkpoint& src, const std::string& src_label) {
  if (!(src.net == net_))
    throw std::invalid_argument("finetune source NetConfig does not match trainer config");
  if (src.variant != variant_)
    throw std::invalid_argument("finetune source variant " + to_string(src.variant) +
                                " does not match trainer variant " + to_string(variant_));
  load_params(params_, src);
  do_phase3();
  return snapshot(variant_, cfg_.total_epochs, 3,
                  src.provenance + " > finetune(" + src_label + ")", false);
}

}  // namespace sdts
