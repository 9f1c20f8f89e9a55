#include "sdts/enhance.hpp"

#include <stdexcept>

namespace sdts {

SdtsParams params_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.variant == Variant::mc)
    throw std::invalid_argument("checkpoint holds only MC parameters, need a full model");
  SdtsParams params = SdtsParams::create(ckpt.net, 0);
  load_params(params, ckpt);
  return params;
}

Clip enhance_clip(const Clip& degraded, const Checkpoint& lqf, const Checkpoint& hqf,
                  int period, std::vector<Routing>* routing_out) {
  degraded.validate();
  if (lqf.variant != Variant::lqf)
    throw std::invalid_argument("lqf checkpoint is tagged '" + to_string(lqf.variant) + "'");
  if (hqf.variant != Variant::hqf)
    throw std::invalid_argument("hqf checkpoint is tagged '" + to_string(hqf.variant) + "'");
  if (!(lqf.net == hqf.net))
    throw std::invalid_argument("lqf/hqf checkpoints have different NetConfig");

  const SdtsParams lqf_params = params_from_checkpoint(lqf);
  const SdtsParams hqf_params = params_from_checkpoint(hqf);
  const NetConfig net = lqf.net;

  Clip out;
  out.role = ClipRole::enhanced;
  out.labels = degraded.labels;
  out.orig_h = degraded.orig_h;
  out.orig_w = degraded.orig_w;
  out.frames.reserve(degraded.count());

  for (int i = 0; i < degraded.count(); ++i) {
    const Routing routing = route_frame(i, period, degraded.count());
    if (routing_out) routing_out->push_back(routing);
    const SdtsParams& params =
        routing.model == Variant::hqf ? hqf_params : lqf_params;
    const Tensor prev = tensor_from_frame(degraded.frames[routing.prev_ref]);
    const Tensor target = tensor_from_frame(degraded.frames[i]);
    const Tensor next = tensor_from_frame(degraded.frames[routing.next_ref]);
    const SdtsOutput result = sdts_forward(prev, target, next, params, net);
    Frame recon = frame_from_tensor(result.recon);
    out.frames.push_back(recon.max(0.0).min(255.0));
  }
  return out;
}

}  // namespace sdts
