#pragma once

#include "sdts/checkpoint.hpp"
#include "sdts/clip.hpp"
#include "sdts/trainer.hpp"

namespace sdts {

/// Rebuilds a full model from a checkpoint (variant must be lqf or hqf).
SdtsParams params_from_checkpoint(const Checkpoint& ckpt);

/// Routes every frame to its model and nearest HQF references, runs the
/// forward pass, clamps to [0, 255]. Appends one Routing per frame to
/// routing_out when given.
Clip enhance_clip(const Clip& degraded, const Checkpoint& lqf, const Checkpoint& hqf,
                  int period, std::vector<Routing>* routing_out = nullptr);

}  // namespace sdts
