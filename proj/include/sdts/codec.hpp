#pragma once

#include "sdts/clip.hpp"

#include <cstdint>
#include <string_view>

namespace sdts {

/// Periodic-quality degradation: every frame is block-DCT quantized, with a
/// finer step q_low at HQF positions (index % period == 0) and a coarser
/// step q_high everywhere else.
struct DegradeConfig {
  int block_size = 8;
  Scalar q_low = 24.0;
  Scalar q_high = 56.0;
  int period = 4;

  void validate() const;
  /// Named presets: "q37" = (24, 56), "q32" = (16, 40).
  static DegradeConfig preset(std::string_view name);
};

/// Blockwise orthonormal 2-D DCT, coefficients rounded to multiples of q,
/// inverse transform, clamp to [0, 255]. Frame dims must be multiples of
/// block_size.
Frame degrade_frame(const Frame& frame, Scalar q, int block_size);

/// Degrades every frame of a raw clip (padding odd-sized frames to the block
/// grid internally) and attaches HQF/LQF labels.
Clip degrade_clip(const Clip& clip, const DegradeConfig& cfg);

enum class SynthKind { translate, still, ramp };
SynthKind synth_kind_from_string(const std::string& s);

/// Deterministic test clips: `translate` pans a seeded smooth texture by
/// shift_px per frame (bilinear resample, border clamp), `still` repeats it,
/// `ramp` is a static horizontal gradient.
Clip synth_clip(SynthKind kind, int n_frames, int h, int w, Scalar shift_px,
                std::uint64_t seed);

}  // namespace sdts
