#pragma once

#include "sdts/tensor.hpp"

#include <string>
#include <vector>

namespace sdts {

/// Single-channel frame, values nominally in [0, 255].
using Frame = Eigen::ArrayXXd;  // (rows, cols) = (h, w)

enum class FrameLabel { HQF, LQF };
enum class ClipRole { raw, degraded, enhanced };

std::string to_string(FrameLabel label);
FrameLabel frame_label_from_string(const std::string& s);

/// Ordered frame sequence with per-frame quality labels. Frames may carry
/// edge-replication padding; orig_h/orig_w remember the pre-padding dims so
/// outputs can be cropped back (0 means "not padded").
struct Clip {
  std::vector<Frame> frames;
  std::vector<FrameLabel> labels;
  ClipRole role = ClipRole::raw;
  int orig_h = 0;
  int orig_w = 0;

  int count() const { return int(frames.size()); }
  int height() const { return frames.empty() ? 0 : int(frames.front().rows()); }
  int width() const { return frames.empty() ? 0 : int(frames.front().cols()); }
  void validate() const;
};

/// Frame cropped back to the clip's original (pre-padding) dims.
Frame cropped_frame(const Clip& clip, int index);

/// Edge-replication padding to at least (rows, cols).
Frame pad_edge(const Frame& f, int rows, int cols);
Frame pad_to_multiple(const Frame& f, int multiple);

Tensor tensor_from_frame(const Frame& f);
Tensor tensor_from_frames(const std::vector<Frame>& frames);  // batch (n,1,h,w)
Frame frame_from_tensor(const Tensor& t, int n = 0, int c = 0);

}  // namespace sdts
