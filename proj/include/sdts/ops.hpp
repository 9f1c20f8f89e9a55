#pragma once

#include "sdts/tensor.hpp"

#include <utility>
#include <vector>

namespace sdts {

/// Differentiable operators over NCHW tensors. Every op is a free function
/// returning a fresh tensor; when a Graph is active and any input requires
/// gradients, the op records its backward step onto the tape.
///
/// Conventions pinned here:
///  - bilinear_sample clamps sample coordinates to the border; the flow
///    gradient is zero wherever the clamp is engaged.
///  - bilinear_upsample2 aligns corners: output corner pixels sample input
///    corner pixels exactly. Displacement values are NOT rescaled; callers
///    that upsample flows multiply them separately (see scale()).

/// 2-D convolution, weight (c_out, c_in, k, k) with odd k, bias (1, c_out, 1, 1).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, int padding = 0);

/// Elementwise max(0, x). Backward passes gradient where x > 0 (zero at 0).
Tensor relu(const Tensor& x);

/// Warp: out(x, y) = image(x + flow_x(x, y), y + flow_y(x, y)) with bilinear
/// weights. flow has 2 channels: channel 0 is the x (column) displacement,
/// channel 1 the y (row) displacement, in pixels. Differentiable in both
/// arguments.
Tensor bilinear_sample(const Tensor& image, const Tensor& flow);

/// 2x2 block mean; spatial dims must be even.
Tensor avg_downsample2(const Tensor& x);

/// Doubles both spatial dims by corner-aligned bilinear interpolation.
Tensor bilinear_upsample2(const Tensor& x);

/// Stack along the channel dim, order preserved.
Tensor concat_channels(const std::vector<Tensor>& parts);

/// Split channels at `split`: ([0, split), [split, c)). Both halves feed
/// gradients back into x additively.
std::pair<Tensor, Tensor> slice_channels(const Tensor& x, int split);

Tensor add(const Tensor& a, const Tensor& b);

/// k * x for a compile-time-known constant k.
Tensor scale(const Tensor& x, Scalar k);

/// Sum of all elements, as a scalar tensor.
Tensor sum(const Tensor& x);

/// Mean of squared differences over all elements. target must not require
/// gradients.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace sdts
