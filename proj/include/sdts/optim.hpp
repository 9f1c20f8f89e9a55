#pragma once

#include "sdts/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sdts {

/// Adam state: first/second moments per parameter, step counter, and the
/// hyperparameters. Moments start at zero and t increments by one per step.
struct AdamState {
  Scalar lr = 1e-4;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
  long t = 0;
  std::vector<Array> m;
  std::vector<Array> v;
};

/// One bias-corrected Adam update over `params` (fixed order across calls),
/// then zeroes their gradients. Rejects parameters with no gradient buffer.
void adam_step(std::span<Tensor> params, AdamState& state);

/// Deterministic map from a raw 64-bit draw to [0, 1).
inline Scalar unit_uniform(std::mt19937_64& rng) {
  return Scalar(rng() >> 11) * 0x1.0p-53;
}

inline Scalar uniform(std::mt19937_64& rng, Scalar lo, Scalar hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Conv weight (c_out, c_in, k, k), uniform in +-sqrt(6 / (fan_in + fan_out)).
Tensor glorot_conv_weight(int c_out, int c_in, int k, std::mt19937_64& rng);

/// Conv weight of the same shape, all zeros (identity-start output layers).
Tensor zero_conv_weight(int c_out, int c_in, int k);

Tensor zero_bias(int c_out);

}  // namespace sdts
