#pragma once

#include "sdts/ops.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sdts {

/// A flow field is a (n, 2, h, w) tensor: channel 0 holds the x (column)
/// displacement, channel 1 the y (row) displacement, in pixels at the field's
/// own resolution.
using FlowField = Tensor;

/// One flow estimator branch: five 3x3 conv layers, ReLU between them, a
/// linear 2-channel output layer. The output layer starts at zero so an
/// untrained branch predicts the identity warp.
struct FlowEstimator {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  static FlowEstimator create(int in_channels, int hidden, std::mt19937_64& rng);
  Tensor run(const Tensor& input) const;
  void collect(const std::string& prefix, NamedParams& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
};

/// Parameters of the three branches: coarse (x4 pyramid), fine (x2 pyramid)
/// and still (full resolution).
struct McParams {
  FlowEstimator coarse;
  FlowEstimator fine;
  FlowEstimator still;

  static McParams create(int hidden, std::uint64_t seed);
  static McParams create(int hidden, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
  std::vector<Tensor> parameters() const;
  void set_requires_grad(bool on);
};

/// x4-downsampled estimation; the low-res flow is upsampled back and its
/// displacement values are multiplied by 4.
FlowField estimate_flow_coarse(const Tensor& target, const Tensor& neighbor,
                               const FlowEstimator& params);

/// x2-scale residual refinement on (target, coarse-warped neighbor, coarse
/// flow); values multiplied by 2 on upsample.
FlowField estimate_flow_fine(const Tensor& target, const Tensor& neighbor_coarse_warped,
                             const FlowField& coarse_flow, const FlowEstimator& params);

/// Full-resolution residual branch for still scenes.
FlowField estimate_flow_still(const Tensor& target, const Tensor& neighbor_fine_warped,
                              const FlowEstimator& params);

/// Elementwise sum of the three branch flows.
FlowField compose_total_flow(const FlowField& coarse, const FlowField& fine,
                             const FlowField& still);

struct Compensation {
  Tensor warped;
  FlowField flow;
};

/// coarse -> warp -> fine -> warp -> still, one final warp of the neighbor by
/// the composed total flow.
Compensation compensate(const Tensor& target, const Tensor& neighbor, const McParams& params);

/// Sum over neighbors of mse(warp(raw_neighbor_i, flow_i), raw_target).
Tensor mc_loss(const Tensor& raw_target, const std::vector<Tensor>& raw_neighbors,
               const std::vector<FlowField>& flows);

}  // namespace sdts
