#pragma once

#include "sdts/mc.hpp"

namespace sdts {

/// Network widths. neighbor count is fixed at 2 (nearest previous and next
/// high-quality frames).
struct NetConfig {
  int channels = 32;
  int blocks = 4;
  int slice_split = 16;  // channels / 2
  int mc_channels = 16;

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

/// Hierarchical pairwise merge: shared lift conv, one merge conv per
/// (prev, target) / (target, next) pair, one final merge.
struct FusionParams {
  Tensor lift_w, lift_b;
  Tensor merge_prev_w, merge_prev_b;
  Tensor merge_next_w, merge_next_b;
  Tensor merge_final_w, merge_final_b;

  static FusionParams create(const NetConfig& cfg, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
};

/// Channel-split residual block: the long half runs through two conv+ReLU
/// stages, is re-joined with the untouched short half by concatenation and a
/// 1x1 merge conv, and the block input is added back.
struct ResSliceBlockParams {
  Tensor conv0_w, conv0_b;
  Tensor conv1_w, conv1_b;
  Tensor merge_w, merge_b;

  static ResSliceBlockParams create(const NetConfig& cfg, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
};

struct EnetParams {
  Tensor head_w, head_b;
  std::vector<ResSliceBlockParams> blocks;
  Tensor tail_w, tail_b;  // tail starts at zero: the net begins as identity

  static EnetParams create(const NetConfig& cfg, std::mt19937_64& rng);
  void collect(const std::string& prefix, NamedParams& out) const;
  void append_parameters(std::vector<Tensor>& out) const;
};

struct SdtsParams {
  McParams mc;
  FusionParams fusion;
  EnetParams enet;

  static SdtsParams create(const NetConfig& cfg, std::uint64_t seed);
  NamedParams named() const;
  std::vector<Tensor> parameters() const;
  std::vector<Tensor> enhancement_parameters() const;  // fusion + enet
};

Tensor slow_fuse(const Tensor& target, const Tensor& warped_prev, const Tensor& warped_next,
                 const FusionParams& params);

Tensor res_slice_block(const Tensor& features, const ResSliceBlockParams& params, int split);

Tensor enet_forward(const Tensor& fused, const Tensor& target, const EnetParams& params,
                    const NetConfig& cfg);

struct SdtsOutput {
  Tensor recon;
  Compensation prev;
  Compensation next;
};

/// Full forward pass: compensate both neighbors onto the target, slow-fuse,
/// enhance, add the target back.
SdtsOutput sdts_forward(const Tensor& prev_hqf, const Tensor& target, const Tensor& next_hqf,
                        const SdtsParams& params, const NetConfig& cfg);

}  // namespace sdts
