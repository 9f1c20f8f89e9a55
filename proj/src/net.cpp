#include "sdts/net.hpp"

#include "sdts/optim.hpp"

#include <stdexcept>

namespace sdts {

void NetConfig::validate() const {
  if (channels < 2) throw std::invalid_argument("net channels must be >= 2");
  if (blocks < 1) throw std::invalid_argument("net blocks must be >= 1");
  if (slice_split <= 0 || slice_split >= channels)
    throw std::invalid_argument("slice_split must be in (0, channels), got " +
                                std::to_string(slice_split));
  if (mc_channels < 1) throw std::invalid_argument("mc_channels must be >= 1");
}

FusionParams FusionParams::create(const NetConfig& cfg, std::mt19937_64& rng) {
  FusionParams p;
  const int c = cfg.channels;
  p.lift_w = glorot_conv_weight(c, 1, 3, rng);
  p.lift_b = zero_bias(c);
  p.merge_prev_w = glorot_conv_weight(c, 2 * c, 3, rng);
  p.merge_prev_b = zero_bias(c);
  p.merge_next_w = glorot_conv_weight(c, 2 * c, 3, rng);
  p.merge_next_b = zero_bias(c);
  p.merge_final_w = glorot_conv_weight(c, 2 * c, 3, rng);
  p.merge_final_b = zero_bias(c);
  return p;
}

void FusionParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".lift.weight", lift_w);
  out.emplace_back(prefix + ".lift.bias", lift_b);
  out.emplace_back(prefix + ".merge_prev.weight", merge_prev_w);
  out.emplace_back(prefix + ".merge_prev.bias", merge_prev_b);
  out.emplace_back(prefix + ".merge_next.weight", merge_next_w);
  out.emplace_back(prefix + ".merge_next.bias", merge_next_b);
  out.emplace_back(prefix + ".merge_final.weight", merge_final_w);
  out.emplace_back(prefix + ".merge_final.bias", merge_final_b);
}

void FusionParams::append_parameters(std::vector<Tensor>& out) const {
  for (const Tensor& t : {lift_w, lift_b, merge_prev_w, merge_prev_b, merge_next_w,
                          merge_next_b, merge_final_w, merge_final_b})
    out.push_back(t);
}

ResSliceBlockParams ResSliceBlockParams::create(const NetConfig& cfg, std::mt19937_64& rng) {
  ResSliceBlockParams p;
  const int long_c = cfg.channels - cfg.slice_split;
  p.conv0_w = glorot_conv_weight(long_c, long_c, 3, rng);
  p.conv0_b = zero_bias(long_c);
  p.conv1_w = glorot_conv_weight(long_c, long_c, 3, rng);
  p.conv1_b = zero_bias(long_c);
  p.merge_w = glorot_conv_weight(cfg.channels, cfg.channels, 1, rng);
  p.merge_b = zero_bias(cfg.channels);
  return p;
}

void ResSliceBlockParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".conv0.weight", conv0_w);
  out.emplace_back(prefix + ".conv0.bias", conv0_b);
  out.emplace_back(prefix + ".conv1.weight", conv1_w);
  out.emplace_back(prefix + ".conv1.bias", conv1_b);
  out.emplace_back(prefix + ".merge.weight", merge_w);
  out.emplace_back(prefix + ".merge.bias", merge_b);
}

void ResSliceBlockParams::append_parameters(std::vector<Tensor>& out) const {
  for (const Tensor& t : {conv0_w, conv0_b, conv1_w, conv1_b, merge_w, merge_b})
    out.push_back(t);
}

EnetParams EnetParams::create(const NetConfig& cfg, std::mt19937_64& rng) {
  EnetParams p;
  p.head_w = glorot_conv_weight(cfg.channels, cfg.channels, 3, rng);
  p.head_b = zero_bias(cfg.channels);
  p.blocks.reserve(cfg.blocks);
  for (int b = 0; b < cfg.blocks; ++b) p.blocks.push_back(ResSliceBlockParams::create(cfg, rng));
  p.tail_w = zero_conv_weight(1, cfg.channels, 3);
  p.tail_b = zero_bias(1);
  return p;
}

void EnetParams::collect(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".head.weight", head_w);
  out.emplace_back(prefix + ".head.bias", head_b);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    blocks[b].collect(prefix + ".block" + std::to_string(b), out);
  out.emplace_back(prefix + ".tail.weight", tail_w);
  out.emplace_back(prefix + ".tail.bias", tail_b);
}

void EnetParams::append_parameters(std::vector<Tensor>& out) const {
  out.push_back(head_w);
  out.push_back(head_b);
  for (const ResSliceBlockParams& b : blocks) b.append_parameters(out);
  out.push_back(tail_w);
  out.push_back(tail_b);
}

SdtsParams SdtsParams::create(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  SdtsParams p;
  p.mc = McParams::create(cfg.mc_channels, rng);
  p.fusion = FusionParams::create(cfg, rng);
  p.enet = EnetParams::create(cfg, rng);
  return p;
}

NamedParams SdtsParams::named() const {
  NamedParams out;
  mc.collect("mc", out);
  fusion.collect("fusion", out);
  enet.collect("enet", out);
  return out;
}

std::vector<Tensor> SdtsParams::parameters() const {
  std::vector<Tensor> out;
  mc.append_parameters(out);
  fusion.append_parameters(out);
  enet.append_parameters(out);
  return out;
}

std::vector<Tensor> SdtsParams::enhancement_parameters() const {
  std::vector<Tensor> out;
  fusion.append_parameters(out);
  enet.append_parameters(out);
  return out;
}

Tensor slow_fuse(const Tensor& target, const Tensor& warped_prev, const Tensor& warped_next,
                 const FusionParams& params) {
  if (!(target.shape() == warped_prev.shape()) || !(target.shape() == warped_next.shape()))
    throw std::invalid_argument("slow_fuse: frame dims mismatch");
  const Tensor tf = relu(conv2d(target, params.lift_w, params.lift_b, 1, 1));
  const Tensor pf = relu(conv2d(warped_prev, params.lift_w, params.lift_b, 1, 1));
  const Tensor nf = relu(conv2d(warped_next, params.lift_w, params.lift_b, 1, 1));
  const Tensor pair_prev =
      relu(conv2d(concat_channels({pf, tf}), params.merge_prev_w, params.merge_prev_b, 1, 1));
  const Tensor pair_next =
      relu(conv2d(concat_channels({tf, nf}), params.merge_next_w, params.merge_next_b, 1, 1));
  return relu(conv2d(concat_channels({pair_prev, pair_next}), params.merge_final_w,
                     params.merge_final_b, 1, 1));
}

Tensor res_slice_block(const Tensor& features, const ResSliceBlockParams& params, int split) {
  const int c = features.shape().c;
  const int long_c = params.conv0_w.shape().c;
  if (c - split != long_c || split <= 0)
    throw std::invalid_argument("res_slice_block: channel count " + std::to_string(c) +
                                " does not match split " + std::to_string(split) +
                                " + long path " + std::to_string(long_c));
  auto [short_path, long_path] = slice_channels(features, split);
  Tensor x = relu(conv2d(long_path, params.conv0_w, params.conv0_b, 1, 1));
  x = relu(conv2d(x, params.conv1_w, params.conv1_b, 1, 1));
  const Tensor merged =
      conv2d(concat_channels({short_path, x}), params.merge_w, params.merge_b, 1, 0);
  return add(merged, features);
}

Tensor enet_forward(const Tensor& fused, const Tensor& target, const EnetParams& params,
                    const NetConfig& cfg) {
  if (fused.shape().h != target.shape().h || fused.shape().w != target.shape().w ||
      fused.shape().n != target.shape().n)
    throw std::invalid_argument("enet_forward: fused dims " + fused.shape().str() +
                                " do not match target " + target.shape().str());
  Tensor x = relu(conv2d(fused, params.head_w, params.head_b, 1, 1));
  for (const ResSliceBlockParams& b : params.blocks)
    x = res_slice_block(x, b, cfg.slice_split);
  const Tensor residual = conv2d(x, params.tail_w, params.tail_b, 1, 1);
  return add(residual, target);
}

SdtsOutput sdts_forward(const Tensor& prev_hqf, const Tensor& target, const Tensor& next_hqf,
                        const SdtsParams& params, const NetConfig& cfg) {
  SdtsOutput out;
  out.prev = compensate(target, prev_hqf, params.mc);
  out.next = compensate(target, next_hqf, params.mc);
  const Tensor fused = slow_fuse(target, out.prev.warped, out.next.warped, params.fusion);
  out.recon = enet_forward(fused, target, params.enet, cfg);
  return out;
}

}  // namespace sdts
