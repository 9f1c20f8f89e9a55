#include "sdts/mc.hpp"

#include "sdts/optim.hpp"

#include <stdexcept>

namespace sdts {

namespace {

constexpr int kLayers = 5;
constexpr int kFlowChannels = 2;

void check_frames_match(const Tensor& a, const Tensor& b, const char* where, int multiple) {
  if (!(a.shape() == b.shape()))
    throw std::invalid_argument(std::string(where) + ": frame dims mismatch " +
                                a.shape().str() + " vs " + b.shape().str());
  if (a.shape().h % multiple != 0 || a.shape().w % multiple != 0)
    throw std::invalid_argument(std::string(where) + ": dims " + a.shape().str() +
                                " must be multiples of " + std::to_string(multiple));
}

}  // namespace

FlowEstimator FlowEstimator::create(int in_channels, int hidden, std::mt19937_64& rng) {
  FlowEstimator est;
  est.weights.reserve(kLayers);
  est.biases.reserve(kLayers);
  int c_in = in_channels;
  for (int layer = 0; layer < kLayers; ++layer) {
    const bool last = layer == kLayers - 1;
    const int c_out = last ? kFlowChannels : hidden;
    est.weights.push_back(last ? zero_conv_weight(c_out, c_in, 3)
                               : glorot_conv_weight(c_out, c_in, 3, rng));
    est.biases.push_back(zero_bias(c_out));
    c_in = c_out;
  }
  return est;
}

Tensor FlowEstimator::run(const Tensor& input) const {
  Tensor x = input;
  for (int layer = 0; layer < kLayers; ++layer) {
    x = conv2d(x, weights[layer], biases[layer], 1, 1);
    if (layer < kLayers - 1) x = relu(x);
  }
  return x;
}

void FlowEstimator::collect(const std::string& prefix, NamedParams& out) const {
  for (int layer = 0; layer < kLayers; ++layer) {
    out.emplace_back(prefix + ".conv" + std::to_string(layer) + ".weight", weights[layer]);
    out.emplace_back(prefix + ".conv" + std::to_string(layer) + ".bias", biases[layer]);
  }
}

void FlowEstimator::append_parameters(std::vector<Tensor>& out) const {
  for (int layer = 0; layer < kLayers; ++layer) {
    out.push_back(weights[layer]);
    out.push_back(biases[layer]);
  }
}

McParams McParams::create(int hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return create(hidden, rng);
}

McParams McParams::create(int hidden, std::mt19937_64& rng) {
  McParams p;
  p.coarse = FlowEstimator::create(2, hidden, rng);  // target + neighbor
  p.fine = FlowEstimator::create(4, hidden, rng);    // target + warped + 2 flow channels
  p.still = FlowEstimator::create(2, hidden, rng);   // target + warped
  return p;
}

void McParams::collect(const std::string& prefix, NamedParams& out) const {
  coarse.collect(prefix + ".coarse", out);
  fine.collect(prefix + ".fine", out);
  still.collect(prefix + ".still", out);
}

void McParams::append_parameters(std::vector<Tensor>& out) const {
  coarse.append_parameters(out);
  fine.append_parameters(out);
  still.append_parameters(out);
}

std::vector<Tensor> McParams::parameters() const {
  std::vector<Tensor> out;
  append_parameters(out);
  return out;
}

void McParams::set_requires_grad(bool on) {
  for (Tensor& t : parameters()) t.set_requires_grad(on);
}

FlowField estimate_flow_coarse(const Tensor& target, const Tensor& neighbor,
                               const FlowEstimator& params) {
  check_frames_match(target, neighbor, "estimate_flow_coarse", 4);
  const Tensor t4 = avg_downsample2(avg_downsample2(target));
  const Tensor n4 = avg_downsample2(avg_downsample2(neighbor));
  const Tensor low = params.run(concat_channels({t4, n4}));
  return scale(bilinear_upsample2(bilinear_upsample2(low)), 4.0);
}

FlowField estimate_flow_fine(const Tensor& target, const Tensor& neighbor_coarse_warped,
                             const FlowField& coarse_flow, const FlowEstimator& params) {
  check_frames_match(target, neighbor_coarse_warped, "estimate_flow_fine", 2);
  const Tensor stacked = concat_channels({target, neighbor_coarse_warped, coarse_flow});
  const Tensor low = params.run(avg_downsample2(stacked));
  return scale(bilinear_upsample2(low), 2.0);
}

FlowField estimate_flow_still(const Tensor& target, const Tensor& neighbor_fine_warped,
                              const FlowEstimator& params) {
  check_frames_match(target, neighbor_fine_warped, "estimate_flow_still", 1);
  return params.run(concat_channels({target, neighbor_fine_warped}));
}

FlowField compose_total_flow(const FlowField& coarse, const FlowField& fine,
                             const FlowField& still) {
  return add(add(coarse, fine), still);
}

Compensation compensate(const Tensor& target, const Tensor& neighbor, const McParams& params) {
  check_frames_match(target, neighbor, "compensate", 4);
  const FlowField coarse = estimate_flow_coarse(target, neighbor, params.coarse);
  const Tensor warped_coarse = bilinear_sample(neighbor, coarse);
  const FlowField fine = estimate_flow_fine(target, warped_coarse, coarse, params.fine);
  const Tensor warped_fine = bilinear_sample(neighbor, add(coarse, fine));
  const FlowField still = estimate_flow_still(target, warped_fine, params.still);
  const FlowField total = compose_total_flow(coarse, fine, still);
  return Compensation{bilinear_sample(neighbor, total), total};
}

Tensor mc_loss(const Tensor& raw_target, const std::vector<Tensor>& raw_neighbors,
               const std::vector<FlowField>& flows) {
  if (raw_neighbors.size() != flows.size())
    throw std::invalid_argument("mc_loss: " + std::to_string(raw_neighbors.size()) +
                                " neighbors vs " + std::to_string(flows.size()) + " flows");
  if (raw_neighbors.empty()) throw std::invalid_argument("mc_loss: no neighbors");
  Tensor loss;
  for (std::size_t i = 0; i < raw_neighbors.size(); ++i) {
    Tensor term = mse_loss(bilinear_sample(raw_neighbors[i], flows[i]), raw_target);
    loss = loss.defined() ? add(loss, term) : term;
  }
  return loss;
}

}  // namespace sdts
