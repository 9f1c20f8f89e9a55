#include "sdts/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace sdts {

void adam_step(std::span<Tensor> params, AdamState& state) {
  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Tensor& p : params) {
      state.m.push_back(Array::Zero(p.size()));
      state.v.push_back(Array::Zero(p.size()));
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step parameter count changed: state has " +
                                std::to_string(state.m.size()) + ", got " +
                                std::to_string(params.size()));

  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].has_grad())
      throw std::invalid_argument("adam_step: parameter " + std::to_string(i) +
                                  " has no gradient");

  state.t += 1;
  const Scalar bc1 = 1.0 - std::pow(state.beta1, Scalar(state.t));
  const Scalar bc2 = 1.0 - std::pow(state.beta2, Scalar(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    const Array& g = p.grad();
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.square();
    p.mutable_value() -=
        state.lr * (state.m[i] / bc1) / ((state.v[i] / bc2).sqrt() + state.eps);
    p.zero_grad();
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over base xor a stream offset
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Tensor glorot_conv_weight(int c_out, int c_in, int k, std::mt19937_64& rng) {
  const Scalar fan_in = Scalar(c_in) * k * k;
  const Scalar fan_out = Scalar(c_out) * k * k;
  const Scalar limit = std::sqrt(6.0 / (fan_in + fan_out));
  const Shape shape{c_out, c_in, k, k};
  Array data(shape.elems());
  for (std::int64_t i = 0; i < data.size(); ++i) data[i] = uniform(rng, -limit, limit);
  return Tensor::from_data(shape, std::move(data), true);
}

Tensor zero_conv_weight(int c_out, int c_in, int k) {
  return Tensor::zeros(Shape{c_out, c_in, k, k}, true);
}

Tensor zero_bias(int c_out) {
  return Tensor::zeros(Shape{1, c_out, 1, 1}, true);
}

}  // namespace sdts
