#include <doctest.h>

#include "sdts/clip.hpp"
#include "sdts/codec.hpp"
#include "sdts/mc.hpp"
#include "sdts/metrics.hpp"
#include "testutil.hpp"

using namespace sdts;
using namespace sdts::testutil;

namespace {

// Gradient fixtures need non-zero output layers: at exact zero flow the
// bilinear kernel sits on its lattice kink and finite differences straddle it.
void randomize_output_layer(FlowEstimator& est, std::mt19937_64& rng, Scalar scale) {
  Tensor& w = est.weights.back();
  Tensor& b = est.biases.back();
  for (std::int64_t i = 0; i < w.size(); ++i) w.mutable_value()[i] = uniform(rng, -scale, scale);
  for (std::int64_t i = 0; i < b.size(); ++i) b.mutable_value()[i] = uniform(rng, -scale, scale);
}

McParams gradcheck_params(std::mt19937_64& rng) {
  McParams p = McParams::create(4, rng);
  randomize_output_layer(p.coarse, rng, 0.02);
  randomize_output_layer(p.fine, rng, 0.02);
  randomize_output_layer(p.still, rng, 0.02);
  return p;
}

}  // namespace

TEST_CASE("zero-initialized branches predict zero flow and compensate is the identity") {
  std::mt19937_64 rng(3);
  const McParams params = McParams::create(8, rng);
  const Tensor target = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 255.0);
  const Tensor neighbor = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 255.0);

  const FlowField coarse = estimate_flow_coarse(target, neighbor, params.coarse);
  CHECK(coarse.shape() == Shape{1, 2, 8, 8});
  CHECK(coarse.value().abs().maxCoeff() == 0.0);

  const FlowField fine = estimate_flow_fine(target, neighbor, coarse, params.fine);
  CHECK(fine.shape() == Shape{1, 2, 8, 8});
  CHECK(fine.value().abs().maxCoeff() == 0.0);

  const FlowField still = estimate_flow_still(target, neighbor, params.still);
  CHECK(still.shape() == Shape{1, 2, 8, 8});
  CHECK(still.value().abs().maxCoeff() == 0.0);

  const Compensation comp = compensate(target, neighbor, params);
  CHECK((comp.warped.value() - neighbor.value()).abs().maxCoeff() == 0.0);
  CHECK(comp.flow.value().abs().maxCoeff() == 0.0);
}

TEST_CASE("flow estimators validate dimensions") {
  std::mt19937_64 rng(5);
  const McParams params = McParams::create(4, rng);
  const Tensor a = Tensor::zeros(Shape{1, 1, 8, 8});
  const Tensor b = Tensor::zeros(Shape{1, 1, 8, 12});
  CHECK_THROWS_AS(estimate_flow_coarse(a, b, params.coarse), std::invalid_argument);
  CHECK_THROWS_AS(compensate(a, b, params), std::invalid_argument);
  const Tensor odd = Tensor::zeros(Shape{1, 1, 6, 6});
  CHECK_THROWS_AS(estimate_flow_coarse(odd, odd, params.coarse), std::invalid_argument);
}

TEST_CASE("compose_total_flow is the elementwise sum") {
  const Shape s{1, 2, 4, 4};
  const Tensor zero = Tensor::zeros(s);

  Array cx(s.elems());
  for (int i = 0; i < s.elems(); ++i) cx[i] = i < s.elems() / 2 ? 2.0 : 0.0;
  const Tensor coarse = Tensor::from_data(s, std::move(cx));
  Array fx(s.elems());
  for (int i = 0; i < s.elems(); ++i) fx[i] = i < s.elems() / 2 ? -0.5 : 0.0;
  const Tensor fine = Tensor::from_data(s, std::move(fx));
  Array sx(s.elems());
  for (int i = 0; i < s.elems(); ++i) sx[i] = i < s.elems() / 2 ? 0.25 : 0.0;
  const Tensor still = Tensor::from_data(s, std::move(sx));

  const FlowField total = compose_total_flow(coarse, fine, still);
  CHECK(total.at(0, 0, 0, 0) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(total.at(0, 1, 0, 0) == 0.0);

  const FlowField same = compose_total_flow(coarse, zero, zero);
  CHECK((same.value() == coarse.value()).all());

  CHECK_THROWS_AS(compose_total_flow(coarse, fine, Tensor::zeros(Shape{1, 2, 2, 2})),
                  std::invalid_argument);
}

TEST_CASE("mc_loss on aligned frames and zero flow") {
  const Clip still = synth_clip(SynthKind::still, 3, 16, 16, 0.0, 31);
  const Tensor frame = tensor_from_frame(still.frames[0]);
  const Tensor zero_flow = Tensor::zeros(Shape{1, 2, 16, 16});

  CHECK(mc_loss(frame, {frame}, {zero_flow}).item() == 0.0);

  const Clip moving = synth_clip(SynthKind::translate, 3, 16, 16, 2.0, 31);
  const Tensor target = tensor_from_frame(moving.frames[1]);
  const Tensor neighbor = tensor_from_frame(moving.frames[0]);
  const Scalar loss = mc_loss(target, {neighbor}, {zero_flow}).item();
  const Scalar direct = mse_loss(neighbor, target).item();
  CHECK(loss == doctest::Approx(direct).epsilon(1e-15));
  CHECK(loss > 0.0);

  CHECK_THROWS_AS(mc_loss(target, {neighbor, neighbor}, {zero_flow}), std::invalid_argument);
}

TEST_CASE("mc_loss gradients match finite differences on an 8x8 fixture") {
  std::mt19937_64 rng(41);
  McParams params = gradcheck_params(rng);
  // scaled-down frames keep finite differencing well-conditioned
  const Tensor target = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
  const Tensor neighbor = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
  const Tensor raw_target = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
  const Tensor raw_neighbor = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);

  const auto forward = [&] {
    const Compensation comp = compensate(target, neighbor, params);
    return mc_loss(raw_target, {raw_neighbor}, {comp.flow});
  };
  const GradCheck res = grad_check(params.parameters(), forward, rng, 8);
  CHECK(res.checked > 100);
  CHECK(res.max_rel < 1e-6);
}

TEST_CASE("compensate stays differentiable end to end") {
  std::mt19937_64 rng(43);
  McParams params = gradcheck_params(rng);
  const Tensor target = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);
  const Tensor neighbor = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 4.0);

  Graph graph;
  const Compensation comp = compensate(target, neighbor, params);
  Tensor loss = mse_loss(comp.warped, target);
  graph.backward(loss);
  int with_grad = 0;
  for (const Tensor& p : params.parameters())
    if (p.has_grad() && p.grad().abs().maxCoeff() > 0.0) ++with_grad;
  CHECK(with_grad == int(params.parameters().size()));
}

TEST_CASE("fine refinement reaches sub-pixel flow on translate(0.5)") {
  const Clip clip = synth_clip(SynthKind::translate, 8, 24, 24, 0.5, 909);
  McParams params = McParams::create(8, derive_seed(5, 0));
  AdamState adam;
  adam.lr = 1e-4;
  std::mt19937_64 rng(derive_seed(5, 1));
  std::vector<Tensor> trainable = params.parameters();

  for (int step = 0; step < 250; ++step) {
    std::vector<Frame> targets, neighbors;
    for (int b = 0; b < 8; ++b) {
      const int t = 1 + int(rng() % std::uint64_t(clip.count() - 1));
      targets.push_back(clip.frames[t]);
      neighbors.push_back(clip.frames[t - 1]);
    }
    const Tensor target = tensor_from_frames(targets);
    const Tensor neighbor = tensor_from_frames(neighbors);
    Graph graph;
    const Compensation comp = compensate(target, neighbor, params);
    Tensor loss = mc_loss(target, {neighbor}, {comp.flow});
    graph.backward(loss);
    adam_step(trainable, adam);
  }

  // median |composed flow - ground truth| over interior pixels, all pairs
  std::vector<Scalar> errors;
  Scalar warped_err_sum = 0, neighbor_err_sum = 0;
  for (int t = 1; t < clip.count(); ++t) {
    const Compensation comp = compensate(tensor_from_frame(clip.frames[t]),
                                         tensor_from_frame(clip.frames[t - 1]), params);
    const Frame dx = frame_from_tensor(comp.flow, 0, 0);
    const Frame dy = frame_from_tensor(comp.flow, 0, 1);
    for (int y = 4; y < 20; ++y)
      for (int x = 4; x < 20; ++x)
        errors.push_back(std::hypot(dx(y, x) + 0.5, dy(y, x)));
    const Frame warped = frame_from_tensor(comp.warped);
    warped_err_sum += error_map(warped, clip.frames[t]).block(4, 4, 16, 16).mean();
    neighbor_err_sum += error_map(clip.frames[t - 1], clip.frames[t]).block(4, 4, 16, 16).mean();
  }
  std::sort(errors.begin(), errors.end());
  const Scalar median = errors[errors.size() / 2];
  CHECK(median < 0.25);

  // compensation leaves a fainter error map than no compensation
  CHECK(warped_err_sum < neighbor_err_sum);
}

TEST_CASE("on still content trained compensation never hurts") {
  const Clip raw = synth_clip(SynthKind::still, 9, 16, 16, 0.0, 77);
  const Clip degraded = degrade_clip(raw, DegradeConfig::preset("q37"));
  McParams params = McParams::create(8, derive_seed(9, 0));
  AdamState adam;
  adam.lr = 1e-4;
  std::mt19937_64 rng(derive_seed(9, 1));
  std::vector<Tensor> trainable = params.parameters();

  for (int step = 0; step < 50; ++step) {
    std::vector<Frame> targets, neighbors, raw_t, raw_n;
    for (int b = 0; b < 4; ++b) {
      const int t = 1 + int(rng() % 8);
      targets.push_back(degraded.frames[t]);
      neighbors.push_back(degraded.frames[t - 1]);
      raw_t.push_back(raw.frames[t]);
      raw_n.push_back(raw.frames[t - 1]);
    }
    Graph graph;
    const Compensation comp =
        compensate(tensor_from_frames(targets), tensor_from_frames(neighbors), params);
    Tensor loss = mc_loss(tensor_from_frames(raw_t), {tensor_from_frames(raw_n)}, {comp.flow});
    graph.backward(loss);
    adam_step(trainable, adam);
  }

  const Tensor target = tensor_from_frame(degraded.frames[1]);
  const Tensor neighbor = tensor_from_frame(degraded.frames[0]);
  const Compensation comp = compensate(target, neighbor, params);
  CHECK((comp.warped.value() - neighbor.value()).abs().maxCoeff() < 1e-9);
  CHECK(mse_loss(comp.warped, target).item() <= mse_loss(neighbor, target).item() + 1e-12);
}
