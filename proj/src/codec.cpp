#include "sdts/codec.hpp"

#include "sdts/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdts {

void DegradeConfig::validate() const {
  if (block_size < 2)
    throw std::invalid_argument("degrade block_size must be >= 2, got " +
                                std::to_string(block_size));
  // equality permitted: a uniform-quality run is the degenerate diagnostic case
  if (q_low < 1.0 || q_low > q_high)
    throw std::invalid_argument("degrade steps must satisfy 1 <= q_low <= q_high");
  if (period < 2)
    throw std::invalid_argument("degrade period must be >= 2, got " + std::to_string(period));
}

DegradeConfig DegradeConfig::preset(std::string_view name) {
  DegradeConfig cfg;
  if (name == "q37") {
    cfg.q_low = 24.0;
    cfg.q_high = 56.0;
  } else if (name == "q32") {
    cfg.q_low = 16.0;
    cfg.q_high = 40.0;
  } else {
    throw std::invalid_argument("unknown degrade preset '" + std::string(name) +
                                "' (expected q37 or q32)");
  }
  return cfg;
}

namespace {

// Orthonormal DCT-II basis matrix of size b.
Eigen::MatrixXd dct_matrix(int b) {
  Eigen::MatrixXd d(b, b);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < b; ++i) {
    const Scalar s = i == 0 ? std::sqrt(1.0 / b) : std::sqrt(2.0 / b);
    for (int j = 0; j < b; ++j) d(i, j) = s * std::cos(pi * (2 * j + 1) * i / (2.0 * b));
  }
  return d;
}

}  // namespace

Frame degrade_frame(const Frame& frame, Scalar q, int block_size) {
  if (q < 1.0) throw std::invalid_argument("quantization step must be >= 1, got " +
                                           std::to_string(q));
  if (block_size < 2) throw std::invalid_argument("block_size must be >= 2");
  if (frame.rows() % block_size != 0 || frame.cols() % block_size != 0)
    throw std::invalid_argument("frame dims " + std::to_string(frame.rows()) + "x" +
                                std::to_string(frame.cols()) +
                                " are not multiples of block_size " +
                                std::to_string(block_size));

  const Eigen::MatrixXd d = dct_matrix(block_size);
  Frame out(frame.rows(), frame.cols());
  for (int by = 0; by < frame.rows(); by += block_size)
    for (int bx = 0; bx < frame.cols(); bx += block_size) {
      Eigen::MatrixXd block = frame.block(by, bx, block_size, block_size).matrix();
      Eigen::MatrixXd coeff = d * block * d.transpose();
      for (int i = 0; i < block_size; ++i)
        for (int j = 0; j < block_size; ++j) coeff(i, j) = std::round(coeff(i, j) / q) * q;
      Eigen::MatrixXd rec = d.transpose() * coeff * d;
      out.block(by, bx, block_size, block_size) =
          rec.array().max(0.0).min(255.0);
    }
  return out;
}

Clip degrade_clip(const Clip& clip, const DegradeConfig& cfg) {
  cfg.validate();
  if (clip.role != ClipRole::raw)
    throw std::invalid_argument("degrade_clip expects a raw clip");
  if (clip.frames.empty()) throw std::invalid_argument("degrade_clip: empty clip");

  Clip out;
  out.role = ClipRole::degraded;
  out.orig_h = clip.orig_h;
  out.orig_w = clip.orig_w;
  out.frames.reserve(clip.frames.size());
  out.labels.reserve(clip.frames.size());
  for (int i = 0; i < clip.count(); ++i) {
    const bool hqf = i % cfg.period == 0;
    const Scalar q = hqf ? cfg.q_low : cfg.q_high;
    const Frame& f = clip.frames[i];
    if (f.rows() % cfg.block_size == 0 && f.cols() % cfg.block_size == 0) {
      out.frames.push_back(degrade_frame(f, q, cfg.block_size));
    } else {
      Frame padded = pad_to_multiple(f, cfg.block_size);
      out.frames.push_back(
          Frame(degrade_frame(padded, q, cfg.block_size).topLeftCorner(f.rows(), f.cols())));
    }
    out.labels.push_back(hqf ? FrameLabel::HQF : FrameLabel::LQF);
  }
  return out;
}

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "translate") return SynthKind::translate;
  if (s == "still") return SynthKind::still;
  if (s == "ramp") return SynthKind::ramp;
  throw std::invalid_argument("unknown synth kind '" + s + "'");
}

namespace {

// Smooth seeded texture: a few low-frequency cosine waves around mid grey.
Frame smooth_texture(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr int waves = 6;
  Scalar amp[waves], kx[waves], ky[waves], phase[waves];
  for (int i = 0; i < waves; ++i) {
    const Scalar wavelength = uniform(rng, 8.0, 28.0);
    const Scalar theta = uniform(rng, 0.0, 2.0 * pi);
    amp[i] = 34.0 / (1.0 + i);
    kx[i] = 2.0 * pi * std::cos(theta) / wavelength;
    ky[i] = 2.0 * pi * std::sin(theta) / wavelength;
    phase[i] = uniform(rng, 0.0, 2.0 * pi);
  }
  Frame f(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Scalar v = 128.0;
      for (int i = 0; i < waves; ++i) v += amp[i] * std::cos(kx[i] * x + ky[i] * y + phase[i]);
      f(y, x) = std::clamp(v, 0.0, 255.0);
    }
  return f;
}

Scalar sample_clamped(const Frame& f, Scalar xs, Scalar ys) {
  const int w = int(f.cols()), h = int(f.rows());
  xs = std::clamp(xs, 0.0, Scalar(w - 1));
  ys = std::clamp(ys, 0.0, Scalar(h - 1));
  const int x0 = int(std::floor(xs)), y0 = int(std::floor(ys));
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const Scalar wx = xs - x0, wy = ys - y0;
  return (1.0 - wy) * ((1.0 - wx) * f(y0, x0) + wx * f(y0, x1)) +
         wy * ((1.0 - wx) * f(y1, x0) + wx * f(y1, x1));
}

}  // namespace

Clip synth_clip(SynthKind kind, int n_frames, int h, int w, Scalar shift_px,
                std::uint64_t seed) {
  if (n_frames < 3)
    throw std::invalid_argument("synth_clip needs at least 3 frames, got " +
                                std::to_string(n_frames));
  if (h <= 0 || w <= 0) throw std::invalid_argument("synth_clip dims must be positive");

  Clip clip;
  clip.role = ClipRole::raw;
  clip.frames.reserve(n_frames);
  switch (kind) {
    case SynthKind::still: {
      const Frame base = smooth_texture(h, w, seed);
      for (int t = 0; t < n_frames; ++t) clip.frames.push_back(base);
      break;
    }
    case SynthKind::ramp: {
      Frame base(h, w);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) base(y, x) = w > 1 ? 255.0 * x / (w - 1) : 128.0;
      for (int t = 0; t < n_frames; ++t) clip.frames.push_back(base);
      break;
    }
    case SynthKind::translate: {
      // frame t samples the base at (x - shift*t, y): content moves right by
      // shift_px each frame, so frame t+1 equals frame t warped by (-shift, 0).
      const Frame base = smooth_texture(h, w, seed);
      for (int t = 0; t < n_frames; ++t) {
        Frame f(h, w);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            f(y, x) = sample_clamped(base, Scalar(x) - shift_px * t, Scalar(y));
        clip.frames.push_back(std::move(f));
      }
      break;
    }
  }
  clip.labels.assign(n_frames, FrameLabel::LQF);
  return clip;
}

}  // namespace sdts
