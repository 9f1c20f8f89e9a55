#include "sdts/clip.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdts {

std::string to_string(FrameLabel label) {
  return label == FrameLabel::HQF ? "HQF" : "LQF";
}

FrameLabel frame_label_from_string(const std::string& s) {
  if (s == "HQF") return FrameLabel::HQF;
  if (s == "LQF") return FrameLabel::LQF;
  throw std::invalid_argument("unknown frame label '" + s + "'");
}

void Clip::validate() const {
  if (frames.empty()) throw std::invalid_argument("clip has no frames");
  if (labels.size() != frames.size())
    throw std::invalid_argument("clip label count " + std::to_string(labels.size()) +
                                " does not match frame count " + std::to_string(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (frames[i].rows() != frames.front().rows() || frames[i].cols() != frames.front().cols())
      throw std::invalid_argument("clip frame " + std::to_string(i) + " dims differ");
}

Frame cropped_frame(const Clip& clip, int index) {
  const Frame& f = clip.frames.at(index);
  const int h = clip.orig_h > 0 ? clip.orig_h : int(f.rows());
  const int w = clip.orig_w > 0 ? clip.orig_w : int(f.cols());
  return f.topLeftCorner(h, w);
}

Frame pad_edge(const Frame& f, int rows, int cols) {
  if (rows < f.rows() || cols < f.cols())
    throw std::invalid_argument("pad_edge target smaller than frame");
  if (rows == f.rows() && cols == f.cols()) return f;
  Frame out(rows, cols);
  for (int y = 0; y < rows; ++y) {
    const int sy = std::min<int>(y, int(f.rows()) - 1);
    for (int x = 0; x < cols; ++x) out(y, x) = f(sy, std::min<int>(x, int(f.cols()) - 1));
  }
  return out;
}

Frame pad_to_multiple(const Frame& f, int multiple) {
  const auto round_up = [multiple](int v) { return ((v + multiple - 1) / multiple) * multiple; };
  return pad_edge(f, round_up(int(f.rows())), round_up(int(f.cols())));
}

Tensor tensor_from_frame(const Frame& f) {
  const Shape shape{1, 1, int(f.rows()), int(f.cols())};
  Array data(shape.elems());
  for (int y = 0; y < f.rows(); ++y)
    for (int x = 0; x < f.cols(); ++x) data[std::int64_t(y) * f.cols() + x] = f(y, x);
  return Tensor::from_data(shape, std::move(data));
}

Tensor tensor_from_frames(const std::vector<Frame>& frames) {
  if (frames.empty()) throw std::invalid_argument("tensor_from_frames: empty batch");
  const int h = int(frames.front().rows()), w = int(frames.front().cols());
  const Shape shape{int(frames.size()), 1, h, w};
  Array data(shape.elems());
  for (int n = 0; n < shape.n; ++n) {
    const Frame& f = frames[n];
    if (f.rows() != h || f.cols() != w)
      throw std::invalid_argument("tensor_from_frames: frame " + std::to_string(n) +
                                  " dims differ");
    Scalar* dst = data.data() + flat_index(shape, n, 0, 0, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) *dst++ = f(y, x);
  }
  return Tensor::from_data(shape, std::move(data));
}

Frame frame_from_tensor(const Tensor& t, int n, int c) {
  const Shape s = t.shape();
  if (n < 0 || n >= s.n || c < 0 || c >= s.c)
    throw std::invalid_argument("frame_from_tensor index out of range for " + s.str());
  Frame f(s.h, s.w);
  const Scalar* src = t.value().data() + flat_index(s, n, c, 0, 0);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) f(y, x) = *src++;
  return f;
}

}  // namespace sdts
