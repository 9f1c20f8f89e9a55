#include "sdts/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdts {

namespace {

using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRowMat = Eigen::Map<RowMat>;
using MapConstRowMat = Eigen::Map<const RowMat>;

using NodePtr = std::shared_ptr<detail::Node>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!Graph::active()) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

void require_defined(const Tensor& t, const char* what) {
  if (!t.defined()) throw std::invalid_argument(std::string(what) + " tensor is undefined");
}

// Gathers conv patches: col(row = (ci*k + kh)*k + kw, col = oh*Wout + ow).
void im2col(const Scalar* input, const Shape& in_shape, int n, int k, int stride,
            int padding, int h_out, int w_out, RowMat& col) {
  const int c_in = in_shape.c, h = in_shape.h, w = in_shape.w;
  for (int ci = 0; ci < c_in; ++ci) {
    const Scalar* plane = input + flat_index(in_shape, n, ci, 0, 0);
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        Scalar* dst = col.data() + std::int64_t((ci * k + kh) * k + kw) * col.cols();
        for (int oh = 0; oh < h_out; ++oh) {
          const int ih = oh * stride - padding + kh;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + w_out, 0.0);
            dst += w_out;
            continue;
          }
          const Scalar* src = plane + std::int64_t(ih) * w;
          for (int ow = 0; ow < w_out; ++ow) {
            const int iw = ow * stride - padding + kw;
            *dst++ = (iw < 0 || iw >= w) ? 0.0 : src[iw];
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds col-shaped gradients back onto the input.
void col2im_add(const RowMat& col, const Shape& in_shape, int n, int k, int stride,
                int padding, int h_out, int w_out, Scalar* grad_input) {
  const int c_in = in_shape.c, h = in_shape.h, w = in_shape.w;
  for (int ci = 0; ci < c_in; ++ci) {
    Scalar* plane = grad_input + flat_index(in_shape, n, ci, 0, 0);
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const Scalar* src = col.data() + std::int64_t((ci * k + kh) * k + kw) * col.cols();
        for (int oh = 0; oh < h_out; ++oh) {
          const int ih = oh * stride - padding + kh;
          if (ih < 0 || ih >= h) {
            src += w_out;
            continue;
          }
          Scalar* dst = plane + std::int64_t(ih) * w;
          for (int ow = 0; ow < w_out; ++ow) {
            const int iw = ow * stride - padding + kw;
            if (iw >= 0 && iw < w) dst[iw] += src[ow];
          }
          src += w_out;
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  require_defined(input, "conv2d input");
  require_defined(weight, "conv2d weight");
  require_defined(bias, "conv2d bias");
  const Shape in = input.shape(), ws = weight.shape(), bs = bias.shape();
  const int k = ws.h;
  if (ws.w != k) throw std::invalid_argument("conv2d kernel must be square, got " + ws.str());
  if (k % 2 == 0) throw std::invalid_argument("conv2d kernel size must be odd, got k=" + std::to_string(k));
  if (ws.c != in.c)
    throw std::invalid_argument("conv2d channel mismatch: input c=" + std::to_string(in.c) +
                                ", weight c_in=" + std::to_string(ws.c));
  if (bs.n != 1 || bs.h != 1 || bs.w != 1 || bs.c != ws.n)
    throw std::invalid_argument("conv2d bias must have shape (1," + std::to_string(ws.n) +
                                ",1,1), got " + bs.str());
  if (stride < 1) throw std::invalid_argument("conv2d stride must be >= 1");
  if (padding < 0) throw std::invalid_argument("conv2d padding must be >= 0");

  const int c_out = ws.n;
  const int h_out = (in.h + 2 * padding - k) / stride + 1;
  const int w_out = (in.w + 2 * padding - k) / stride + 1;
  if (in.h + 2 * padding < k || in.w + 2 * padding < k)
    throw std::invalid_argument("conv2d kernel k=" + std::to_string(k) +
                                " exceeds padded input " + in.str());

  const Shape out_shape{in.n, c_out, h_out, w_out};
  Array out(out_shape.elems());

  const std::int64_t ckk = std::int64_t(in.c) * k * k;
  const std::int64_t hw = std::int64_t(h_out) * w_out;
  RowMat col(ckk, hw);
  MapConstRowMat w_mat(weight.value().data(), c_out, ckk);
  Eigen::Map<const Eigen::VectorXd> b_vec(bias.value().data(), c_out);

  for (int n = 0; n < in.n; ++n) {
    im2col(input.value().data(), in, n, k, stride, padding, h_out, w_out, col);
    MapRowMat out_mat(out.data() + flat_index(out_shape, n, 0, 0, 0), c_out, hw);
    out_mat.noalias() = w_mat * col;
    out_mat.colwise() += b_vec;
  }

  const bool track = tracking({&input, &weight, &bias});
  Tensor result = Tensor::from_data(out_shape, std::move(out), track);
  if (track) {
    NodePtr in_n = input.node(), w_n = weight.node(), b_n = bias.node(), out_n = result.node();
    Graph::active()->record([in_n, w_n, b_n, out_n, k, stride, padding, h_out, w_out]() {
      if (out_n->grad.size() == 0) return;
      const Shape& in_s = in_n->shape;
      const Shape& out_s = out_n->shape;
      const int c_out = out_s.c;
      const std::int64_t ckk = std::int64_t(in_s.c) * k * k;
      const std::int64_t hw = std::int64_t(h_out) * w_out;
      MapConstRowMat w_mat(w_n->value.data(), c_out, ckk);

      if (b_n->requires_grad) b_n->ensure_grad();
      if (w_n->requires_grad) w_n->ensure_grad();
      if (in_n->requires_grad) in_n->ensure_grad();

      RowMat col(ckk, hw);
      RowMat gcol(ckk, hw);
      for (int n = 0; n < in_s.n; ++n) {
        MapConstRowMat go(out_n->grad.data() + flat_index(out_s, n, 0, 0, 0), c_out, hw);
        if (b_n->requires_grad) {
          Eigen::Map<Eigen::VectorXd> gb(b_n->grad.data(), c_out);
          gb.noalias() += go.rowwise().sum();
        }
        if (w_n->requires_grad) {
          im2col(in_n->value.data(), in_s, n, k, stride, padding, h_out, w_out, col);
          MapRowMat gw(w_n->grad.data(), c_out, ckk);
          gw.noalias() += go * col.transpose();
        }
        if (in_n->requires_grad) {
          gcol.noalias() = w_mat.transpose() * go;
          col2im_add(gcol, in_s, n, k, stride, padding, h_out, w_out, in_n->grad.data());
        }
      }
    });
  }
  return result;
}

Tensor relu(const Tensor& x) {
  require_defined(x, "relu");
  Array out = x.value().max(0.0);
  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(x.shape(), std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      x_n->grad += (x_n->value > 0.0).select(out_n->grad, 0.0);
    });
  }
  return result;
}

namespace {

struct SampleGeom {
  int x0, x1, y0, y1;
  Scalar wx, wy;
  bool clamped_x, clamped_y;
};

inline SampleGeom sample_geometry(Scalar fx, Scalar fy, int x, int y, int w, int h) {
  SampleGeom g;
  const Scalar xs_raw = x + fx;
  const Scalar ys_raw = y + fy;
  g.clamped_x = xs_raw < 0.0 || xs_raw > Scalar(w - 1);
  g.clamped_y = ys_raw < 0.0 || ys_raw > Scalar(h - 1);
  const Scalar xs = std::clamp(xs_raw, 0.0, Scalar(w - 1));
  const Scalar ys = std::clamp(ys_raw, 0.0, Scalar(h - 1));
  g.x0 = int(std::floor(xs));
  g.y0 = int(std::floor(ys));
  g.x1 = std::min(g.x0 + 1, w - 1);
  g.y1 = std::min(g.y0 + 1, h - 1);
  g.wx = xs - Scalar(g.x0);
  g.wy = ys - Scalar(g.y0);
  return g;
}

}  // namespace

Tensor bilinear_sample(const Tensor& image, const Tensor& flow) {
  require_defined(image, "bilinear_sample image");
  require_defined(flow, "bilinear_sample flow");
  const Shape is = image.shape(), fs = flow.shape();
  if (fs.c != 2)
    throw std::invalid_argument("bilinear_sample flow must have 2 channels, got c=" +
                                std::to_string(fs.c));
  if (fs.n != is.n || fs.h != is.h || fs.w != is.w)
    throw std::invalid_argument("bilinear_sample flow dims " + fs.str() +
                                " do not match image " + is.str());

  const int h = is.h, w = is.w;
  Array out(is.elems());
  const Scalar* img = image.value().data();
  const Scalar* flo = flow.value().data();
  for (int n = 0; n < is.n; ++n) {
    const Scalar* fx = flo + flat_index(fs, n, 0, 0, 0);
    const Scalar* fy = flo + flat_index(fs, n, 1, 0, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int64_t p = std::int64_t(y) * w + x;
        const SampleGeom g = sample_geometry(fx[p], fy[p], x, y, w, h);
        for (int c = 0; c < is.c; ++c) {
          const Scalar* plane = img + flat_index(is, n, c, 0, 0);
          const Scalar top = (1.0 - g.wx) * plane[std::int64_t(g.y0) * w + g.x0] +
                             g.wx * plane[std::int64_t(g.y0) * w + g.x1];
          const Scalar bot = (1.0 - g.wx) * plane[std::int64_t(g.y1) * w + g.x0] +
                             g.wx * plane[std::int64_t(g.y1) * w + g.x1];
          out[flat_index(is, n, c, y, x)] = (1.0 - g.wy) * top + g.wy * bot;
        }
      }
    }
  }

  const bool track = tracking({&image, &flow});
  Tensor result = Tensor::from_data(is, std::move(out), track);
  if (track) {
    NodePtr img_n = image.node(), flo_n = flow.node(), out_n = result.node();
    Graph::active()->record([img_n, flo_n, out_n]() {
      if (out_n->grad.size() == 0) return;
      const Shape& is = img_n->shape;
      const Shape& fs = flo_n->shape;
      const int h = is.h, w = is.w;
      const bool want_img = img_n->requires_grad;
      const bool want_flow = flo_n->requires_grad;
      if (want_img) img_n->ensure_grad();
      if (want_flow) flo_n->ensure_grad();
      const Scalar* img = img_n->value.data();
      const Scalar* flo = flo_n->value.data();
      for (int n = 0; n < is.n; ++n) {
        const Scalar* fx = flo + flat_index(fs, n, 0, 0, 0);
        const Scalar* fy = flo + flat_index(fs, n, 1, 0, 0);
        Scalar* gfx = want_flow ? flo_n->grad.data() + flat_index(fs, n, 0, 0, 0) : nullptr;
        Scalar* gfy = want_flow ? flo_n->grad.data() + flat_index(fs, n, 1, 0, 0) : nullptr;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const std::int64_t p = std::int64_t(y) * w + x;
            const SampleGeom g = sample_geometry(fx[p], fy[p], x, y, w, h);
            Scalar dx_acc = 0.0, dy_acc = 0.0;
            for (int c = 0; c < is.c; ++c) {
              const Scalar go = out_n->grad[flat_index(is, n, c, y, x)];
              if (go == 0.0) continue;
              const Scalar* plane = img + flat_index(is, n, c, 0, 0);
              const Scalar v00 = plane[std::int64_t(g.y0) * w + g.x0];
              const Scalar v01 = plane[std::int64_t(g.y0) * w + g.x1];
              const Scalar v10 = plane[std::int64_t(g.y1) * w + g.x0];
              const Scalar v11 = plane[std::int64_t(g.y1) * w + g.x1];
              if (want_img) {
                Scalar* gplane = img_n->grad.data() + flat_index(is, n, c, 0, 0);
                gplane[std::int64_t(g.y0) * w + g.x0] += go * (1.0 - g.wy) * (1.0 - g.wx);
                gplane[std::int64_t(g.y0) * w + g.x1] += go * (1.0 - g.wy) * g.wx;
                gplane[std::int64_t(g.y1) * w + g.x0] += go * g.wy * (1.0 - g.wx);
                gplane[std::int64_t(g.y1) * w + g.x1] += go * g.wy * g.wx;
              }
              if (want_flow) {
                dx_acc += go * ((1.0 - g.wy) * (v01 - v00) + g.wy * (v11 - v10));
                dy_acc += go * ((1.0 - g.wx) * (v10 - v00) + g.wx * (v11 - v01));
              }
            }
            if (want_flow) {
              if (!g.clamped_x) gfx[p] += dx_acc;
              if (!g.clamped_y) gfy[p] += dy_acc;
            }
          }
        }
      }
    });
  }
  return result;
}

Tensor avg_downsample2(const Tensor& x) {
  require_defined(x, "avg_downsample2");
  const Shape in = x.shape();
  if (in.h % 2 != 0 || in.w % 2 != 0)
    throw std::invalid_argument("avg_downsample2 requires even spatial dims, got " + in.str());
  const Shape out_shape{in.n, in.c, in.h / 2, in.w / 2};
  Array out(out_shape.elems());
  const Scalar* src = x.value().data();
  for (int n = 0; n < in.n; ++n)
    for (int c = 0; c < in.c; ++c) {
      const Scalar* plane = src + flat_index(in, n, c, 0, 0);
      Scalar* dst = out.data() + flat_index(out_shape, n, c, 0, 0);
      for (int y = 0; y < out_shape.h; ++y)
        for (int x2 = 0; x2 < out_shape.w; ++x2) {
          const Scalar* r0 = plane + std::int64_t(2 * y) * in.w + 2 * x2;
          const Scalar* r1 = r0 + in.w;
          dst[std::int64_t(y) * out_shape.w + x2] = 0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
        }
    }

  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(out_shape, std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      const Shape& in = x_n->shape;
      const Shape& os = out_n->shape;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c) {
          Scalar* gplane = x_n->grad.data() + flat_index(in, n, c, 0, 0);
          const Scalar* go = out_n->grad.data() + flat_index(os, n, c, 0, 0);
          for (int y = 0; y < os.h; ++y)
            for (int x2 = 0; x2 < os.w; ++x2) {
              const Scalar g = 0.25 * go[std::int64_t(y) * os.w + x2];
              Scalar* r0 = gplane + std::int64_t(2 * y) * in.w + 2 * x2;
              Scalar* r1 = r0 + in.w;
              r0[0] += g;
              r0[1] += g;
              r1[0] += g;
              r1[1] += g;
            }
        }
    });
  }
  return result;
}

namespace {

// Corner-aligned source coordinates for doubling one axis.
void upsample2_axis(int in_len, int out_len, std::vector<int>& i0, std::vector<int>& i1,
                    std::vector<Scalar>& frac) {
  i0.resize(out_len);
  i1.resize(out_len);
  frac.resize(out_len);
  for (int i = 0; i < out_len; ++i) {
    const Scalar src = in_len == 1 ? 0.0 : Scalar(i) * Scalar(in_len - 1) / Scalar(out_len - 1);
    const int s0 = int(std::floor(src));
    i0[i] = s0;
    i1[i] = std::min(s0 + 1, in_len - 1);
    frac[i] = src - Scalar(s0);
  }
}

}  // namespace

Tensor bilinear_upsample2(const Tensor& x) {
  require_defined(x, "bilinear_upsample2");
  const Shape in = x.shape();
  const Shape out_shape{in.n, in.c, in.h * 2, in.w * 2};
  std::vector<int> y0, y1, x0, x1;
  std::vector<Scalar> fy, fx;
  upsample2_axis(in.h, out_shape.h, y0, y1, fy);
  upsample2_axis(in.w, out_shape.w, x0, x1, fx);

  Array out(out_shape.elems());
  const Scalar* src = x.value().data();
  for (int n = 0; n < in.n; ++n)
    for (int c = 0; c < in.c; ++c) {
      const Scalar* plane = src + flat_index(in, n, c, 0, 0);
      Scalar* dst = out.data() + flat_index(out_shape, n, c, 0, 0);
      for (int y = 0; y < out_shape.h; ++y) {
        const Scalar* r0 = plane + std::int64_t(y0[y]) * in.w;
        const Scalar* r1 = plane + std::int64_t(y1[y]) * in.w;
        for (int x2 = 0; x2 < out_shape.w; ++x2) {
          const Scalar top = (1.0 - fx[x2]) * r0[x0[x2]] + fx[x2] * r0[x1[x2]];
          const Scalar bot = (1.0 - fx[x2]) * r1[x0[x2]] + fx[x2] * r1[x1[x2]];
          *dst++ = (1.0 - fy[y]) * top + fy[y] * bot;
        }
      }
    }

  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(out_shape, std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n, y0, y1, fy, x0, x1, fx]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      const Shape& in = x_n->shape;
      const Shape& os = out_n->shape;
      for (int n = 0; n < in.n; ++n)
        for (int c = 0; c < in.c; ++c) {
          Scalar* gplane = x_n->grad.data() + flat_index(in, n, c, 0, 0);
          const Scalar* go = out_n->grad.data() + flat_index(os, n, c, 0, 0);
          for (int y = 0; y < os.h; ++y) {
            Scalar* g0 = gplane + std::int64_t(y0[y]) * in.w;
            Scalar* g1 = gplane + std::int64_t(y1[y]) * in.w;
            for (int x2 = 0; x2 < os.w; ++x2) {
              const Scalar g = *go++;
              g0[x0[x2]] += g * (1.0 - fy[y]) * (1.0 - fx[x2]);
              g0[x1[x2]] += g * (1.0 - fy[y]) * fx[x2];
              g1[x0[x2]] += g * fy[y] * (1.0 - fx[x2]);
              g1[x1[x2]] += g * fy[y] * fx[x2];
            }
          }
        }
    });
  }
  return result;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels requires at least one tensor");
  for (const Tensor& t : parts) require_defined(t, "concat_channels part");
  const Shape first = parts.front().shape();
  int c_total = 0;
  for (const Tensor& t : parts) {
    const Shape s = t.shape();
    if (s.n != first.n || s.h != first.h || s.w != first.w)
      throw std::invalid_argument("concat_channels spatial/batch mismatch: " + s.str() +
                                  " vs " + first.str());
    c_total += s.c;
  }
  const Shape out_shape{first.n, c_total, first.h, first.w};
  Array out(out_shape.elems());
  const std::int64_t plane = std::int64_t(first.h) * first.w;
  for (int n = 0; n < first.n; ++n) {
    std::int64_t c_off = 0;
    for (const Tensor& t : parts) {
      const std::int64_t len = std::int64_t(t.shape().c) * plane;
      std::copy_n(t.value().data() + flat_index(t.shape(), n, 0, 0, 0), len,
                  out.data() + flat_index(out_shape, n, int(c_off), 0, 0));
      c_off += t.shape().c;
    }
  }

  bool any_grad = false;
  for (const Tensor& t : parts) any_grad = any_grad || t.requires_grad();
  const bool track = Graph::active() != nullptr && any_grad;
  Tensor result = Tensor::from_data(out_shape, std::move(out), track);
  if (track) {
    std::vector<NodePtr> in_nodes;
    in_nodes.reserve(parts.size());
    for (const Tensor& t : parts) in_nodes.push_back(t.node());
    NodePtr out_n = result.node();
    Graph::active()->record([in_nodes, out_n]() {
      if (out_n->grad.size() == 0) return;
      const Shape& os = out_n->shape;
      const std::int64_t plane = std::int64_t(os.h) * os.w;
      for (int n = 0; n < os.n; ++n) {
        std::int64_t c_off = 0;
        for (const NodePtr& in_n : in_nodes) {
          const std::int64_t len = std::int64_t(in_n->shape.c) * plane;
          if (in_n->requires_grad) {
            in_n->ensure_grad();
            Eigen::Map<Array>(in_n->grad.data() + flat_index(in_n->shape, n, 0, 0, 0), len) +=
                Eigen::Map<const Array>(
                    out_n->grad.data() + flat_index(os, n, int(c_off), 0, 0), len);
          }
          c_off += in_n->shape.c;
        }
      }
    });
  }
  return result;
}

namespace {

Tensor slice_one(const Tensor& x, int c_begin, int c_end) {
  const Shape in = x.shape();
  const Shape out_shape{in.n, c_end - c_begin, in.h, in.w};
  Array out(out_shape.elems());
  const std::int64_t plane = std::int64_t(in.h) * in.w;
  const std::int64_t len = std::int64_t(out_shape.c) * plane;
  for (int n = 0; n < in.n; ++n)
    std::copy_n(x.value().data() + flat_index(in, n, c_begin, 0, 0), len,
                out.data() + flat_index(out_shape, n, 0, 0, 0));

  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(out_shape, std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n, c_begin, len]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      const Shape& in = x_n->shape;
      for (int n = 0; n < in.n; ++n)
        Eigen::Map<Array>(x_n->grad.data() + flat_index(in, n, c_begin, 0, 0), len) +=
            Eigen::Map<const Array>(
                out_n->grad.data() + flat_index(out_n->shape, n, 0, 0, 0), len);
    });
  }
  return result;
}

}  // namespace

std::pair<Tensor, Tensor> slice_channels(const Tensor& x, int split) {
  require_defined(x, "slice_channels");
  const int c = x.shape().c;
  if (split <= 0 || split >= c)
    throw std::invalid_argument("slice_channels split must be in (0, " + std::to_string(c) +
                                "), got " + std::to_string(split));
  return {slice_one(x, 0, split), slice_one(x, split, c)};
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add lhs");
  require_defined(b, "add rhs");
  if (!(a.shape() == b.shape()))
    throw std::invalid_argument("add shape mismatch: " + a.shape().str() + " vs " +
                                b.shape().str());
  Array out = a.value() + b.value();
  const bool track = tracking({&a, &b});
  Tensor result = Tensor::from_data(a.shape(), std::move(out), track);
  if (track) {
    NodePtr a_n = a.node(), b_n = b.node(), out_n = result.node();
    Graph::active()->record([a_n, b_n, out_n]() {
      if (out_n->grad.size() == 0) return;
      if (a_n->requires_grad) {
        a_n->ensure_grad();
        a_n->grad += out_n->grad;
      }
      if (b_n->requires_grad) {
        b_n->ensure_grad();
        b_n->grad += out_n->grad;
      }
    });
  }
  return result;
}

Tensor scale(const Tensor& x, Scalar k) {
  require_defined(x, "scale");
  Array out = x.value() * k;
  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(x.shape(), std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n, k]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      x_n->grad += k * out_n->grad;
    });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  Array out(1);
  out[0] = x.value().sum();
  const bool track = tracking({&x});
  Tensor result = Tensor::from_data(Shape{1, 1, 1, 1}, std::move(out), track);
  if (track) {
    NodePtr x_n = x.node(), out_n = result.node();
    Graph::active()->record([x_n, out_n]() {
      if (out_n->grad.size() == 0 || !x_n->requires_grad) return;
      x_n->ensure_grad();
      x_n->grad += out_n->grad[0];
    });
  }
  return result;
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  require_defined(pred, "mse_loss pred");
  require_defined(target, "mse_loss target");
  if (!(pred.shape() == target.shape()))
    throw std::invalid_argument("mse_loss shape mismatch: " + pred.shape().str() + " vs " +
                                target.shape().str());
  if (target.requires_grad())
    throw std::invalid_argument("mse_loss target must not require gradients");
  const Scalar count = Scalar(pred.size());
  Array out(1);
  out[0] = (pred.value() - target.value()).square().sum() / count;
  const bool track = tracking({&pred});
  Tensor result = Tensor::from_data(Shape{1, 1, 1, 1}, std::move(out), track);
  if (track) {
    NodePtr p_n = pred.node(), t_n = target.node(), out_n = result.node();
    Graph::active()->record([p_n, t_n, out_n, count]() {
      if (out_n->grad.size() == 0 || !p_n->requires_grad) return;
      p_n->ensure_grad();
      p_n->grad += out_n->grad[0] * 2.0 / count * (p_n->value - t_n->value);
    });
  }
  return result;
}

}  // namespace sdts
