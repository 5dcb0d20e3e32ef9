#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>

#include "gazekit/tensor.hpp"

namespace gazekit::nn {

enum class Padding { Same, Valid };

struct ConvGeom {
  std::size_t out = 0;
  std::ptrdiff_t pad_begin = 0;

  static ConvGeom compute(std::size_t in, std::size_t k, std::size_t stride,
                          Padding pad) {
    ConvGeom g;
    if (pad == Padding::Same) {
      g.out = (in + stride - 1) / stride;
      const std::ptrdiff_t total =
          std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>((g.out - 1) * stride + k) -
                                          static_cast<std::ptrdiff_t>(in));
      g.pad_begin = total / 2;
    } else {
      if (in < k) throw Error(ErrorCode::ShapeMismatch, "input smaller than kernel");
      g.out = (in - k) / stride + 1;
      g.pad_begin = 0;
    }
    return g;
  }
};

// Single-sample layers on HWC (or flat) tensors. A layer caches its last
// forward input, so one layer instance has one writer during training.
// Parameter gradients accumulate until zero_grad.
template <class T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* kind() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
  virtual std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const = 0;
  // Multiply-accumulate count of one forward pass.
  virtual std::uint64_t macs(const std::vector<std::size_t>& /*in*/) const { return 0; }

  std::size_t param_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->w.size();
    return n;
  }
  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }
};

template <class T>
void he_uniform_init(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& x : w.v) x = static_cast<T>(dist(rng));
}

// ---------------------------------------------------------------- Conv2D
template <class T>
class Conv2D : public Layer<T> {
 public:
  Conv2D(std::size_t in_c, std::size_t out_c, std::size_t k, std::size_t stride,
         Padding pad, Rng& rng, std::string name = "conv")
      : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad),
        w_(name + ".w", {k, k, in_c, out_c}), b_(name + ".b", {out_c}) {
    he_uniform_init(w_.w, k * k * in_c, rng);
  }

  const char* kind() const override { return "conv2d"; }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    const auto gh = ConvGeom::compute(in[0], k_, stride_, pad_);
    const auto gw = ConvGeom::compute(in[1], k_, stride_, pad_);
    return {gh.out, gw.out, out_c_};
  }
  std::uint64_t macs(const std::vector<std::size_t>& in) const override {
    const auto os = out_shape(in);
    return static_cast<std::uint64_t>(os[0]) * os[1] * os[2] * k_ * k_ * in_c_;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.shape.size() != 3 || x.shape[2] != in_c_)
      throw Error(ErrorCode::ShapeMismatch,
                  "conv2d: got " + shape_str(x.shape) + ", expected (H,W," +
                      std::to_string(in_c_) + ")");
    x_ = x;
    const std::size_t H = x.shape[0], W = x.shape[1];
    const auto gh = ConvGeom::compute(H, k_, stride_, pad_);
    const auto gw = ConvGeom::compute(W, k_, stride_, pad_);
    Tensor<T> y({gh.out, gw.out, out_c_});
    const T* xv = x.v.data();
    const T* wv = w_.w.v.data();
    for (std::size_t oy = 0; oy < gh.out; ++oy) {
      for (std::size_t ox = 0; ox < gw.out; ++ox) {
        T* acc = y.v.data() + (oy * gw.out + ox) * out_c_;
        for (std::size_t oc = 0; oc < out_c_; ++oc) acc[oc] = b_.w.v[oc];
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) - gh.pad_begin;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) - gw.pad_begin;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            const T* xpix = xv + (iy * W + ix) * in_c_;
            const T* wrow = wv + ((ky * k_ + kx) * in_c_) * out_c_;
            for (std::size_t ic = 0; ic < in_c_; ++ic) {
              const T xval = xpix[ic];
              const T* wc = wrow + ic * out_c_;
              for (std::size_t oc = 0; oc < out_c_; ++oc) acc[oc] += xval * wc[oc];
            }
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t H = x_.shape[0], W = x_.shape[1];
    const auto gh = ConvGeom::compute(H, k_, stride_, pad_);
    const auto gw = ConvGeom::compute(W, k_, stride_, pad_);
    require_shape(gy, {gh.out, gw.out, out_c_}, "conv2d backward");
    Tensor<T> gx(x_.shape);
    const T* xv = x_.v.data();
    const T* wv = w_.w.v.data();
    T* gwv = w_.g.v.data();
    for (std::size_t oy = 0; oy < gh.out; ++oy) {
      for (std::size_t ox = 0; ox < gw.out; ++ox) {
        const T* gpix = gy.v.data() + (oy * gw.out + ox) * out_c_;
        for (std::size_t oc = 0; oc < out_c_; ++oc) b_.g.v[oc] += gpix[oc];
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) - gh.pad_begin;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) - gw.pad_begin;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            const T* xpix = xv + (iy * W + ix) * in_c_;
            T* gxpix = gx.v.data() + (iy * W + ix) * in_c_;
            const std::size_t woff = (ky * k_ + kx) * in_c_ * out_c_;
            for (std::size_t ic = 0; ic < in_c_; ++ic) {
              const T* wc = wv + woff + ic * out_c_;
              T* gwc = gwv + woff + ic * out_c_;
              T acc = T(0);
              const T xval = xpix[ic];
              for (std::size_t oc = 0; oc < out_c_; ++oc) {
                acc += gpix[oc] * wc[oc];
                gwc[oc] += gpix[oc] * xval;
              }
              gxpix[ic] += acc;
            }
          }
        }
      }
    }
    return gx;
  }

 private:
  std::size_t in_c_, out_c_, k_, stride_;
  Padding pad_;
  Param<T> w_, b_;
  Tensor<T> x_;
};

// ------------------------------------------------------- DepthwiseConv2D
template <class T>
class DepthwiseConv2D : public Layer<T> {
 public:
  DepthwiseConv2D(std::size_t channels, std::size_t k, std::size_t stride,
                  Padding pad, Rng& rng, std::string name = "dwconv")
      : c_(channels), k_(k), stride_(stride), pad_(pad),
        w_(name + ".w", {k, k, channels}), b_(name + ".b", {channels}) {
    he_uniform_init(w_.w, k * k, rng);
  }

  const char* kind() const override { return "depthwise_conv2d"; }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    const auto gh = ConvGeom::compute(in[0], k_, stride_, pad_);
    const auto gw = ConvGeom::compute(in[1], k_, stride_, pad_);
    return {gh.out, gw.out, c_};
  }
  std::uint64_t macs(const std::vector<std::size_t>& in) const override {
    const auto os = out_shape(in);
    return static_cast<std::uint64_t>(os[0]) * os[1] * c_ * k_ * k_;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.shape.size() != 3 || x.shape[2] != c_)
      throw Error(ErrorCode::ShapeMismatch,
                  "dwconv: got " + shape_str(x.shape) + ", expected (H,W," +
                      std::to_string(c_) + ")");
    x_ = x;
    const std::size_t H = x.shape[0], W = x.shape[1];
    const auto gh = ConvGeom::compute(H, k_, stride_, pad_);
    const auto gw = ConvGeom::compute(W, k_, stride_, pad_);
    Tensor<T> y({gh.out, gw.out, c_});
    for (std::size_t oy = 0; oy < gh.out; ++oy) {
      for (std::size_t ox = 0; ox < gw.out; ++ox) {
        T* acc = y.v.data() + (oy * gw.out + ox) * c_;
        for (std::size_t c = 0; c < c_; ++c) acc[c] = b_.w.v[c];
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) - gh.pad_begin;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) - gw.pad_begin;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            const T* xpix = x.v.data() + (iy * W + ix) * c_;
            const T* wk = w_.w.v.data() + (ky * k_ + kx) * c_;
            for (std::size_t c = 0; c < c_; ++c) acc[c] += xpix[c] * wk[c];
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t H = x_.shape[0], W = x_.shape[1];
    const auto gh = ConvGeom::compute(H, k_, stride_, pad_);
    const auto gw = ConvGeom::compute(W, k_, stride_, pad_);
    require_shape(gy, {gh.out, gw.out, c_}, "dwconv backward");
    Tensor<T> gx(x_.shape);
    for (std::size_t oy = 0; oy < gh.out; ++oy) {
      for (std::size_t ox = 0; ox < gw.out; ++ox) {
        const T* gpix = gy.v.data() + (oy * gw.out + ox) * c_;
        for (std::size_t c = 0; c < c_; ++c) b_.g.v[c] += gpix[c];
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) - gh.pad_begin;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) - gw.pad_begin;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            const T* xpix = x_.v.data() + (iy * W + ix) * c_;
            T* gxpix = gx.v.data() + (iy * W + ix) * c_;
            const T* wk = w_.w.v.data() + (ky * k_ + kx) * c_;
            T* gwk = w_.g.v.data() + (ky * k_ + kx) * c_;
            for (std::size_t c = 0; c < c_; ++c) {
              gxpix[c] += gpix[c] * wk[c];
              gwk[c] += gpix[c] * xpix[c];
            }
          }
        }
      }
    }
    return gx;
  }

 private:
  std::size_t c_, k_, stride_;
  Padding pad_;
  Param<T> w_, b_;
  Tensor<T> x_;
};

// ------------------------------------------------------- ConvTranspose2D
// Output spatial size = input * stride (upsampling decoder convention).
template <class T>
class ConvTranspose2D : public Layer<T> {
 public:
  ConvTranspose2D(std::size_t in_c, std::size_t out_c, std::size_t k,
                  std::size_t stride, Rng& rng, std::string name = "tconv")
      : in_c_(in_c), out_c_(out_c), k_(k), stride_(stride),
        w_(name + ".w", {k, k, in_c, out_c}), b_(name + ".b", {out_c}) {
    he_uniform_init(w_.w, k * k * in_c, rng);
  }

  const char* kind() const override { return "conv2d_transpose"; }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return {in[0] * stride_, in[1] * stride_, out_c_};
  }
  std::uint64_t macs(const std::vector<std::size_t>& in) const override {
    return static_cast<std::uint64_t>(in[0]) * in[1] * in_c_ * k_ * k_ * out_c_;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.shape.size() != 3 || x.shape[2] != in_c_)
      throw Error(ErrorCode::ShapeMismatch,
                  "tconv: got " + shape_str(x.shape) + ", expected (H,W," +
                      std::to_string(in_c_) + ")");
    x_ = x;
    const std::size_t H = x.shape[0], W = x.shape[1];
    const std::size_t OH = H * stride_, OW = W * stride_;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(
        std::max<std::size_t>(k_ > stride_ ? k_ - stride_ : 0, 0) / 2);
    Tensor<T> y({OH, OW, out_c_});
    for (std::size_t oc = 0; oc < out_c_; ++oc) {
      const T bias = b_.w.v[oc];
      for (std::size_t i = oc; i < y.v.size(); i += out_c_) y.v[i] = bias;
    }
    for (std::size_t iy = 0; iy < H; ++iy) {
      for (std::size_t ix = 0; ix < W; ++ix) {
        const T* xpix = x.v.data() + (iy * W + ix) * in_c_;
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy * stride_ + ky) - pad;
          if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(OH)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(ix * stride_ + kx) - pad;
            if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(OW)) continue;
            T* ypix = y.v.data() + (oy * OW + ox) * out_c_;
            const T* wrow = w_.w.v.data() + (ky * k_ + kx) * in_c_ * out_c_;
            for (std::size_t ic = 0; ic < in_c_; ++ic) {
              const T xval = xpix[ic];
              const T* wc = wrow + ic * out_c_;
              for (std::size_t oc = 0; oc < out_c_; ++oc) ypix[oc] += xval * wc[oc];
            }
          }
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t H = x_.shape[0], W = x_.shape[1];
    const std::size_t OH = H * stride_, OW = W * stride_;
    require_shape(gy, {OH, OW, out_c_}, "tconv backward");
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(
        std::max<std::size_t>(k_ > stride_ ? k_ - stride_ : 0, 0) / 2);
    Tensor<T> gx(x_.shape);
    for (std::size_t oc = 0; oc < out_c_; ++oc) {
      T acc = T(0);
      for (std::size_t i = oc; i < gy.v.size(); i += out_c_) acc += gy.v[i];
      b_.g.v[oc] += acc;
    }
    for (std::size_t iy = 0; iy < H; ++iy) {
      for (std::size_t ix = 0; ix < W; ++ix) {
        const T* xpix = x_.v.data() + (iy * W + ix) * in_c_;
        T* gxpix = gx.v.data() + (iy * W + ix) * in_c_;
        for (std::size_t ky = 0; ky < k_; ++ky) {
          const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(iy * stride_ + ky) - pad;
          if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(OH)) continue;
          for (std::size_t kx = 0; kx < k_; ++kx) {
            const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(ix * stride_ + kx) - pad;
            if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(OW)) continue;
            const T* gpix = gy.v.data() + (oy * OW + ox) * out_c_;
            const std::size_t woff = (ky * k_ + kx) * in_c_ * out_c_;
            for (std::size_t ic = 0; ic < in_c_; ++ic) {
              const T* wc = w_.w.v.data() + woff + ic * out_c_;
              T* gwc = w_.g.v.data() + woff + ic * out_c_;
              T acc = T(0);
              for (std::size_t oc = 0; oc < out_c_; ++oc) {
                acc += gpix[oc] * wc[oc];
                gwc[oc] += gpix[oc] * xpix[ic];
              }
              gxpix[ic] += acc;
            }
          }
        }
      }
    }
    return gx;
  }

 private:
  std::size_t in_c_, out_c_, k_, stride_;
  Param<T> w_, b_;
  Tensor<T> x_;
};

// ------------------------------------------------------------- MaxPool2D
// Ceil-mode window so stride-2 pooling matches same-padded conv shapes.
template <class T>
class MaxPool2D : public Layer<T> {
 public:
  explicit MaxPool2D(std::size_t k = 2, std::size_t stride = 2) : k_(k), stride_(stride) {}

  const char* kind() const override { return "max_pool2d"; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return {(in[0] + stride_ - 1) / stride_, (in[1] + stride_ - 1) / stride_, in[2]};
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.shape.size() != 3) throw Error(ErrorCode::ShapeMismatch, "maxpool expects HWC");
    in_shape_ = x.shape;
    const auto os = out_shape(x.shape);
    const std::size_t H = x.shape[0], W = x.shape[1], C = x.shape[2];
    Tensor<T> y(os);
    argmax_.assign(y.size(), 0);
    for (std::size_t oy = 0; oy < os[0]; ++oy) {
      for (std::size_t ox = 0; ox < os[1]; ++ox) {
        for (std::size_t c = 0; c < C; ++c) {
          T best = -std::numeric_limits<T>::infinity();
          std::size_t best_idx = 0;
          for (std::size_t ky = 0; ky < k_; ++ky) {
            const std::size_t iy = oy * stride_ + ky;
            if (iy >= H) break;
            for (std::size_t kx = 0; kx < k_; ++kx) {
              const std::size_t ix = ox * stride_ + kx;
              if (ix >= W) break;
              const std::size_t idx = (iy * W + ix) * C + c;
              if (x.v[idx] > best) {
                best = x.v[idx];
                best_idx = idx;
              }
            }
          }
          const std::size_t oidx = (oy * os[1] + ox) * C + c;
          y.v[oidx] = best;
          argmax_[oidx] = best_idx;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx(in_shape_);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.v[argmax_[i]] += gy.v[i];
    return gx;
  }

 private:
  std::size_t k_, stride_;
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> argmax_;
};

// -------------------------------------------------------- GlobalAvgPool
template <class T>
class GlobalAvgPool : public Layer<T> {
 public:
  const char* kind() const override { return "global_avg_pool"; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return {in[2]};
  }
  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.shape.size() != 3) throw Error(ErrorCode::ShapeMismatch, "gap expects HWC");
    in_shape_ = x.shape;
    const std::size_t HW = x.shape[0] * x.shape[1], C = x.shape[2];
    Tensor<T> y({C});
    for (std::size_t i = 0; i < HW; ++i)
      for (std::size_t c = 0; c < C; ++c) y.v[c] += x.v[i * C + c];
    for (auto& v : y.v) v /= static_cast<T>(HW);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    const std::size_t HW = in_shape_[0] * in_shape_[1], C = in_shape_[2];
    Tensor<T> gx(in_shape_);
    for (std::size_t i = 0; i < HW; ++i)
      for (std::size_t c = 0; c < C; ++c) gx.v[i * C + c] = gy.v[c] / static_cast<T>(HW);
    return gx;
  }

 private:
  std::vector<std::size_t> in_shape_;
};

// ------------------------------------------------------------------ Dense
template <class T>
class Dense : public Layer<T> {
 public:
  Dense(std::size_t in, std::size_t out, Rng& rng, std::string name = "dense")
      : in_(in), out_(out), w_(name + ".w", {in, out}), b_(name + ".b", {out}) {
    he_uniform_init(w_.w, in, rng);
  }

  const char* kind() const override { return "dense"; }
  std::vector<Param<T>*> params() override { return {&w_, &b_}; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>&) const override {
    return {out_};
  }
  std::uint64_t macs(const std::vector<std::size_t>&) const override {
    return static_cast<std::uint64_t>(in_) * out_;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.size() != in_)
      throw Error(ErrorCode::ShapeMismatch,
                  "dense: got " + shape_str(x.shape) + ", expected (" +
                      std::to_string(in_) + ")");
    x_ = x;
    Tensor<T> y({out_});
    std::copy(b_.w.v.begin(), b_.w.v.end(), y.v.begin());
    for (std::size_t i = 0; i < in_; ++i) {
      const T xv = x.v[i];
      const T* wr = w_.w.v.data() + i * out_;
      for (std::size_t o = 0; o < out_; ++o) y.v[o] += xv * wr[o];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    require_shape(gy, {out_}, "dense backward");
    Tensor<T> gx({in_});
    for (std::size_t o = 0; o < out_; ++o) b_.g.v[o] += gy.v[o];
    for (std::size_t i = 0; i < in_; ++i) {
      const T* wr = w_.w.v.data() + i * out_;
      T* gwr = w_.g.v.data() + i * out_;
      T acc = T(0);
      const T xv = x_.v[i];
      for (std::size_t o = 0; o < out_; ++o) {
        acc += gy.v[o] * wr[o];
        gwr[o] += gy.v[o] * xv;
      }
      gx.v[i] = acc;
    }
    return gx;
  }

 private:
  std::size_t in_, out_;
  Param<T> w_, b_;
  Tensor<T> x_;
};

// ------------------------------------------------------------ activations
template <class T>
class ReLU : public Layer<T> {
 public:
  const char* kind() const override { return "relu"; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return in;
  }
  Tensor<T> forward(const Tensor<T>& x) override {
    x_ = x;
    Tensor<T> y = x;
    for (auto& v : y.v) v = std::max(v, T(0));
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (x_.v[i] <= T(0)) gx.v[i] = T(0);
    return gx;
  }

 private:
  Tensor<T> x_;
};

template <class T>
class Sigmoid : public Layer<T> {
 public:
  const char* kind() const override { return "sigmoid"; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return in;
  }
  Tensor<T> forward(const Tensor<T>& x) override {
    Tensor<T> y = x;
    for (auto& v : y.v) v = T(1) / (T(1) + std::exp(-v));
    y_ = y;
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    for (std::size_t i = 0; i < gx.size(); ++i)
      gx.v[i] *= y_.v[i] * (T(1) - y_.v[i]);
    return gx;
  }

 private:
  Tensor<T> y_;
};

// --------------------------------------------------------------- Reshape
template <class T>
class Reshape : public Layer<T> {
 public:
  explicit Reshape(std::vector<std::size_t> target) : target_(std::move(target)) {}
  const char* kind() const override { return "reshape"; }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>&) const override {
    return target_;
  }
  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.size() != Tensor<T>::numel(target_))
      throw Error(ErrorCode::ShapeMismatch, "reshape: element count mismatch");
    in_shape_ = x.shape;
    Tensor<T> y = x;
    y.shape = target_;
    return y;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> gx = gy;
    gx.shape = in_shape_;
    return gx;
  }

 private:
  std::vector<std::size_t> target_;
  std::vector<std::size_t> in_shape_;
};

// -------------------------------------------------------------- Sequential
template <class T>
class Sequential : public Layer<T> {
 public:
  Sequential() = default;
  explicit Sequential(std::string name) : name_(std::move(name)) {}

  Sequential& add(std::unique_ptr<Layer<T>> layer) {
    layers_.push_back(std::move(layer));
    return *this;
  }
  template <class L, class... Args>
  Sequential& emplace(Args&&... args) {
    layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
    return *this;
  }

  const char* kind() const override { return "sequential"; }
  std::size_t depth() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  Tensor<T> forward(const Tensor<T>& x) override {
    Tensor<T> h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
  }
  Tensor<T> backward(const Tensor<T>& gy) override {
    Tensor<T> g = gy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }
  std::vector<Param<T>*> params() override {
    std::vector<Param<T>*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }
  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    auto s = in;
    for (const auto& l : layers_) s = l->out_shape(s);
    return s;
  }
  std::uint64_t macs(const std::vector<std::size_t>& in) const override {
    auto s = in;
    std::uint64_t total = 0;
    for (const auto& l : layers_) {
      total += l->macs(s);
      s = l->out_shape(s);
    }
    return total;
  }

 private:
  std::string name_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// -------------------------------------------------------------- BlazeBlock
// Depthwise 5x5 + pointwise 1x1 (twice for the double form) with a residual
// path; stride-2 blocks max-pool the residual and zero-pad its channels.
// ReLU follows the residual add.
template <class T>
class BlazeBlock : public Layer<T> {
 public:
  enum class Kind { Single, Double };

  BlazeBlock(Kind blockkind, std::size_t in_c, std::size_t out_c, std::size_t stride,
             Rng& rng, std::size_t mid_c = 0, std::string name = "blaze")
      : kind_(blockkind), in_c_(in_c), out_c_(out_c), stride_(stride),
        mid_c_(mid_c == 0 ? out_c : mid_c), pool_(2, 2) {
    if (stride != 1 && stride != 2)
      throw Error(ErrorCode::InvalidInput, "blaze block stride must be 1 or 2");
    if (in_c == 0 || out_c == 0)
      throw Error(ErrorCode::InvalidInput, "blaze block needs nonzero channels");
    if (out_c < in_c)
      throw Error(ErrorCode::InvalidInput,
                  "blaze block cannot shrink channels (residual pads only)");
    if (kind_ == Kind::Single) {
      dw1_ = std::make_unique<DepthwiseConv2D<T>>(in_c, 5, stride, Padding::Same, rng,
                                                  name + ".dw1");
      pw1_ = std::make_unique<Conv2D<T>>(in_c, out_c, 1, 1, Padding::Same, rng,
                                         name + ".pw1");
    } else {
      dw1_ = std::make_unique<DepthwiseConv2D<T>>(in_c, 5, stride, Padding::Same, rng,
                                                  name + ".dw1");
      pw1_ = std::make_unique<Conv2D<T>>(in_c, mid_c_, 1, 1, Padding::Same, rng,
                                         name + ".pw1");
      dw2_ = std::make_unique<DepthwiseConv2D<T>>(mid_c_, 5, 1, Padding::Same, rng,
                                                  name + ".dw2");
      pw2_ = std::make_unique<Conv2D<T>>(mid_c_, out_c, 1, 1, Padding::Same, rng,
                                         name + ".pw2");
    }
  }

  const char* kind() const override { return "blaze_block"; }

  std::vector<Param<T>*> params() override {
    std::vector<Param<T>*> out;
    for (Layer<T>* l : main_layers())
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<std::size_t> out_shape(const std::vector<std::size_t>& in) const override {
    return {(in[0] + stride_ - 1) / stride_, (in[1] + stride_ - 1) / stride_, out_c_};
  }

  std::uint64_t macs(const std::vector<std::size_t>& in) const override {
    auto s = in;
    std::uint64_t total = 0;
    for (const Layer<T>* l : const_cast<BlazeBlock*>(this)->main_layers()) {
      total += l->macs(s);
      s = l->out_shape(s);
    }
    return total;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    Tensor<T> h = x;
    for (Layer<T>* l : main_layers()) h = l->forward(h);

    Tensor<T> res = (stride_ == 2) ? pool_.forward(x) : x;
    pooled_shape_ = res.shape;
    if (in_c_ != out_c_) {
      Tensor<T> padded({res.shape[0], res.shape[1], out_c_});
      const std::size_t HW = res.shape[0] * res.shape[1];
      for (std::size_t i = 0; i < HW; ++i)
        std::copy(res.v.begin() + i * in_c_, res.v.begin() + (i + 1) * in_c_,
                  padded.v.begin() + i * out_c_);
      res = std::move(padded);
    }
    if (!h.same_shape(res))
      throw Error(ErrorCode::ShapeMismatch, "blaze block path/residual mismatch");
    pre_act_ = h;
    for (std::size_t i = 0; i < h.size(); ++i) pre_act_.v[i] += res.v[i];
    Tensor<T> y = pre_act_;
    for (auto& v : y.v) v = std::max(v, T(0));
    return y;
  }

  Tensor<T> backward(const Tensor<T>& gy) override {
    require_shape(gy, pre_act_.shape, "blaze block backward");
    Tensor<T> g = gy;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (pre_act_.v[i] <= T(0)) g.v[i] = T(0);

    // Residual branch.
    Tensor<T> gres({pooled_shape_[0], pooled_shape_[1], in_c_});
    const std::size_t HW = pooled_shape_[0] * pooled_shape_[1];
    for (std::size_t i = 0; i < HW; ++i)
      std::copy(g.v.begin() + i * out_c_, g.v.begin() + i * out_c_ + in_c_,
                gres.v.begin() + i * in_c_);
    Tensor<T> gx_res = (stride_ == 2) ? pool_.backward(gres) : gres;

    // Main branch.
    Tensor<T> gmain = g;
    auto layers = main_layers();
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      gmain = (*it)->backward(gmain);

    for (std::size_t i = 0; i < gmain.size(); ++i) gmain.v[i] += gx_res.v[i];
    return gmain;
  }

 private:
  std::vector<Layer<T>*> main_layers() {
    std::vector<Layer<T>*> out{dw1_.get(), pw1_.get()};
    if (kind_ == Kind::Double) {
      out.push_back(&mid_relu_);
      out.push_back(dw2_.get());
      out.push_back(pw2_.get());
    }
    return out;
  }

  Kind kind_;
  std::size_t in_c_, out_c_, stride_, mid_c_;
  std::unique_ptr<DepthwiseConv2D<T>> dw1_, dw2_;
  std::unique_ptr<Conv2D<T>> pw1_, pw2_;
  ReLU<T> mid_relu_;
  MaxPool2D<T> pool_;
  Tensor<T> pre_act_;
  std::vector<std::size_t> pooled_shape_;
};

}  // namespace gazekit::nn
