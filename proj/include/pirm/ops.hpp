/* Copyright 2026 The pirm-bench Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Reference CNN inference kernels.
//
// Every kernel accumulates each output element in a fixed order, so results
// are bitwise reproducible across runs and across thread counts: threads only
// partition output channels, never the reduction. Build with
// -ffp-contract=off so the compiler cannot fuse multiply-adds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pirm/error.hpp"
#include "pirm/tensor.hpp"

namespace pirm {

enum class Padding {
  same_zero,  // output = ceil(in / stride), zero fill, extra pad goes bottom/right
  valid,
};

struct ConvParams {
  std::int64_t out_channels = 1;
  std::int64_t kernel_h = 1;
  std::int64_t kernel_w = 1;
  std::int64_t stride = 1;
  Padding padding = Padding::same_zero;
  std::int64_t groups = 1;

  bool operator==(const ConvParams&) const = default;
};

// Fractionally strided convolution producing exactly in * stride outputs.
struct ConvTransposeParams {
  std::int64_t out_channels = 1;
  std::int64_t kernel = 2;
  std::int64_t stride = 2;

  bool operator==(const ConvTransposeParams&) const = default;
};

struct Activation {
  enum class Kind { relu, leaky_relu, prelu, tanh, identity };

  Kind kind = Kind::identity;
  float slope = 0.0f;         // leaky_relu
  std::vector<float> slopes;  // prelu, one per channel

  static Activation relu() { return {Kind::relu, 0.0f, {}}; }
  static Activation leaky_relu(float s) { return {Kind::leaky_relu, s, {}}; }
  static Activation prelu(std::vector<float> s) {
    return {Kind::prelu, 0.0f, std::move(s)};
  }
  static Activation tanh() { return {Kind::tanh, 0.0f, {}}; }
  static Activation identity() { return {Kind::identity, 0.0f, {}}; }

  bool operator==(const Activation&) const = default;
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

struct ConvGeometry {
  std::int64_t out_h, out_w, pad_top, pad_left;
};

inline ConvGeometry conv_geometry(const Shape& in, const ConvParams& p) {
  if (p.padding == Padding::valid) {
    return {(in.h - p.kernel_h) / p.stride + 1,
            (in.w - p.kernel_w) / p.stride + 1, 0, 0};
  }
  const std::int64_t oh = ceil_div(in.h, p.stride);
  const std::int64_t ow = ceil_div(in.w, p.stride);
  const std::int64_t pad_h = std::max<std::int64_t>((oh - 1) * p.stride + p.kernel_h - in.h, 0);
  const std::int64_t pad_w = std::max<std::int64_t>((ow - 1) * p.stride + p.kernel_w - in.w, 0);
  return {oh, ow, pad_h / 2, pad_w / 2};
}

// Runs fn(begin, end) over [0, count) split into contiguous chunks.
template <class Fn>
void parallel_ranges(std::int64_t count, int threads, Fn&& fn) {
  const std::int64_t workers = std::clamp<std::int64_t>(threads, 1, count);
  if (workers <= 1) {
    fn(std::int64_t{0}, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t t = 0; t < workers; ++t) {
    const std::int64_t begin = count * t / workers;
    const std::int64_t end = count * (t + 1) / workers;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

inline void check_bias(std::span<const float> bias, std::int64_t out_c,
                       const char* op) {
  if (!bias.empty() && static_cast<std::int64_t>(bias.size()) != out_c) {
    throw ShapeError(std::string(op) + " bias has " + std::to_string(bias.size()) +
                     " entries, expected " + std::to_string(out_c));
  }
}

}  // namespace detail

inline Shape conv2d_output_shape(const Shape& in, const ConvParams& p) {
  if (p.out_channels < 1 || p.kernel_h < 1 || p.kernel_w < 1 || p.stride < 1 ||
      p.groups < 1) {
    throw ShapeError("conv parameters must all be >= 1");
  }
  if (in.c % p.groups != 0 || p.out_channels % p.groups != 0) {
    throw ShapeError("groups " + std::to_string(p.groups) +
                     " must divide input channels " + std::to_string(in.c) +
                     " and output channels " + std::to_string(p.out_channels));
  }
  if (p.padding == Padding::same_zero &&
      (p.kernel_h % 2 == 0 || p.kernel_w % 2 == 0)) {
    throw ShapeError("same-zero padding needs odd kernel dims, got " +
                     std::to_string(p.kernel_h) + "x" + std::to_string(p.kernel_w));
  }
  if (p.padding == Padding::valid && (in.h < p.kernel_h || in.w < p.kernel_w)) {
    throw ShapeError("valid conv kernel larger than input " + in.to_string());
  }
  const auto g = detail::conv_geometry(in, p);
  return {in.n, p.out_channels, g.out_h, g.out_w};
}

inline Shape conv2d_weight_shape(const Shape& in, const ConvParams& p) {
  return {p.out_channels, in.c / p.groups, p.kernel_h, p.kernel_w};
}

// Cross-correlation. weights: (out_c, in_c / groups, kh, kw); bias may be
// empty (zeros). Each output element sums kernel taps in row-major order and,
// for each tap, the group's input channels in order; bias is added last.
inline Tensor conv2d(const Tensor& input, const Tensor& weights,
                     std::span<const float> bias, const ConvParams& p,
                     int threads = 1) {
  const Shape in = input.shape();
  const Shape out_shape = conv2d_output_shape(in, p);
  if (weights.shape() != conv2d_weight_shape(in, p)) {
    throw ShapeError("conv weights " + weights.shape().to_string() +
                     ", expected " + conv2d_weight_shape(in, p).to_string());
  }
  detail::check_bias(bias, p.out_channels, "conv");

  const auto geo = detail::conv_geometry(in, p);
  const std::int64_t in_per_group = in.c / p.groups;
  const std::int64_t out_per_group = p.out_channels / p.groups;
  const std::int64_t s = p.stride;
  const std::int64_t kh = p.kernel_h;
  const std::int64_t kw = p.kernel_w;
  const float* src = input.data().data();
  const float* wt = weights.data().data();

  std::vector<float> out(static_cast<std::size_t>(out_shape.count()));

  auto run = [&](std::int64_t oc_begin, std::int64_t oc_end) {
    std::vector<float> acc(static_cast<std::size_t>(geo.out_w));
    for (std::int64_t b = 0; b < in.n; ++b) {
      for (std::int64_t oc = oc_begin; oc < oc_end; ++oc) {
        const std::int64_t ic0 = (oc / out_per_group) * in_per_group;
        const float bv = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(oc)];
        float* dst = out.data() + ((b * p.out_channels + oc) * geo.out_h) * geo.out_w;
        for (std::int64_t oy = 0; oy < geo.out_h; ++oy) {
          std::fill(acc.begin(), acc.end(), 0.0f);
          for (std::int64_t ky = 0; ky < kh; ++ky) {
            const std::int64_t iy = oy * s + ky - geo.pad_top;
            if (iy < 0 || iy >= in.h) continue;
            for (std::int64_t kx = 0; kx < kw; ++kx) {
              const std::int64_t ox0 =
                  std::max<std::int64_t>(0, detail::ceil_div(geo.pad_left - kx, s));
              const std::int64_t ox1 = std::min<std::int64_t>(
                  geo.out_w, detail::floor_div(in.w - 1 - kx + geo.pad_left, s) + 1);
              if (ox0 >= ox1) continue;
              for (std::int64_t icl = 0; icl < in_per_group; ++icl) {
                const float wv = wt[((oc * in_per_group + icl) * kh + ky) * kw + kx];
                const float* row = src + ((b * in.c + ic0 + icl) * in.h + iy) * in.w +
                                   (ox0 * s + kx - geo.pad_left);
                float* a = acc.data() + ox0;
                const std::int64_t len = ox1 - ox0;
                if (s == 1) {
                  for (std::int64_t i = 0; i < len; ++i) a[i] += wv * row[i];
                } else {
                  for (std::int64_t i = 0; i < len; ++i) a[i] += wv * row[i * s];
                }
              }
            }
          }
          float* drow = dst + oy * geo.out_w;
          for (std::int64_t ox = 0; ox < geo.out_w; ++ox) drow[ox] = acc[ox] + bv;
        }
      }
    }
  };
  detail::parallel_ranges(p.out_channels, threads, run);
  return Tensor(out_shape, std::move(out));
}

inline std::int64_t conv_transpose_padding(const ConvTransposeParams& p) {
  return p.kernel >= p.stride ? (p.kernel - p.stride) / 2 : 0;
}

inline Shape conv2d_transpose_output_shape(const Shape& in,
                                           const ConvTransposeParams& p) {
  if (p.out_channels < 1 || p.kernel < 1 || p.stride < 1) {
    throw ShapeError("conv_transpose parameters must all be >= 1");
  }
  return {in.n, p.out_channels, in.h * p.stride, in.w * p.stride};
}

inline Shape conv2d_transpose_weight_shape(const Shape& in,
                                           const ConvTransposeParams& p) {
  return {in.c, p.out_channels, p.kernel, p.kernel};
}

// Transposed convolution. weights: (in_c, out_c, k, k). Input pixel (iy, ix)
// lands at output (iy * stride + ky - pad, ix * stride + kx - pad) with
// pad = (k - stride) / 2, cropped to exactly in * stride. Evaluated as a
// gather: per output element, kernel taps row-major, then input channels.
inline Tensor conv2d_transpose(const Tensor& input, const Tensor& weights,
                               std::span<const float> bias,
                               const ConvTransposeParams& p, int threads = 1) {
  const Shape in = input.shape();
  const Shape out_shape = conv2d_transpose_output_shape(in, p);
  if (weights.shape() != conv2d_transpose_weight_shape(in, p)) {
    throw ShapeError("conv_transpose weights " + weights.shape().to_string() +
                     ", expected " + conv2d_transpose_weight_shape(in, p).to_string());
  }
  detail::check_bias(bias, p.out_channels, "conv_transpose");

  const std::int64_t s = p.stride;
  const std::int64_t k = p.kernel;
  const std::int64_t pad = conv_transpose_padding(p);
  const std::int64_t out_h = out_shape.h;
  const std::int64_t out_w = out_shape.w;
  const float* src = input.data().data();
  const float* wt = weights.data().data();
  std::vector<float> out(static_cast<std::size_t>(out_shape.count()));

  auto run = [&](std::int64_t oc_begin, std::int64_t oc_end) {
    std::vector<float> acc(static_cast<std::size_t>(out_w));
    for (std::int64_t b = 0; b < in.n; ++b) {
      for (std::int64_t oc = oc_begin; oc < oc_end; ++oc) {
        const float bv = bias.empty() ? 0.0f : bias[static_cast<std::size_t>(oc)];
        float* dst = out.data() + ((b * p.out_channels + oc) * out_h) * out_w;
        for (std::int64_t oy = 0; oy < out_h; ++oy) {
          std::fill(acc.begin(), acc.end(), 0.0f);
          for (std::int64_t ky = 0; ky < k; ++ky) {
            const std::int64_t t = oy + pad - ky;
            if (t < 0 || t % s != 0) continue;
            const std::int64_t iy = t / s;
            if (iy >= in.h) continue;
            for (std::int64_t kx = 0; kx < k; ++kx) {
              const std::int64_t ix0 =
                  std::max<std::int64_t>(0, detail::ceil_div(pad - kx, s));
              const std::int64_t ix1 = std::min<std::int64_t>(
                  in.w, detail::floor_div(out_w - 1 + pad - kx, s) + 1);
              if (ix0 >= ix1) continue;
              for (std::int64_t ic = 0; ic < in.c; ++ic) {
                const float wv = wt[((ic * p.out_channels + oc) * k + ky) * k + kx];
                const float* row = src + ((b * in.c + ic) * in.h + iy) * in.w;
                const std::int64_t shift = kx - pad;
                for (std::int64_t ix = ix0; ix < ix1; ++ix) {
                  acc[static_cast<std::size_t>(ix * s + shift)] += wv * row[ix];
                }
              }
            }
          }
          float* drow = dst + oy * out_w;
          for (std::int64_t ox = 0; ox < out_w; ++ox) drow[ox] = acc[ox] + bv;
        }
      }
    }
  };
  detail::parallel_ranges(p.out_channels, threads, run);
  return Tensor(out_shape, std::move(out));
}

inline void check_activation(const Shape& in, const Activation& act) {
  if (act.kind == Activation::Kind::prelu &&
      static_cast<std::int64_t>(act.slopes.size()) != in.c) {
    throw ShapeError("prelu has " + std::to_string(act.slopes.size()) +
                     " slopes for " + std::to_string(in.c) + " channels");
  }
}

inline Tensor activate(const Tensor& input, const Activation& act) {
  check_activation(input.shape(), act);
  using Kind = Activation::Kind;
  std::vector<float> out(input.data().begin(), input.data().end());
  const std::size_t plane = static_cast<std::size_t>(input.h() * input.w());
  switch (act.kind) {
    case Kind::identity:
      break;
    case Kind::relu:
      for (float& v : out) v = v < 0.0f ? 0.0f : v;
      break;
    case Kind::leaky_relu:
      for (float& v : out) v = v < 0.0f ? act.slope * v : v;
      break;
    case Kind::tanh:
      for (float& v : out) v = std::tanh(v);
      break;
    case Kind::prelu:
      for (std::size_t i = 0; i < out.size(); ++i) {
        const float slope = act.slopes[(i / plane) % act.slopes.size()];
        if (out[i] < 0.0f) out[i] = slope * out[i];
      }
      break;
  }
  return Tensor(input.shape(), std::move(out));
}

inline Shape pixel_shuffle_shape(const Shape& in, std::int64_t r) {
  if (r < 1) throw ShapeError("pixel_shuffle factor must be >= 1");
  if (in.c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle factor " + std::to_string(r) +
                     " needs channels divisible by " + std::to_string(r * r) +
                     ", got " + std::to_string(in.c));
  }
  return {in.n, in.c / (r * r), in.h * r, in.w * r};
}

inline Shape pixel_unshuffle_shape(const Shape& in, std::int64_t r) {
  if (r < 1) throw ShapeError("pixel_unshuffle factor must be >= 1");
  if (in.h % r != 0 || in.w % r != 0) {
    throw ShapeError("pixel_unshuffle factor " + std::to_string(r) +
                     " does not divide spatial dims of " + in.to_string());
  }
  return {in.n, in.c * r * r, in.h / r, in.w / r};
}

// out(n, c, y*r + dy, x*r + dx) = in(n, c*r*r + dy*r + dx, y, x)
inline Tensor pixel_shuffle(const Tensor& input, std::int64_t r) {
  const Shape in = input.shape();
  const Shape os = pixel_shuffle_shape(in, r);
  std::vector<float> out(static_cast<std::size_t>(os.count()));
  for (std::int64_t b = 0; b < in.n; ++b)
    for (std::int64_t c = 0; c < os.c; ++c)
      for (std::int64_t dy = 0; dy < r; ++dy)
        for (std::int64_t dx = 0; dx < r; ++dx) {
          const std::int64_t ic = c * r * r + dy * r + dx;
          for (std::int64_t y = 0; y < in.h; ++y)
            for (std::int64_t x = 0; x < in.w; ++x)
              out[static_cast<std::size_t>(((b * os.c + c) * os.h + y * r + dy) * os.w +
                                           x * r + dx)] = input.at(b, ic, y, x);
        }
  return Tensor(os, std::move(out));
}

// Exact inverse of pixel_shuffle.
inline Tensor pixel_unshuffle(const Tensor& input, std::int64_t r) {
  const Shape in = input.shape();
  const Shape os = pixel_unshuffle_shape(in, r);
  std::vector<float> out(static_cast<std::size_t>(os.count()));
  for (std::int64_t b = 0; b < in.n; ++b)
    for (std::int64_t c = 0; c < in.c; ++c)
      for (std::int64_t dy = 0; dy < r; ++dy)
        for (std::int64_t dx = 0; dx < r; ++dx) {
          const std::int64_t oc = c * r * r + dy * r + dx;
          for (std::int64_t y = 0; y < os.h; ++y)
            for (std::int64_t x = 0; x < os.w; ++x)
              out[static_cast<std::size_t>(((b * os.c + oc) * os.h + y) * os.w + x)] =
                  input.at(b, c, y * r + dy, x * r + dx);
        }
  return Tensor(os, std::move(out));
}

inline Shape space_to_batch_shape(const Shape& in) {
  if (in.h % 2 != 0 || in.w % 2 != 0) {
    throw ShapeError("space_to_batch needs even spatial dims, got " + in.to_string());
  }
  return {in.n * 4, in.c, in.h / 2, in.w / 2};
}

inline Shape batch_to_space_shape(const Shape& in) {
  if (in.n % 4 != 0) {
    throw ShapeError("batch_to_space needs batch divisible by 4, got " + in.to_string());
  }
  return {in.n / 4, in.c, in.h * 2, in.w * 2};
}

// 2x2 phase decomposition. Phase p = dy*2 + dx is stored at batch index
// p * n + b, so the output holds all images' phase (0,0) first.
inline Tensor space_to_batch(const Tensor& input) {
  const Shape in = input.shape();
  const Shape os = space_to_batch_shape(in);
  std::vector<float> out(static_cast<std::size_t>(os.count()));
  for (std::int64_t p = 0; p < 4; ++p) {
    const std::int64_t dy = p / 2, dx = p % 2;
    for (std::int64_t b = 0; b < in.n; ++b)
      for (std::int64_t c = 0; c < in.c; ++c)
        for (std::int64_t y = 0; y < os.h; ++y)
          for (std::int64_t x = 0; x < os.w; ++x)
            out[static_cast<std::size_t>((((p * in.n + b) * os.c + c) * os.h + y) * os.w +
                                         x)] = input.at(b, c, 2 * y + dy, 2 * x + dx);
  }
  return Tensor(os, std::move(out));
}

inline Tensor batch_to_space(const Tensor& input) {
  const Shape in = input.shape();
  const Shape os = batch_to_space_shape(in);
  std::vector<float> out(static_cast<std::size_t>(os.count()));
  for (std::int64_t p = 0; p < 4; ++p) {
    const std::int64_t dy = p / 2, dx = p % 2;
    for (std::int64_t b = 0; b < os.n; ++b)
      for (std::int64_t c = 0; c < in.c; ++c)
        for (std::int64_t y = 0; y < in.h; ++y)
          for (std::int64_t x = 0; x < in.w; ++x)
            out[static_cast<std::size_t>(((b * os.c + c) * os.h + 2 * y + dy) * os.w +
                                         2 * x + dx)] = input.at(p * os.n + b, c, y, x);
  }
  return Tensor(os, std::move(out));
}

}  // namespace pirm
