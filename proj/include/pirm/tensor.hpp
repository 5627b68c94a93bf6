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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pirm/error.hpp"

namespace pirm {

// Largest element count a tensor may hold.
inline constexpr std::int64_t kMaxTensorElements = std::int64_t{1} << 31;

struct Shape {
  std::int64_t n = 1;
  std::int64_t c = 1;
  std::int64_t h = 1;
  std::int64_t w = 1;

  std::int64_t count() const { return n * c * h * w; }
  bool operator==(const Shape&) const = default;

  std::string to_string() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" +
           std::to_string(h) + "x" + std::to_string(w);
  }
};

inline void validate_shape(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw SizeError("all tensor dimensions must be >= 1, got " + s.to_string());
  }
  // Multiply stepwise so that the overflow check itself cannot overflow.
  std::int64_t total = 1;
  for (std::int64_t d : {s.n, s.c, s.h, s.w}) {
    if (d > kMaxTensorElements || total > kMaxTensorElements / d) {
      throw SizeError("tensor " + s.to_string() + " exceeds 2^31 elements");
    }
    total *= d;
  }
}

// Dense single-precision (n, c, h, w) tensor in planar row-major layout.
// Immutable once constructed: kernels build a std::vector and move it in.
class Tensor {
 public:
  Tensor() : Tensor(Shape{}, std::vector<float>(1, 0.0f)) {}

  Tensor(Shape shape, std::vector<float> data)
      : shape_(shape), data_(std::move(data)) {
    validate_shape(shape_);
    if (static_cast<std::int64_t>(data_.size()) != shape_.count()) {
      throw ShapeError("data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.to_string());
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::int64_t n() const noexcept { return shape_.n; }
  std::int64_t c() const noexcept { return shape_.c; }
  std::int64_t h() const noexcept { return shape_.h; }
  std::int64_t w() const noexcept { return shape_.w; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t index(std::int64_t b, std::int64_t ch, std::int64_t y,
                    std::int64_t x) const noexcept {
    return static_cast<std::size_t>(((b * shape_.c + ch) * shape_.h + y) *
                                        shape_.w +
                                    x);
  }

  float at(std::int64_t b, std::int64_t ch, std::int64_t y,
           std::int64_t x) const noexcept {
    return data_[index(b, ch, y, x)];
  }

  std::span<const float> data() const noexcept { return data_; }

  // One contiguous h*w plane.
  std::span<const float> plane(std::int64_t b, std::int64_t ch) const noexcept {
    return std::span<const float>(data_).subspan(
        index(b, ch, 0, 0), static_cast<std::size_t>(shape_.h * shape_.w));
  }

  auto begin() const noexcept { return data_.cbegin(); }
  auto end() const noexcept { return data_.cend(); }

  // Moves the storage out, leaving this tensor unusable.
  std::vector<float> release() && { return std::move(data_); }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

inline Tensor tensor_create(std::int64_t n, std::int64_t c, std::int64_t h,
                            std::int64_t w, float fill) {
  const Shape s{n, c, h, w};
  validate_shape(s);
  return Tensor(s, std::vector<float>(static_cast<std::size_t>(s.count()), fill));
}

// 8-bit interleaved RGB image.
struct ImageU8 {
  static constexpr int channels = 3;

  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> data;

  ImageU8() = default;
  ImageU8(int height, int width, std::vector<std::uint8_t> pixels)
      : h(height), w(width), data(std::move(pixels)) {
    if (h < 1 || w < 1) {
      throw SizeError("image dimensions must be >= 1, got " +
                      std::to_string(h) + "x" + std::to_string(w));
    }
    if (data.size() != static_cast<std::size_t>(h) * w * channels) {
      throw ShapeError("image data length " + std::to_string(data.size()) +
                       " does not match " + std::to_string(h) + "x" +
                       std::to_string(w) + "x3");
    }
  }
  ImageU8(int height, int width, std::uint8_t fill)
      : ImageU8(height, width,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(std::max(height, 0)) *
                        std::max(width, 0) * channels,
                    fill)) {}

  std::uint8_t at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * w + x) * channels + ch];
  }

  bool operator==(const ImageU8&) const = default;
};

// How 8-bit samples map onto tensor values.
enum class ValueScale {
  unit,  // s -> s / 255
  raw,   // s -> s
};

inline float scale_factor(ValueScale scale) {
  return scale == ValueScale::unit ? 255.0f : 1.0f;
}

// Clamp to [0, 255] first, then round half away from zero. NaN maps to 0.
inline std::uint8_t quantize_u8(float v) {
  if (std::isnan(v)) return 0;
  v = std::clamp(v, 0.0f, 255.0f);
  return static_cast<std::uint8_t>(std::round(v));
}

inline std::uint8_t quantize_u8(double v) {
  if (std::isnan(v)) return 0;
  v = std::clamp(v, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::round(v));
}

inline Tensor image_to_tensor(const ImageU8& img, ValueScale scale) {
  const std::int64_t plane = static_cast<std::int64_t>(img.h) * img.w;
  std::vector<float> out(static_cast<std::size_t>(plane * 3));
  const float div = scale_factor(scale);
  for (std::int64_t p = 0; p < plane; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      out[static_cast<std::size_t>(ch * plane + p)] =
          static_cast<float>(img.data[static_cast<std::size_t>(p * 3 + ch)]) / div;
    }
  }
  return Tensor(Shape{1, 3, img.h, img.w}, std::move(out));
}

inline ImageU8 tensor_to_image(const Tensor& t, ValueScale scale) {
  if (t.n() != 1 || t.c() != 3) {
    throw ShapeError("tensor_to_image expects 1x3xHxW, got " +
                     t.shape().to_string());
  }
  const std::int64_t plane = t.h() * t.w();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(plane * 3));
  const float mul = scale_factor(scale);
  const auto src = t.data();
  for (std::int64_t p = 0; p < plane; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      out[static_cast<std::size_t>(p * 3 + ch)] =
          quantize_u8(src[static_cast<std::size_t>(ch * plane + p)] * mul);
    }
  }
  return ImageU8(static_cast<int>(t.h()), static_cast<int>(t.w()), std::move(out));
}

inline Tensor eltwise_add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("eltwise_add operands differ: " + a.shape().to_string() +
                     " vs " + b.shape().to_string());
  }
  std::vector<float> out(a.size());
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor(a.shape(), std::move(out));
}

inline Shape concat_channels_shape(std::span<const Shape> parts) {
  if (parts.empty()) throw ShapeError("concat_channels needs at least one input");
  Shape out = parts.front();
  out.c = 0;
  for (const Shape& s : parts) {
    if (s.n != out.n || s.h != out.h || s.w != out.w) {
      throw ShapeError("concat_channels batch/spatial mismatch: " +
                       parts.front().to_string() + " vs " + s.to_string());
    }
    out.c += s.c;
  }
  return out;
}

inline Tensor concat_channels(std::span<const Tensor* const> parts) {
  std::vector<Shape> shapes;
  shapes.reserve(parts.size());
  for (const Tensor* t : parts) shapes.push_back(t->shape());
  const Shape out_shape = concat_channels_shape(shapes);

  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(out_shape.count()));
  for (std::int64_t b = 0; b < out_shape.n; ++b) {
    for (const Tensor* t : parts) {
      for (std::int64_t ch = 0; ch < t->c(); ++ch) {
        const auto p = t->plane(b, ch);
        out.insert(out.end(), p.begin(), p.end());
      }
    }
  }
  return Tensor(out_shape, std::move(out));
}

inline Tensor concat_channels(std::span<const Tensor> parts) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  for (const Tensor& t : parts) ptrs.push_back(&t);
  return concat_channels(std::span<const Tensor* const>(ptrs));
}

// Channels [first, first + count) of every batch item.
inline Tensor slice_channels(const Tensor& t, std::int64_t first,
                             std::int64_t count) {
  if (first < 0 || count < 1 || first + count > t.c()) {
    throw ShapeError("channel slice [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") out of range for " +
                     t.shape().to_string());
  }
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(t.n() * count * t.h() * t.w()));
  for (std::int64_t b = 0; b < t.n(); ++b) {
    for (std::int64_t ch = first; ch < first + count; ++ch) {
      const auto p = t.plane(b, ch);
      out.insert(out.end(), p.begin(), p.end());
    }
  }
  return Tensor(Shape{t.n(), count, t.h(), t.w()}, std::move(out));
}

}  // namespace pirm
