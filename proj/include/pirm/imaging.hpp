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

// Image files (PNG via libpng, binary PPM/PGM) and bicubic resampling.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "pirm/error.hpp"
#include "pirm/tensor.hpp"
#include "pirm/weights.hpp"

namespace pirm {

namespace detail {

inline std::string lower_extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline ImageU8 decode_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("cannot decode PNG '" + path + "': " + image.message);
  }
  const bool has_alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  // Read alpha images as RGBA and drop the alpha samples ourselves so colour
  // values pass through untouched instead of being composited.
  image.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  const int src_channels = has_alpha ? 4 : 3;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path + "': " + msg);
  }
  const int h = static_cast<int>(image.height);
  const int w = static_cast<int>(image.width);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
    for (int ch = 0; ch < 3; ++ch) rgb[p * 3 + ch] = buf[p * src_channels + ch];
  }
  return ImageU8(h, w, std::move(rgb));
}

// Binary PNM: P6 (RGB) or P5 (gray, promoted to RGB), maxval 255.
inline ImageU8 decode_pnm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  std::size_t pos = 2;
  auto fail = [&path](const std::string& why) -> IoError {
    return IoError("corrupt PPM '" + path + "': " + why);
  };
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("bad header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1L << 30)) throw fail("header value too large");
    }
    return v;
  };
  const bool gray = bytes[1] == '5';
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (w < 1 || h < 1) throw fail("empty image");
  if (maxval != 255) throw fail("only maxval 255 is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("bad header");
  ++pos;
  const std::size_t channels = gray ? 1 : 3;
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - pos < need) throw fail("truncated pixel data");
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t p = 0; p < static_cast<std::size_t>(w) * h; ++p) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      rgb[p * 3 + ch] = bytes[pos + p * channels + (gray ? 0 : ch)];
    }
  }
  return ImageU8(static_cast<int>(h), static_cast<int>(w), std::move(rgb));
}

}  // namespace detail

// Format is detected from the file contents, not the extension.
inline ImageU8 load_image(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return detail::decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5')) {
    return detail::decode_pnm(bytes, path);
  }
  throw IoError("'" + path + "' is not a PNG or binary PPM/PGM file");
}

inline bool is_supported_image(const std::string& path) {
  const std::string ext = detail::lower_extension(path);
  return ext == ".png" || ext == ".ppm" || ext == ".pgm";
}

inline void save_image(const ImageU8& img, const std::string& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext == ".ppm") {
    const std::string header =
        "P6\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.data.begin(), img.data.end());
    write_file_bytes(path, bytes);
    return;
  }
  if (ext == ".png") {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.w);
    image.height = static_cast<png_uint_32>(img.h);
    image.format = PNG_FORMAT_RGB;
    errno = 0;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
      const std::string os = errno ? std::string(": ") + std::strerror(errno) : "";
      throw IoError("cannot write PNG '" + path + "': " + image.message + os);
    }
    return;
  }
  throw ValidationError("unsupported image extension '" + ext + "' for '" + path +
                        "'; supported formats: .png, .ppm");
}

// ---------------------------------------------------------------------------
// Bicubic resampling

inline constexpr double kBicubicA = -0.5;

struct ResizeSpec {
  int target_h = 1;
  int target_w = 1;
  bool antialias = true;  // widen the kernel by the scale factor when shrinking
};

inline double cubic_kernel(double x, double a = kBicubicA) {
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

namespace detail {

struct Contributions {
  std::vector<std::vector<int>> index;
  std::vector<std::vector<double>> weight;
};

// Half-pixel-centred mapping, clamp-to-edge; weights normalised to sum 1.
inline Contributions resize_contributions(int in_size, int out_size, bool antialias) {
  const double scale = static_cast<double>(out_size) / in_size;
  const bool widen = antialias && scale < 1.0;
  const double support = widen ? 2.0 / scale : 2.0;
  Contributions c;
  c.index.resize(static_cast<std::size_t>(out_size));
  c.weight.resize(static_cast<std::size_t>(out_size));
  for (int i = 0; i < out_size; ++i) {
    const double u = (i + 0.5) / scale - 0.5;
    const int first = static_cast<int>(std::floor(u - support));
    const int last = static_cast<int>(std::ceil(u + support));
    double sum = 0.0;
    auto& idx = c.index[static_cast<std::size_t>(i)];
    auto& wts = c.weight[static_cast<std::size_t>(i)];
    for (int j = first; j <= last; ++j) {
      const double d = u - j;
      const double wv = widen ? scale * cubic_kernel(d * scale) : cubic_kernel(d);
      if (wv == 0.0) continue;
      idx.push_back(std::clamp(j, 0, in_size - 1));
      wts.push_back(wv);
      sum += wv;
    }
    for (double& v : wts) v /= sum;
  }
  return c;
}

// Interleaved RGB samples kept in double between resampling passes.
struct RgbBufferD {
  int h = 0;
  int w = 0;
  std::vector<double> v;

  double at(int y, int x, int ch) const { return v[(static_cast<std::size_t>(y) * w + x) * 3 + ch]; }
};

inline RgbBufferD to_buffer(const ImageU8& img) {
  return {img.h, img.w, std::vector<double>(img.data.begin(), img.data.end())};
}

inline ImageU8 quantize_buffer(const RgbBufferD& b) {
  std::vector<std::uint8_t> out(b.v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = quantize_u8(b.v[i]);
  return ImageU8(b.h, b.w, std::move(out));
}

inline RgbBufferD resample_vertical(const RgbBufferD& in, int target_h, bool antialias) {
  const auto rows = resize_contributions(in.h, target_h, antialias);
  RgbBufferD out{target_h, in.w, std::vector<double>(static_cast<std::size_t>(target_h) * in.w * 3)};
  for (int y = 0; y < target_h; ++y) {
    const auto& idx = rows.index[static_cast<std::size_t>(y)];
    const auto& wts = rows.weight[static_cast<std::size_t>(y)];
    for (int x = 0; x < in.w; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) acc += wts[k] * in.at(idx[k], x, ch);
        out.v[(static_cast<std::size_t>(y) * in.w + x) * 3 + ch] = acc;
      }
  }
  return out;
}

inline RgbBufferD resample_horizontal(const RgbBufferD& in, int target_w, bool antialias) {
  const auto cols = resize_contributions(in.w, target_w, antialias);
  RgbBufferD out{in.h, target_w, std::vector<double>(static_cast<std::size_t>(in.h) * target_w * 3)};
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < target_w; ++x) {
      const auto& idx = cols.index[static_cast<std::size_t>(x)];
      const auto& wts = cols.weight[static_cast<std::size_t>(x)];
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) acc += wts[k] * in.at(y, idx[k], ch);
        out.v[(static_cast<std::size_t>(y) * target_w + x) * 3 + ch] = acc;
      }
    }
  return out;
}

}  // namespace detail

// Separable bicubic (a = -0.5) resize, vertical pass first, intermediate kept
// in double, final values clamped and rounded half away from zero.
inline ImageU8 resize_bicubic(const ImageU8& img, const ResizeSpec& spec) {
  if (spec.target_h < 1 || spec.target_w < 1) {
    throw ValidationError("resize target must be at least 1x1, got " +
                          std::to_string(spec.target_h) + "x" + std::to_string(spec.target_w));
  }
  const auto mid = detail::resample_vertical(detail::to_buffer(img), spec.target_h, spec.antialias);
  return detail::quantize_buffer(detail::resample_horizontal(mid, spec.target_w, spec.antialias));
}

}  // namespace pirm
