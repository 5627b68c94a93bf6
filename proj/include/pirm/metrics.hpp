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

// Full-reference quality metrics on 8-bit RGB images.
//
// PSNR pools all three channels over the full frame. SSIM and MS-SSIM run on
// BT.601 luma (0.299 R + 0.587 G + 0.114 B, kept in double precision) with an
// 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255 and
// "valid" filtering, i.e. no border padding. MS-SSIM uses five dyadic scales
// produced by 2x2 mean pooling and the published per-scale exponents; the
// luminance term enters only at the coarsest scale.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pirm/error.hpp"
#include "pirm/tensor.hpp"

namespace pirm {

inline constexpr double kPsnrCapDb = 100.0;

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  // Sums to 1.0001 as published; deliberately not renormalised.
  std::array<double, 5> scale_weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
};

inline double psnr(const ImageU8& a, const ImageU8& b) {
  if (a.h != b.h || a.w != b.w) {
    throw ShapeError("psnr on images of different size: " + std::to_string(a.h) + "x" +
                     std::to_string(a.w) + " vs " + std::to_string(b.h) + "x" +
                     std::to_string(b.w));
  }
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const int d = static_cast<int>(a.data[i]) - static_cast<int>(b.data[i]);
    sse += static_cast<std::uint64_t>(d * d);
  }
  if (sse == 0) return kPsnrCapDb;
  const double mse = static_cast<double>(sse) / static_cast<double>(a.data.size());
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace detail {

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

inline Plane luma(const ImageU8& img) {
  Plane p{img.h, img.w, std::vector<double>(static_cast<std::size_t>(img.h) * img.w)};
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    p.v[i] = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] +
             0.114 * img.data[3 * i + 2];
  }
  return p;
}

inline std::vector<double> gaussian_window_1d(int size, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    g[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable "valid" filtering: rows first, then columns.
inline Plane filter_valid(const Plane& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.w - n + 1;
  const int oh = in.h - n + 1;
  Plane rows{in.h, ow, std::vector<double>(static_cast<std::size_t>(in.h) * ow)};
  for (int y = 0; y < in.h; ++y) {
    const double* src = in.v.data() + static_cast<std::size_t>(y) * in.w;
    double* dst = rows.v.data() + static_cast<std::size_t>(y) * ow;
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * src[x + i];
      dst[x] = acc;
    }
  }
  Plane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int y = 0; y < oh; ++y) {
    double* dst = out.v.data() + static_cast<std::size_t>(y) * ow;
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * rows.at(y + i, x);
      dst[x] = acc;
    }
  }
  return out;
}

inline Plane product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

struct SsimTerms {
  double ssim = 0.0;  // mean of luminance * contrast-structure
  double cs = 0.0;    // mean of contrast-structure alone
};

inline SsimTerms ssim_terms(const Plane& x, const Plane& y, const SsimParams& p) {
  const auto k = gaussian_window_1d(p.window, p.sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);

  const Plane mx = filter_valid(x, k);
  const Plane my = filter_valid(y, k);
  const Plane exx = filter_valid(product(x, x), k);
  const Plane eyy = filter_valid(product(y, y), k);
  const Plane exy = filter_valid(product(x, y), k);

  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double mux = mx.v[i];
    const double muy = my.v[i];
    const double mu_xy = mux * muy;
    const double sxx = exx.v[i] - mux * mux;
    const double syy = eyy.v[i] - muy * muy;
    const double sxy = exy.v[i] - mu_xy;
    const double lum = (2.0 * mu_xy + c1) / (mux * mux + muy * muy + c1);
    const double cs = (2.0 * sxy + c2) / (sxx + syy + c2);
    ssim_sum += lum * cs;
    cs_sum += cs;
  }
  const double count = static_cast<double>(mx.v.size());
  return {ssim_sum / count, cs_sum / count};
}

inline Plane downsample2(const Plane& in) {
  Plane out{in.h / 2, in.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.v[static_cast<std::size_t>(y) * out.w + x] =
          (in.at(2 * y, 2 * x) + in.at(2 * y, 2 * x + 1) + in.at(2 * y + 1, 2 * x) +
           in.at(2 * y + 1, 2 * x + 1)) *
          0.25;
  return out;
}

inline void check_same_size(const ImageU8& a, const ImageU8& b, const char* metric) {
  if (a.h != b.h || a.w != b.w) {
    throw ShapeError(std::string(metric) + " on images of different size: " +
                     std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " +
                     std::to_string(b.h) + "x" + std::to_string(b.w));
  }
}

}  // namespace detail

inline double ssim(const ImageU8& a, const ImageU8& b, const SsimParams& p = {}) {
  detail::check_same_size(a, b, "ssim");
  if (a.h < p.window || a.w < p.window) {
    throw SizeError("ssim needs images of at least " + std::to_string(p.window) + "x" +
                    std::to_string(p.window));
  }
  return detail::ssim_terms(detail::luma(a), detail::luma(b), p).ssim;
}

inline double ms_ssim(const ImageU8& a, const ImageU8& b, const SsimParams& p = {}) {
  detail::check_same_size(a, b, "ms_ssim");
  const int scales = static_cast<int>(p.scale_weights.size());
  const int min_side = p.window << (scales - 1);
  if (a.h < min_side || a.w < min_side) {
    throw SizeError("ms_ssim needs images of at least " + std::to_string(min_side) + "x" +
                    std::to_string(min_side) + " for " + std::to_string(scales) +
                    " scales, got " + std::to_string(a.h) + "x" + std::to_string(a.w));
  }
  detail::Plane x = detail::luma(a);
  detail::Plane y = detail::luma(b);
  double result = 1.0;
  for (int s = 0; s < scales; ++s) {
    const auto t = detail::ssim_terms(x, y, p);
    const bool coarsest = s == scales - 1;
    // Negative terms would make the fractional power undefined; clamp at 0.
    const double term = std::max(0.0, coarsest ? t.ssim : t.cs);
    result *= std::pow(term, p.scale_weights[static_cast<std::size_t>(s)]);
    if (!coarsest) {
      x = detail::downsample2(x);
      y = detail::downsample2(y);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

struct ImageMetrics {
  std::string name;
  double psnr_db = 0.0;
  double ms_ssim = 0.0;
  std::optional<std::string> error;
};

struct MetricReport {
  std::vector<ImageMetrics> images;
  double mean_psnr_db = 0.0;
  double mean_ms_ssim = 0.0;
  std::size_t failed = 0;

  // Arithmetic means over the images that evaluated successfully.
  void finalize() {
    double ps = 0.0, ms = 0.0;
    std::size_t ok = 0;
    failed = 0;
    for (const auto& m : images) {
      if (m.error) {
        ++failed;
        continue;
      }
      ps += m.psnr_db;
      ms += m.ms_ssim;
      ++ok;
    }
    mean_psnr_db = ok ? ps / static_cast<double>(ok) : 0.0;
    mean_ms_ssim = ok ? ms / static_cast<double>(ok) : 0.0;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& m : images) {
      nlohmann::ordered_json r;
      r["name"] = m.name;
      if (m.error) {
        r["error"] = *m.error;
      } else {
        r["psnr_db"] = m.psnr_db;
        r["ms_ssim"] = m.ms_ssim;
      }
      rows.push_back(std::move(r));
    }
    j["images"] = std::move(rows);
    j["count"] = images.size();
    j["failed"] = failed;
    j["mean_psnr_db"] = mean_psnr_db;
    j["mean_ms_ssim"] = mean_ms_ssim;
    return j;
  }

  std::string to_csv() const {
    std::string out = "name,psnr_db,ms_ssim\n";
    char buf[96];
    for (const auto& m : images) {
      if (m.error) {
        out += m.name + ",,\n";
        continue;
      }
      std::snprintf(buf, sizeof buf, ",%.6f,%.8f\n", m.psnr_db, m.ms_ssim);
      out += m.name + buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6f,%.8f\n", mean_psnr_db, mean_ms_ssim);
    out += buf;
    return out;
  }
};

}  // namespace pirm
