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

// Challenge Total Score:
//
//   total = alpha * (psnr - psnr_baseline)
//         + beta  * (perceptual - ssim_baseline)
//         + gamma * min(4, time_baseline / time_solution)
//
// The perceptual argument is MS-SSIM.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "pirm/error.hpp"

namespace pirm {

enum class Track { a, b };
enum class Subscore { a, b, c };

inline constexpr double kMaxSpeedup = 4.0;

struct ScoreWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double psnr_baseline = 0.0;
  double ssim_baseline = 0.0;
  double time_baseline_ms = 0.0;

  bool operator==(const ScoreWeights&) const = default;
};

struct ScoreResult {
  double total = 0.0;
  double psnr_term = 0.0;
  double perceptual_term = 0.0;
  double time_term = 0.0;
};

inline ScoreWeights weights_for(Track track, Subscore sub, double time_baseline_ms) {
  if (!(time_baseline_ms > 0.0) || !std::isfinite(time_baseline_ms)) {
    throw DomainError("baseline time must be a positive finite number of ms");
  }
  struct Triple { double alpha, beta, gamma; };
  // Indexed by subscore a, b, c.
  static constexpr std::array<Triple, 3> kTrackA{{{4, 100, 1}, {1, 400, 1}, {2, 200, 1.5}}};
  static constexpr std::array<Triple, 3> kTrackB{{{4, 100, 2}, {1, 400, 2}, {2, 200, 2.9}}};

  const Triple t = (track == Track::a ? kTrackA : kTrackB)[static_cast<std::size_t>(sub)];
  ScoreWeights w;
  w.alpha = t.alpha;
  w.beta = t.beta;
  w.gamma = t.gamma;
  w.psnr_baseline = track == Track::a ? 26.5 : 21.0;
  w.ssim_baseline = track == Track::a ? 0.94 : 0.90;
  w.time_baseline_ms = time_baseline_ms;
  return w;
}

inline ScoreResult total_score(double psnr_db, double perceptual, double time_solution_ms,
                               const ScoreWeights& w) {
  if (!(time_solution_ms > 0.0) || !std::isfinite(time_solution_ms)) {
    throw DomainError("solution time must be a positive finite number of ms, got " +
                      std::to_string(time_solution_ms));
  }
  if (!(w.gamma > 0.0) || !(w.time_baseline_ms > 0.0)) {
    throw DomainError("score weights need gamma > 0 and a positive baseline time");
  }
  ScoreResult r;
  r.psnr_term = w.alpha * (psnr_db - w.psnr_baseline);
  r.perceptual_term = w.beta * (perceptual - w.ssim_baseline);
  r.time_term = w.gamma * std::min(kMaxSpeedup, w.time_baseline_ms / time_solution_ms);
  r.total = r.psnr_term + r.perceptual_term + r.time_term;
  return r;
}

inline std::string_view track_name(Track t) { return t == Track::a ? "a" : "b"; }

inline std::string_view subscore_name(Subscore s) {
  switch (s) {
    case Subscore::a: return "a";
    case Subscore::b: return "b";
    case Subscore::c: return "c";
  }
  return "?";
}

inline std::optional<Track> parse_track(std::string_view s) {
  if (s == "a" || s == "A") return Track::a;
  if (s == "b" || s == "B") return Track::b;
  return std::nullopt;
}

inline std::optional<Subscore> parse_subscore(std::string_view s) {
  if (s == "a" || s == "A") return Subscore::a;
  if (s == "b" || s == "B") return Subscore::b;
  if (s == "c" || s == "C") return Subscore::c;
  return std::nullopt;
}

}  // namespace pirm
