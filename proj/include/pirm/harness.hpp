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

// Evaluation and benchmarking: dataset preparation, metric runs over image
// directories, HD runtime measurement, peak-memory probing and assembly of
// the challenge score table.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pirm/error.hpp"
#include "pirm/graph.hpp"
#include "pirm/imaging.hpp"
#include "pirm/metrics.hpp"
#include "pirm/scoring.hpp"
#include "pirm/tensor.hpp"
#include "pirm/weights.hpp"
#include "pirm/zoo.hpp"

namespace pirm {

inline constexpr int kHdWidth = 1280;
inline constexpr int kHdHeight = 720;
inline constexpr std::uint32_t kBenchSeed = 20180908;
inline constexpr int kMinTimedRuns = 3;

// ---------------------------------------------------------------------------
// Timing

struct TimingReport {
  int warmup_runs = 0;
  int timed_runs = 0;
  std::vector<double> runs_ms;
  double median_ms = 0.0;
  Shape input;
  int threads = 1;
  std::string output_checksum;  // FNV-1a over the output's float bits

  bool warmup_skipped() const { return warmup_runs == 0; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["input"] = {input.n, input.c, input.h, input.w};
    j["threads"] = threads;
    j["warmup_runs"] = warmup_runs;
    j["warmup_skipped"] = warmup_skipped();
    j["timed_runs"] = timed_runs;
    j["output_checksum"] = output_checksum;
    j["runs_ms"] = runs_ms;
    j["median_ms"] = median_ms;
    return j;
  }
};

// Middle order statistic; mean of the two middle values for even counts.
inline double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline std::string checksum(const Tensor& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (float v : t) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Uniform [0, 1) values from a fixed-seed mt19937; identical on every
// standard library since only raw engine output is used.
inline Tensor benchmark_input(const Shape& shape, std::uint32_t seed = kBenchSeed) {
  validate_shape(shape);
  std::mt19937 rng(seed);
  std::vector<float> v(static_cast<std::size_t>(shape.count()));
  for (float& x : v) x = static_cast<float>(rng() >> 8) * (1.0f / 16777216.0f);
  return Tensor(shape, std::move(v));
}

// Times Executor::run only; graph binding and input generation happen first.
inline TimingReport time_model(const GraphSpec& g, const WeightStore& w, int height, int width,
                               int warmup, int runs, std::uint32_t seed = kBenchSeed,
                               int threads = 1) {
  if (runs < kMinTimedRuns) {
    throw ValidationError("need at least " + std::to_string(kMinTimedRuns) +
                          " timed runs, got " + std::to_string(runs));
  }
  if (warmup < 0) throw ValidationError("warmup runs must be >= 0");
  const Shape shape{1, g.input_channels, height, width};
  const Executor exec(g, w, shape);
  const Tensor input = benchmark_input(shape, seed);
  const ExecOptions opts{threads};

  TimingReport r;
  r.warmup_runs = warmup;
  r.timed_runs = runs;
  r.input = shape;
  r.threads = threads;
  for (int i = 0; i < warmup; ++i) (void)exec.run(input, opts);
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor out = exec.run(input, opts);
    const auto t1 = std::chrono::steady_clock::now();
    r.runs_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    if (i == 0) r.output_checksum = checksum(out);
  }
  r.median_ms = median(r.runs_ms);
  return r;
}

// ---------------------------------------------------------------------------
// Peak resident memory (Linux /proc; unavailable elsewhere)

struct MemoryReading {
  std::optional<std::uint64_t> peak_bytes;
  std::uint64_t baseline_bytes = 0;
  bool peak_reset = false;  // whether the kernel high-water mark could be reset

  bool available() const { return peak_bytes.has_value(); }
};

namespace detail {

struct ProcMemory {
  std::uint64_t rss = 0;
  std::uint64_t hwm = 0;
};

inline std::optional<ProcMemory> read_proc_memory() {
  std::ifstream f("/proc/self/status");
  if (!f) return std::nullopt;
  ProcMemory m;
  bool rss = false, hwm = false;
  std::string line;
  while (std::getline(f, line)) {
    auto value_kb = [&line]() {
      std::istringstream in(line.substr(line.find(':') + 1));
      std::uint64_t kb = 0;
      in >> kb;
      return kb * 1024;
    };
    if (line.rfind("VmRSS:", 0) == 0) {
      m.rss = value_kb();
      rss = true;
    } else if (line.rfind("VmHWM:", 0) == 0) {
      m.hwm = value_kb();
      hwm = true;
    }
  }
  if (!rss || !hwm) return std::nullopt;
  return m;
}

inline bool reset_peak_rss() {
  std::ofstream f("/proc/self/clear_refs");
  if (!f) return false;
  f << "5";
  f.flush();
  return static_cast<bool>(f);
}

// Running maxima of the probes currently active on this thread, innermost
// last. Lets a nested probe reset the kernel counter without losing the peak
// an enclosing probe already observed.
inline std::vector<std::uint64_t>& probe_stack() {
  thread_local std::vector<std::uint64_t> stack;
  return stack;
}

}  // namespace detail

template <class Action>
MemoryReading peak_memory_probe(Action&& action) {
  auto& stack = detail::probe_stack();
  const auto before = detail::read_proc_memory();
  if (!before) {
    action();
    return {};
  }
  if (!stack.empty()) stack.back() = std::max(stack.back(), before->hwm);

  MemoryReading r;
  r.peak_reset = detail::reset_peak_rss();
  r.baseline_bytes = before->rss;
  stack.push_back(before->rss);
  try {
    action();
  } catch (...) {
    stack.pop_back();
    throw;
  }
  const auto after = detail::read_proc_memory();
  std::uint64_t peak = stack.back();
  stack.pop_back();
  if (after) peak = std::max({peak, after->hwm, after->rss});
  r.peak_bytes = peak;
  if (!stack.empty()) stack.back() = std::max(stack.back(), peak);
  return r;
}

// ---------------------------------------------------------------------------
// Dataset preparation and evaluation

// Supported images in dir keyed by file stem.
inline std::map<std::string, std::filesystem::path> list_images(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir + "' is not a readable directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || !is_supported_image(entry.path().string())) continue;
    const std::string stem = entry.path().stem().string();
    if (!out.emplace(stem, entry.path()).second) {
      throw ValidationError("'" + dir + "' holds more than one image named '" + stem + "'");
    }
  }
  if (ec) throw IoError("cannot list '" + dir + "': " + ec.message());
  return out;
}

// Writes a bicubic 1/scale copy of every image in hr_dir under the same file
// name. Returns the names written.
inline std::vector<std::string> prepare_dataset(const std::string& hr_dir,
                                                const std::string& out_dir, int scale) {
  if (scale < 1) throw ValidationError("scale must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  std::vector<std::string> written;
  for (const auto& [stem, path] : list_images(hr_dir)) {
    const ImageU8 hr = load_image(path.string());
    const ImageU8 lr = resize_bicubic(
        hr, ResizeSpec{std::max(1, hr.h / scale), std::max(1, hr.w / scale), true});
    const auto dst = std::filesystem::path(out_dir) / path.filename();
    save_image(lr, dst.string());
    written.push_back(path.filename().string());
  }
  return written;
}

struct EvalOptions {
  bool pre_upscale = false;  // bicubic-resize each input to its target's size
  int threads = 1;
};

inline void require_weights(const GraphSpec& g, const WeightStore& w) {
  for (const Node& n : g.nodes) {
    if ((n.op == OpKind::conv || n.op == OpKind::conv_transpose) &&
        w.find(n.id + ".weight") == nullptr) {
      throw ExecutionError("missing weight entry '" + n.id + ".weight' for node '" + n.id + "'");
    }
  }
}

inline ImageMetrics evaluate_image(const GraphSpec& g, const WeightStore& w,
                                   const std::string& name, const ImageU8& input,
                                   const ImageU8& target, const EvalOptions& opts) {
  ImageMetrics m;
  m.name = name;
  try {
    const ImageU8 src = opts.pre_upscale
                            ? resize_bicubic(input, ResizeSpec{target.h, target.w, true})
                            : input;
    const Tensor x = image_to_tensor(src, g.scale);
    const Tensor y = execute(g, w, x, ExecOptions{opts.threads});
    const ImageU8 out = tensor_to_image(y, g.scale);
    m.psnr_db = psnr(out, target);
    m.ms_ssim = ms_ssim(out, target);
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  return m;
}

inline MetricReport evaluate_pairs(const GraphSpec& g, const WeightStore& w,
                                   const std::string& input_dir, const std::string& target_dir,
                                   const EvalOptions& opts = {}) {
  require_weights(g, w);
  const auto inputs = list_images(input_dir);
  const auto targets = list_images(target_dir);
  std::string missing_target, missing_input;
  for (const auto& [stem, _] : inputs)
    if (!targets.contains(stem)) missing_target += (missing_target.empty() ? "" : ", ") + stem;
  for (const auto& [stem, _] : targets)
    if (!inputs.contains(stem)) missing_input += (missing_input.empty() ? "" : ", ") + stem;
  if (!missing_target.empty() || !missing_input.empty()) {
    std::string msg = "image sets do not match;";
    if (!missing_target.empty()) msg += " missing in target dir: " + missing_target + ";";
    if (!missing_input.empty()) msg += " missing in input dir: " + missing_input + ";";
    throw ValidationError(msg);
  }

  MetricReport report;
  for (const auto& [stem, in_path] : inputs) {
    ImageMetrics m;
    try {
      const ImageU8 input = load_image(in_path.string());
      const ImageU8 target = load_image(targets.at(stem).string());
      m = evaluate_image(g, w, stem, input, target, opts);
    } catch (const std::exception& e) {
      m.name = stem;
      m.error = e.what();
    }
    report.images.push_back(std::move(m));
  }
  report.finalize();
  return report;
}

// ---------------------------------------------------------------------------
// Challenge report

struct ChallengeRow {
  std::string name;
  double psnr_db = 0.0;
  double ms_ssim = 0.0;
  double time_ms = 0.0;
  std::optional<std::uint64_t> peak_memory_bytes;
  double score_a = 0.0;
  double score_b = 0.0;
  double score_c = 0.0;
  std::optional<std::string> error;
};

struct ChallengeReport {
  Track track = Track::a;
  double baseline_time_ms = 0.0;
  bool baseline_measured = false;
  std::vector<ChallengeRow> rows;

  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
  std::string to_table() const;
};

// Fills in the three subscores from the row's own metric and time fields.
inline void score_row(ChallengeRow& row, Track track, double baseline_time_ms) {
  row.score_a = total_score(row.psnr_db, row.ms_ssim, row.time_ms,
                            weights_for(track, Subscore::a, baseline_time_ms)).total;
  row.score_b = total_score(row.psnr_db, row.ms_ssim, row.time_ms,
                            weights_for(track, Subscore::b, baseline_time_ms)).total;
  row.score_c = total_score(row.psnr_db, row.ms_ssim, row.time_ms,
                            weights_for(track, Subscore::c, baseline_time_ms)).total;
}

inline nlohmann::ordered_json ChallengeReport::to_json() const {
  nlohmann::ordered_json j;
  j["track"] = std::string(track_name(track));
  j["baseline_time_ms"] = baseline_time_ms;
  j["baseline_source"] = baseline_measured ? "measured-srcnn" : "given";
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["name"] = r.name;
    if (r.error) {
      o["error"] = *r.error;
    } else {
      o["psnr_db"] = r.psnr_db;
      o["ms_ssim"] = r.ms_ssim;
      o["time_ms"] = r.time_ms;
      o["peak_memory_bytes"] = r.peak_memory_bytes
                                   ? nlohmann::ordered_json(*r.peak_memory_bytes)
                                   : nlohmann::ordered_json("unavailable");
      o["score_a"] = r.score_a;
      o["score_b"] = r.score_b;
      o["score_c"] = r.score_c;
    }
    arr.push_back(std::move(o));
  }
  j["rows"] = std::move(arr);
  return j;
}

inline std::string ChallengeReport::to_csv() const {
  std::string out = "name,psnr_db,ms_ssim,time_ms,peak_memory_bytes,score_a,score_b,score_c\n";
  char buf[256];
  for (const auto& r : rows) {
    if (r.error) {
      out += r.name + ",,,,,,,\n";
      continue;
    }
    const std::string mem = r.peak_memory_bytes ? std::to_string(*r.peak_memory_bytes) : "";
    std::snprintf(buf, sizeof buf, ",%.4f,%.6f,%.3f,%s,%.4f,%.4f,%.4f\n", r.psnr_db, r.ms_ssim,
                  r.time_ms, mem.c_str(), r.score_a, r.score_b, r.score_c);
    out += r.name + buf;
  }
  return out;
}

inline std::string ChallengeReport::to_table() const {
  std::size_t name_w = 5;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  char buf[320];
  std::string out;
  std::snprintf(buf, sizeof buf, "Track %s, baseline time %.1f ms (%s)\n",
                track == Track::a ? "A" : "B", baseline_time_ms,
                baseline_measured ? "measured SRCNN" : "given");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-*s  %7s  %8s  %10s  %9s  %8s  %8s  %8s\n",
                static_cast<int>(name_w), "Model", "PSNR", "MS-SSIM", "CPU, ms", "RAM, MB",
                "Score A", "Score B", "Score C");
  out += buf;
  for (const auto& r : rows) {
    if (r.error) {
      std::snprintf(buf, sizeof buf, "%-*s  error: %s\n", static_cast<int>(name_w),
                    r.name.c_str(), r.error->c_str());
      out += buf;
      continue;
    }
    char mem[32] = "n/a";
    if (r.peak_memory_bytes) {
      std::snprintf(mem, sizeof mem, "%.1f",
                    static_cast<double>(*r.peak_memory_bytes) / (1024.0 * 1024.0));
    }
    std::snprintf(buf, sizeof buf, "%-*s  %7.2f  %8.4f  %10.1f  %9s  %8.2f  %8.2f  %8.2f\n",
                  static_cast<int>(name_w), r.name.c_str(), r.psnr_db, r.ms_ssim, r.time_ms, mem,
                  r.score_a, r.score_b, r.score_c);
    out += buf;
  }
  return out;
}

// Builds a report from (name, psnr, ms-ssim, time) rows as found in a rows
// file: either {"rows": [...]} or a bare array.
inline ChallengeReport report_from_rows(const nlohmann::json& doc, Track track,
                                        double baseline_time_ms) {
  const nlohmann::json& arr = doc.is_object() && doc.contains("rows") ? doc.at("rows") : doc;
  if (!arr.is_array()) throw FormatError("rows file must be an array or {\"rows\": [...]}");
  ChallengeReport rep;
  rep.track = track;
  rep.baseline_time_ms = baseline_time_ms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& o = arr[i];
    const std::string where = "rows[" + std::to_string(i) + "]";
    if (!o.is_object()) throw FormatError(where + ": expected an object");
    auto number = [&](const char* key) {
      if (!o.contains(key) || !o.at(key).is_number()) {
        throw FormatError(where + "." + key + ": expected a number");
      }
      return o.at(key).get<double>();
    };
    ChallengeRow row;
    if (!o.contains("name") || !o.at("name").is_string()) {
      throw FormatError(where + ".name: expected a string");
    }
    row.name = o.at("name").get<std::string>();
    row.psnr_db = number("psnr_db");
    row.ms_ssim = number("ms_ssim");
    row.time_ms = number("time_ms");
    if (o.contains("peak_memory_bytes") && o.at("peak_memory_bytes").is_number_unsigned()) {
      row.peak_memory_bytes = o.at("peak_memory_bytes").get<std::uint64_t>();
    }
    score_row(row, track, baseline_time_ms);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// Re-reads a serialized report and checks every score column against the
// scoring formula applied to that row's fields. Returns the parsed report.
inline ChallengeReport read_report(const nlohmann::json& doc, double tolerance = 1e-9) {
  if (!doc.is_object() || !doc.contains("track") || !doc.contains("baseline_time_ms")) {
    throw FormatError("report must hold track, baseline_time_ms and rows");
  }
  const auto track = parse_track(doc.at("track").get<std::string>());
  if (!track) throw FormatError("report track must be \"a\" or \"b\"");
  const double baseline = doc.at("baseline_time_ms").get<double>();
  ChallengeReport rep;
  rep.track = *track;
  rep.baseline_time_ms = baseline;
  rep.baseline_measured = doc.value("baseline_source", "given") == "measured-srcnn";
  for (const auto& o : doc.at("rows")) {
    ChallengeRow row;
    row.name = o.at("name").get<std::string>();
    if (o.contains("error")) {
      row.error = o.at("error").get<std::string>();
      rep.rows.push_back(std::move(row));
      continue;
    }
    row.psnr_db = o.at("psnr_db").get<double>();
    row.ms_ssim = o.at("ms_ssim").get<double>();
    row.time_ms = o.at("time_ms").get<double>();
    if (o.at("peak_memory_bytes").is_number()) {
      row.peak_memory_bytes = o.at("peak_memory_bytes").get<std::uint64_t>();
    }
    ChallengeRow expect = row;
    score_row(expect, rep.track, baseline);
    const std::pair<const char*, double> cols[] = {
        {"score_a", expect.score_a}, {"score_b", expect.score_b}, {"score_c", expect.score_c}};
    for (const auto& [key, want] : cols) {
      const double got = o.at(key).get<double>();
      if (std::abs(got - want) > tolerance) {
        throw ValidationError("report row '" + row.name + "': " + key + " = " +
                              std::to_string(got) + " but its fields give " +
                              std::to_string(want));
      }
    }
    row.score_a = expect.score_a;
    row.score_b = expect.score_b;
    row.score_c = expect.score_c;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

struct ModelEntry {
  std::string name;
  GraphSpec graph;
  WeightStore weights;
};

struct ChallengeData {
  std::string input_dir;
  std::string target_dir;
  bool pre_upscale = true;
  int bench_h = kHdHeight;
  int bench_w = kHdWidth;
  int warmup = 1;
  int runs = kMinTimedRuns;
};

// Median runtime of SRCNN with random weights at the benchmark resolution.
inline double measure_srcnn_baseline(const ChallengeData& data) {
  const GraphSpec srcnn = zoo::build_srcnn();
  const WeightStore w = zoo::init_weights(srcnn, zoo::WeightFill::random, kBenchSeed);
  return time_model(srcnn, w, data.bench_h, data.bench_w, data.warmup, data.runs).median_ms;
}

// baseline_time_ms == nullopt measures SRCNN on this host first.
inline ChallengeReport run_challenge(const std::vector<ModelEntry>& models,
                                     const ChallengeData& data, Track track,
                                     std::optional<double> baseline_time_ms) {
  ChallengeReport rep;
  rep.track = track;
  rep.baseline_measured = !baseline_time_ms.has_value();
  rep.baseline_time_ms = baseline_time_ms ? *baseline_time_ms : measure_srcnn_baseline(data);
  (void)weights_for(track, Subscore::a, rep.baseline_time_ms);

  for (const ModelEntry& m : models) {
    ChallengeRow row;
    row.name = m.name;
    try {
      const MetricReport metrics =
          evaluate_pairs(m.graph, m.weights, data.input_dir, data.target_dir,
                         EvalOptions{data.pre_upscale, 1});
      if (metrics.failed == metrics.images.size()) {
        throw ExecutionError(metrics.images.empty()
                                 ? std::string("no images to evaluate")
                                 : "every image failed, first: " + *metrics.images[0].error);
      }
      row.psnr_db = metrics.mean_psnr_db;
      row.ms_ssim = metrics.mean_ms_ssim;
      TimingReport timing;
      const MemoryReading mem = peak_memory_probe([&] {
        timing = time_model(m.graph, m.weights, data.bench_h, data.bench_w, data.warmup,
                            data.runs);
      });
      row.time_ms = timing.median_ms;
      row.peak_memory_bytes = mem.peak_bytes;
      score_row(row, track, rep.baseline_time_ms);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace pirm
