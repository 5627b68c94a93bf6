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

// pirm: command-line front end for the benchmark harness.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 execution error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pirm/error.hpp"
#include "pirm/graph.hpp"
#include "pirm/harness.hpp"
#include "pirm/scoring.hpp"
#include "pirm/weights.hpp"
#include "pirm/zoo.hpp"

namespace {

using nlohmann::ordered_json;

void print_json(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

pirm::Track to_track(const std::string& s) {
  const auto t = pirm::parse_track(s);
  if (!t) throw pirm::ValidationError("--track must be a or b, got '" + s + "'");
  return *t;
}

pirm::Subscore to_subscore(const std::string& s) {
  const auto sub = pirm::parse_subscore(s);
  if (!sub) throw pirm::ValidationError("--subscore must be a, b or c, got '" + s + "'");
  return *sub;
}

// NAME:GRAPH:WEIGHTS
pirm::ModelEntry parse_model_arg(const std::string& arg) {
  const auto a = arg.find(':');
  const auto b = a == std::string::npos ? a : arg.find(':', a + 1);
  if (b == std::string::npos || a == 0) {
    throw pirm::ValidationError("--model expects NAME:GRAPH:WEIGHTS, got '" + arg + "'");
  }
  return {arg.substr(0, a), pirm::load_graph_file(arg.substr(a + 1, b - a - 1)),
          pirm::load_weights_file(arg.substr(b + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PIRM smartphone super-resolution benchmark harness"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Write a bicubic low-resolution copy of a dataset");
  std::string hr_dir, out_dir;
  int scale = 4;
  prepare->add_option("--hr-dir", hr_dir, "Directory of high-resolution images")->required();
  prepare->add_option("--out-dir", out_dir, "Output directory")->required();
  prepare->add_option("--scale", scale, "Downscaling factor")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a model over an image directory");
  std::string graph_path, weights_path, input_dir, target_dir;
  bool pre_upscale = false, csv = false;
  int threads = 1;
  eval->add_option("--graph", graph_path, "Graph JSON file")->required();
  eval->add_option("--weights", weights_path, "Weight file")->required();
  eval->add_option("--input-dir", input_dir, "Model inputs")->required();
  eval->add_option("--target-dir", target_dir, "Reference images, matched by file stem")
      ->required();
  eval->add_flag("--pre-upscale", pre_upscale, "Bicubic-resize inputs to target size first");
  eval->add_flag("--csv", csv, "Emit CSV instead of JSON");
  eval->add_option("--threads", threads, "Worker threads for convolution")
      ->check(CLI::PositiveNumber);

  // bench
  auto* bench = app.add_subcommand("bench", "Time a model on a fixed-seed input");
  int width = pirm::kHdWidth, height = pirm::kHdHeight, warmup = 3, runs = 10;
  bool half_res = false;
  std::uint32_t seed = pirm::kBenchSeed;
  bench->add_option("--graph", graph_path, "Graph JSON file")->required();
  bench->add_option("--weights", weights_path, "Weight file")->required();
  bench->add_option("--width", width, "Input width")->capture_default_str();
  bench->add_option("--height", height, "Input height")->capture_default_str();
  bench->add_option("--warmup", warmup, "Untimed warmup runs")->capture_default_str();
  bench->add_option("--runs", runs, "Timed runs (>= 3)")->capture_default_str();
  bench->add_flag("--half-res", half_res, "Halve width and height");
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Input RNG seed")->capture_default_str();

  // score
  auto* score = app.add_subcommand("score", "Compute one challenge score");
  std::string track_s = "a", subscore_s = "a";
  double psnr = 0, perceptual = 0, time_ms = 0, baseline_ms = 0;
  score->add_option("--track", track_s, "a or b")->required();
  score->add_option("--subscore", subscore_s, "a, b or c")->required();
  score->add_option("--psnr", psnr, "PSNR in dB")->required();
  score->add_option("--perceptual", perceptual, "MS-SSIM")->required();
  score->add_option("--time-ms", time_ms, "Solution runtime")->required();
  score->add_option("--baseline-time-ms", baseline_ms, "Baseline runtime")->required();

  // report
  auto* report = app.add_subcommand("report", "Score a table of model results");
  std::string rows_path;
  bool as_json = false;
  report->add_option("--rows", rows_path, "Rows JSON file")->required();
  report->add_option("--track", track_s, "a or b")->required();
  report->add_option("--baseline-time-ms", baseline_ms, "Baseline runtime")->required();
  auto* report_csv = report->add_flag("--csv", csv, "Emit CSV");
  report->add_flag("--json", as_json, "Emit JSON")->excludes(report_csv);

  // check-report
  auto* check = app.add_subcommand("check-report", "Re-verify the scores in a JSON report");
  std::string report_path;
  check->add_option("--report", report_path, "Report JSON file")->required();

  // export-graph
  auto* export_graph = app.add_subcommand("export-graph", "Write a model zoo graph");
  std::string model, out_path;
  pirm::zoo::ZooConfig zoo_cfg;
  export_graph->add_option("--model", model, "srcnn, feqe, supersr or dped")->required();
  export_graph->add_option("--out", out_path, "Output graph file")->required();
  export_graph->add_option("--blocks", zoo_cfg.residual_blocks, "Residual blocks (feqe, supersr)")
      ->capture_default_str();
  export_graph->add_option("--channels", zoo_cfg.base_channels, "Base width (feqe, supersr)")
      ->capture_default_str();

  // init-weights
  auto* init = app.add_subcommand("init-weights", "Write weights for every node of a graph");
  std::string fill = "random";
  init->add_option("--graph", graph_path, "Graph JSON file")->required();
  init->add_option("--out", out_path, "Output weight file")->required();
  init->add_option("--seed", seed, "RNG seed")->capture_default_str();
  init->add_option("--fill", fill, "random or zero")
      ->check(CLI::IsMember({"random", "zero"}))
      ->capture_default_str();

  // challenge
  auto* challenge = app.add_subcommand("challenge", "Evaluate, time and score several models");
  std::vector<std::string> model_args;
  bool measure = false;
  std::optional<double> baseline_opt;
  challenge->add_option("--model", model_args, "NAME:GRAPH:WEIGHTS, repeatable")->required();
  challenge->add_option("--input-dir", input_dir, "Model inputs")->required();
  challenge->add_option("--target-dir", target_dir, "Reference images")->required();
  challenge->add_option("--track", track_s, "a or b")->capture_default_str();
  auto* base_opt = challenge->add_option("--baseline-time-ms", baseline_opt, "Baseline runtime");
  challenge->add_flag("--measure-srcnn", measure, "Time SRCNN on this host as the baseline")
      ->excludes(base_opt);
  challenge->add_flag("--no-pre-upscale", "Feed inputs to the models unresized");
  challenge->add_flag("--half-res", half_res, "Benchmark at 640x360");
  challenge->add_option("--warmup", warmup, "Untimed warmup runs");
  challenge->add_option("--runs", runs, "Timed runs (>= 3)");
  auto* ch_csv = challenge->add_flag("--csv", csv, "Emit CSV");
  challenge->add_flag("--json", as_json, "Emit JSON")->excludes(ch_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*prepare) {
      const auto names = pirm::prepare_dataset(hr_dir, out_dir, scale);
      ordered_json j;
      j["out_dir"] = out_dir;
      j["scale"] = scale;
      j["written"] = names;
      print_json(j);
    } else if (*eval) {
      const auto g = pirm::load_graph_file(graph_path);
      const auto w = pirm::load_weights_file(weights_path);
      const auto rep =
          pirm::evaluate_pairs(g, w, input_dir, target_dir, {pre_upscale, threads});
      if (csv) {
        std::cout << rep.to_csv();
      } else {
        print_json(rep.to_json());
      }
    } else if (*bench) {
      const auto g = pirm::load_graph_file(graph_path);
      const auto w = pirm::load_weights_file(weights_path);
      if (half_res) {
        width /= 2;
        height /= 2;
      }
      if (width < 1 || height < 1) throw pirm::ValidationError("width and height must be >= 1");
      print_json(pirm::time_model(g, w, height, width, warmup, runs, seed, threads).to_json());
    } else if (*score) {
      const auto weights = pirm::weights_for(to_track(track_s), to_subscore(subscore_s),
                                             baseline_ms);
      const auto r = pirm::total_score(psnr, perceptual, time_ms, weights);
      ordered_json j;
      j["total"] = r.total;
      j["psnr_term"] = r.psnr_term;
      j["perceptual_term"] = r.perceptual_term;
      j["time_term"] = r.time_term;
      print_json(j);
    } else if (*report) {
      const auto bytes = pirm::read_file_bytes(rows_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
      } catch (const nlohmann::json::parse_error& e) {
        throw pirm::FormatError(rows_path + ": " + e.what());
      }
      const auto rep = pirm::report_from_rows(doc, to_track(track_s), baseline_ms);
      if (csv) {
        std::cout << rep.to_csv();
      } else if (as_json) {
        print_json(rep.to_json());
      } else {
        std::cout << rep.to_table();
      }
    } else if (*check) {
      const auto bytes = pirm::read_file_bytes(report_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
      } catch (const nlohmann::json::parse_error& e) {
        throw pirm::FormatError(report_path + ": " + e.what());
      }
      try {
        const auto rep = pirm::read_report(doc);
        std::cout << "ok: " << rep.rows.size() << " rows consistent\n";
      } catch (const nlohmann::json::exception& e) {
        throw pirm::FormatError(report_path + ": " + e.what());
      }
    } else if (*export_graph) {
      pirm::save_graph_file(pirm::zoo::build(model, zoo_cfg), out_path);
    } else if (*init) {
      const auto g = pirm::load_graph_file(graph_path);
      const auto f = fill == "zero" ? pirm::zoo::WeightFill::zero : pirm::zoo::WeightFill::random;
      pirm::save_weights_file(pirm::zoo::init_weights(g, f, seed), out_path);
    } else if (*challenge) {
      std::vector<pirm::ModelEntry> models;
      for (const auto& arg : model_args) models.push_back(parse_model_arg(arg));
      pirm::ChallengeData data;
      data.input_dir = input_dir;
      data.target_dir = target_dir;
      data.pre_upscale = challenge->count("--no-pre-upscale") == 0;
      if (half_res) {
        data.bench_w /= 2;
        data.bench_h /= 2;
      }
      if (challenge->count("--warmup")) data.warmup = warmup;
      if (challenge->count("--runs")) data.runs = runs;
      if (!measure && !baseline_opt) {
        throw pirm::ValidationError("give --baseline-time-ms or --measure-srcnn");
      }
      const auto rep = pirm::run_challenge(models, data, to_track(track_s), baseline_opt);
      if (csv) {
        std::cout << rep.to_csv();
      } else if (as_json) {
        print_json(rep.to_json());
      } else {
        std::cout << rep.to_table();
      }
    }
  } catch (const pirm::Error& e) {
    std::cerr << "pirm: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "pirm: execution error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pirm: execution error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
