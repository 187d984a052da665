/* Copyright 2026 The lbnseg Authors. All Rights Reserved.

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

// Command-line front end: inference, analysis and self-checks.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.
// Failures print a single line "error: <kind>: <message>" to stderr.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lbnseg/lbnseg.hpp"

namespace {

using namespace lbnseg;
using namespace lbnseg::io;
using analysis::shape_text;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kVerification:
      return 3;
    default:
      return 2;
  }
}

struct ModelFlags {
  std::string fusion = "ffn";
  std::string daspp_pool = "avg";
  std::string daspp_merge = "concat";
  std::string context = "daspp";
  std::string rate_mode = "all";
  bool no_attention = false;

  void attach(CLI::App* app) {
    app->add_option("--fusion", fusion, "fusion head")
        ->check(CLI::IsMember({"ffn", "add"}));
    app->add_option("--daspp-pool", daspp_pool, "pooling in the context branches")
        ->check(CLI::IsMember({"avg", "max"}));
    app->add_option("--daspp-merge", daspp_merge, "context branch merge")
        ->check(CLI::IsMember({"concat", "sum"}));
    app->add_option("--context", context, "context module")
        ->check(CLI::IsMember({"daspp", "aspp"}));
    app->add_option("--rate-mode", rate_mode,
                    "atrous rate for later units of a block")
        ->check(CLI::IsMember({"all", "first"}));
    app->add_flag("--no-attention", no_attention, "drop channel attention");
  }

  NetworkConfig config() const {
    NetworkConfig cfg;
    cfg.fusion = fusion == "add" ? blocks::Fusion::kAdd : blocks::Fusion::kFfn;
    cfg.daspp.pool = daspp_pool == "max" ? kernels::PoolKind::kMax
                                         : kernels::PoolKind::kAvg;
    cfg.daspp.merge = daspp_merge == "sum" ? blocks::DasppMerge::kSum
                                           : blocks::DasppMerge::kConcatThenShortcut;
    cfg.context = context == "aspp" ? ContextModule::kAspp : ContextModule::kDaspp;
    cfg.rate_mode = rate_mode == "first" ? RateMode::kFirstUnitOnly
                                         : RateMode::kAllUnits;
    cfg.attention = !no_attention;
    return cfg;
  }
};

Shape parse_input_size(const std::string& text) {
  int h = 0;
  int w = 0;
  char x = 0;
  std::istringstream is(text);
  if (!(is >> h >> x >> w) || (x != 'x' && x != 'X') || !is.eof() || h <= 0 ||
      w <= 0) {
    throw Error(ErrorKind::kUsage, "bad --input-size '" + text + "', expected HxW");
  }
  const Shape s{1, kInputChannels, h, w};
  try {
    check_network_input(s);
  } catch (const ShapeError& e) {
    throw Error(ErrorKind::kUsage, e.what());
  }
  return s;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      while (used < item.size() && item[used] == ' ') ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kUsage, "bad " + flag + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kUsage, flag + " is empty");
  return out;
}

std::array<float, 3> parse_triple(const std::string& text, const std::string& flag) {
  std::array<float, 3> v{};
  std::istringstream is(text);
  std::string item;
  int i = 0;
  while (std::getline(is, item, ',')) {
    if (i == 3) throw Error(ErrorKind::kUsage, flag + " needs 3 values");
    try {
      v[i++] = std::stof(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kUsage, "bad " + flag + " entry '" + item + "'");
    }
  }
  if (i != 3) throw Error(ErrorKind::kUsage, flag + " needs 3 values");
  return v;
}

kernels::ConvPath parse_path(const std::string& s) {
  return s == "naive" ? kernels::ConvPath::kNaive : kernels::ConvPath::kOptimized;
}

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lbnseg: atrous two-branch segmentation inference engine"};
  app.require_subcommand(1);

  ModelFlags model;

  // infer
  auto* infer = app.add_subcommand("infer", "run a forward pass on a PPM image");
  std::string image_path;
  std::string weights_path;
  std::string out_path;
  std::string labels_path;
  std::string mean_text = "0.5,0.5,0.5";
  std::string std_text = "0.5,0.5,0.5";
  std::string infer_path = "optimized";
  bool fold = false;
  infer->add_option("--image", image_path, "input P6 image")->required();
  infer->add_option("--weights", weights_path, "weight file")->required();
  infer->add_option("--out", out_path, "colorized prediction (P6)");
  infer->add_option("--labels-out", labels_path, "raw class ids (P5)");
  infer->add_option("--mean", mean_text, "per-channel normalization mean");
  infer->add_option("--std", std_text, "per-channel normalization std");
  infer->add_option("--path", infer_path, "convolution path")
      ->check(CLI::IsMember({"naive", "optimized"}));
  infer->add_flag("--fold", fold, "fold batch norms into convolutions");
  model.attach(infer);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "receptive-field and cost table");
  std::string report_path;
  std::string analyze_size = "448x896";
  std::string format = "auto";
  analyze->add_option("--report", report_path, "output path ('-' for stdout)")
      ->required();
  analyze->add_option("--input-size", analyze_size, "HxW");
  analyze->add_option("--format", format, "text, json, or auto (by extension)")
      ->check(CLI::IsMember({"auto", "text", "json"}));
  model.attach(analyze);

  // count
  auto* count = app.add_subcommand("count", "parameter and FLOP totals");
  std::string count_size = "448x896";
  count->add_option("--input-size", count_size, "HxW");
  model.attach(count);

  // gridding
  auto* gridding = app.add_subcommand("gridding", "coverage density of a rate stack");
  std::string rates_text = "2,4,8,16";
  int grid_kernel = 3;
  gridding->add_option("--rates", rates_text, "comma-separated atrous rates");
  gridding->add_option("--kernel", grid_kernel, "kernel size of every layer")
      ->check(CLI::PositiveNumber);

  // profile
  auto* profile = app.add_subcommand("profile", "time forward passes");
  std::string profile_size = "448x896";
  int repeats = 5;
  std::string profile_path = "optimized";
  std::uint64_t profile_seed = 1;
  bool compare = false;
  profile->add_option("--input-size", profile_size, "HxW");
  profile->add_option("--repeats", repeats, "timed repeats (>= 5)")
      ->check(CLI::Range(5, 1000));
  profile->add_option("--path", profile_path, "convolution path")
      ->check(CLI::IsMember({"naive", "optimized"}));
  profile->add_option("--seed", profile_seed, "weight and input seed");
  profile->add_flag("--compare", compare,
                    "also run the other path once and report the output gap");
  model.attach(profile);

  // verify
  auto* verify = app.add_subcommand("verify", "run the self-check suite");
  std::uint64_t verify_seed = 2024;
  int verify_cases = 100;
  verify->add_option("--seed", verify_seed, "seed for randomized cases");
  verify->add_option("--cases", verify_cases, "randomized conv cases")
      ->check(CLI::PositiveNumber);

  // init-weights
  auto* init = app.add_subcommand("init-weights", "write seeded random weights");
  std::uint64_t init_seed = 0;
  std::string init_out;
  bool identity_bn = false;
  init->add_option("--seed", init_seed, "seed")->required();
  init->add_option("--out", init_out, "weight file")->required();
  init->add_flag("--identity-bn", identity_bn,
                 "keep batch norms at identity instead of random statistics");
  model.attach(init);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*infer) {
      Normalization norm;
      norm.mean = parse_triple(mean_text, "--mean");
      norm.std = parse_triple(std_text, "--std");
      for (float s : norm.std) {
        if (s == 0.0f) throw Error(ErrorKind::kUsage, "--std entries must be nonzero");
      }
      const Tensor x = read_image(image_path, norm);
      check_network_input(x.shape());
      Graph graph = build_network(model.config());
      WeightStore weights = load_weights(weights_path);
      validate_binding(graph, weights);
      if (fold) {
        FoldedModel folded = fold_batchnorms(graph, weights);
        graph = std::move(folded.graph);
        weights = std::move(folded.weights);
      }
      ExecOptions opts;
      opts.path = parse_path(infer_path);
      const Tensor logits = execute(graph, weights, x, opts).output();
      const LabelMap labels = predict_labels(logits);
      const auto colored = encode_ppm(colorize(labels));
      if (!out_path.empty()) write_file(out_path, colored);
      if (!labels_path.empty()) {
        std::vector<std::uint8_t> ids(labels.ids.begin(), labels.ids.end());
        write_file(labels_path, encode_pgm(labels.height, labels.width, ids));
      }
      std::vector<int> hist(logits.channels(), 0);
      for (int id : labels.ids) ++hist[id];
      std::cout << "logits " << analysis::shape_text(logits.shape()) << '\n';
      std::cout << "prediction fnv1a " << std::hex << fnv1a(colored) << std::dec
                << '\n';
      for (std::size_t c = 0; c < hist.size(); ++c) {
        if (hist[c] == 0) continue;
        std::cout << "class " << c;
        if (c < kCityscapesPalette.size()) {
          std::cout << ' ' << kCityscapesPalette[c].name;
        }
        std::cout << ' ' << hist[c] << '\n';
      }
    } else if (*analyze) {
      const Shape in = parse_input_size(analyze_size);
      analysis::AnalysisReport report =
          analysis::count_params_flops(build_network(model.config()), in);
      const auto ladder = analysis::rate_stack(std::vector<int>{2, 4, 8, 16});
      report.coverage.push_back(
          {"3x3 d=2,4,8,16", ladder, analysis::gridding_coverage(ladder)});
      bool json = format == "json";
      if (format == "auto") {
        json = report_path.size() > 5 &&
               report_path.compare(report_path.size() - 5, 5, ".json") == 0;
      }
      const std::string body =
          json ? analysis::to_json(report).dump(2) + "\n" : analysis::to_text(report);
      if (report_path == "-") {
        std::cout << body;
      } else {
        write_file(report_path, std::vector<std::uint8_t>(body.begin(), body.end()));
        std::cout << "wrote " << report.layers.size() << " layers to "
                  << report_path << '\n';
      }
    } else if (*count) {
      const Shape in = parse_input_size(count_size);
      const auto report =
          analysis::count_params_flops(build_network(model.config()), in);
      const auto& t = report.totals;
      std::cout << "input " << analysis::shape_text(in) << '\n';
      std::cout << "params " << t.params << " (" << t.params / 1e6 << "M)\n";
      std::cout << "macs " << t.macs << " (" << t.macs / 1e9 << "G)\n";
      std::cout << "flops " << t.flops << " (" << t.flops / 1e9 << "G)\n";
      std::cout << "aux_ops " << t.aux_ops << '\n';
    } else if (*gridding) {
      const std::vector<int> rates = parse_int_list(rates_text, "--rates");
      const auto stack = analysis::rate_stack(rates, grid_kernel);
      std::cout.precision(10);
      std::cout << "stack rf " << analysis::stack_receptive_field(stack)
                << " density " << analysis::gridding_coverage(stack) << '\n';
      for (int d : rates) {
        const std::vector<int> one{d};
        const auto single = analysis::rate_stack(one, grid_kernel);
        std::cout << "single d=" << d << " rf "
                  << analysis::stack_receptive_field(single) << " density "
                  << analysis::gridding_coverage(single) << '\n';
      }
    } else if (*profile) {
      const Shape in = parse_input_size(profile_size);
      const Graph graph = build_network(model.config());
      WeightStore weights = random_init(graph, profile_seed);
      randomize_batchnorm(graph, weights, profile_seed + 1);
      const Tensor x = seeded_fill(in, profile_seed + 2, Uniform{1.0f});
      const auto path = parse_path(profile_path);
      Tensor out;
      const analysis::TimingEntry t =
          analysis::profile_forward(graph, weights, x, repeats, path, &out);
      std::cout << "input " << to_string(in) << '\n'
                << "timing " << t.path << " mean_ms " << std::fixed
                << std::setprecision(3) << t.mean_ms << " stddev_ms "
                << t.stddev_ms << " repeats " << t.repeats << " threads "
                << t.threads << '\n';
      std::cout.unsetf(std::ios::fixed);
      std::cout << std::setprecision(6);
      if (compare) {
        ExecOptions opts;
        opts.path = path == kernels::ConvPath::kNaive ? kernels::ConvPath::kOptimized
                                                      : kernels::ConvPath::kNaive;
        const Tensor other = execute(graph, weights, x, opts).output();
        const double gap = max_relative_error(out, other);
        std::cout << "compare " << analysis::path_name(opts.path)
                  << " max rel error " << gap << '\n';
        if (gap > 1e-4) {
          throw Error(ErrorKind::kVerification,
                      "naive and optimized outputs differ by " + std::to_string(gap));
        }
      }
    } else if (*verify) {
      bool ok = true;
      for (const CheckResult& r : run_verification(verify_seed, verify_cases)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail
                  << '\n';
        ok = ok && r.passed;
      }
      if (!ok) throw Error(ErrorKind::kVerification, "self-check failed");
    } else if (*init) {
      const Graph graph = build_network(model.config());
      WeightStore weights = random_init(graph, init_seed);
      if (!identity_bn) randomize_batchnorm(graph, weights, init_seed + 1);
      save_weights(weights, init_out);
      std::cout << "wrote " << weights.size() << " tensors to " << init_out << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
