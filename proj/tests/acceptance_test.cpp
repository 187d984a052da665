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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lbnseg/lbnseg.hpp"
#include "oracles.hpp"

namespace {

using namespace lbnseg;
using kernels::ConvPath;
using kernels::ConvSpec;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. optimized conv equals the naive definition on 100 randomized cases
// covering every (rate, groups, stride) combination.
void conv_oracle_equivalence(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240601);
  double worst = 0.0;
  int cases = 0;
  for (int rate : {1, 2, 4, 8, 16}) {
    for (bool depthwise : {false, true}) {
      for (int stride : {1, 2}) {
        for (int rep = 0; rep < 5; ++rep) {
          const int cin = 2 + static_cast<int>(rng() % 15);
          const int cout = depthwise ? cin : 1 + static_cast<int>(rng() % 24);
          const int k = rep % 2 == 0 ? 3 : (rng() % 2 ? 1 : 5);
          const int extent = k + (k - 1) * (rate - 1);
          const int h = extent / 2 + 6 + static_cast<int>(rng() % 12);
          const int w = extent / 2 + 6 + static_cast<int>(rng() % 20);
          const ConvSpec spec{k, rate, stride, rate * (k - 1) / 2, depthwise ? cin : 1, cin,
                              cout};
          const Tensor x = seeded_fill({1 + rep % 2, cin, h, w}, 1000 + cases, Uniform{1.0f});
          const Tensor wt = seeded_fill(spec.weight_shape(), 2000 + cases, Uniform{1.0f});
          const Tensor b = seeded_fill({1, cout, 1, 1}, 3000 + cases, Uniform{1.0f});
          worst = std::max(worst,
                           oracle::rel_err(kernels::conv2d_optimized(x, wt, b.data(), spec),
                                           kernels::conv2d_naive(x, wt, b.data(), spec)));
          ++cases;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  o.detail << cases << " cases, max rel error " << worst << ", " << secs << " s ";
  o.require(cases == 100, "100 cases");
  o.require(worst <= 1e-5, "max rel error <= 1e-5");
  o.require(secs <= 120.0, "runtime <= 2 min");
}

// 2. rate 1 equals the standard convolution oracle exactly.
void rate_one_degeneracy(Outcome& o) {
  std::mt19937 rng(77);
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const int cin = 1 + static_cast<int>(rng() % 8);
    const bool depthwise = i % 4 == 3;
    const int cout = depthwise ? cin : 1 + static_cast<int>(rng() % 8);
    const int k = 1 + 2 * static_cast<int>(rng() % 3);
    const int stride = 1 + static_cast<int>(rng() % 2);
    const int pad = static_cast<int>(rng() % (k / 2 + 1));
    const ConvSpec spec{k, 1, stride, pad, depthwise ? cin : 1, cin, cout};
    const Tensor x = oracle::dyadic(
        seeded_fill({1, cin, 6 + static_cast<int>(rng() % 10), 6 + static_cast<int>(rng() % 10)},
                    4000 + i, Uniform{1.0f}));
    const Tensor w = oracle::dyadic(seeded_fill(spec.weight_shape(), 5000 + i, Uniform{1.0f}));
    const Tensor ref = oracle::conv_scatter(x, w, {}, stride, pad, spec.groups);
    const bool ok = kernels::conv2d_naive(x, w, {}, spec) == ref &&
                    kernels::conv2d_optimized(x, w, {}, spec) == ref;
    exact += ok ? 1 : 0;
  }
  o.detail << exact << "/20 cases bit-exact (naive and optimized)";
  o.require(exact == 20, "all 20 exact");
}

const std::vector<std::pair<std::string, Shape>> kLedger{
    {"block0_out", {1, 32, 224, 448}},     {"block1_out", {1, 16, 224, 448}},
    {"block2_out", {1, 24, 112, 224}},     {"block3_out", {1, 32, 56, 112}},
    {"block4_out", {1, 64, 56, 112}},      {"block5_out", {1, 96, 56, 112}},
    {"block6_out", {1, 160, 56, 112}},     {"block7_out", {1, 320, 56, 112}},
    {"spn_layer0_out", {1, 64, 112, 224}}, {"spn_layer1_out", {1, 64, 112, 224}},
};

// 3. backbone and spatial-branch shapes at 448x896.
void shape_ledger(Outcome& o) {
  const Graph g = build_network();
  const auto shapes = g.infer_shapes(Shape{1, 3, 448, 896});
  int ok = 0;
  for (const auto& [tap, shape] : kLedger) {
    const Shape got = shapes[g.require_tap(tap)];
    if (got == shape) {
      ++ok;
    } else {
      o.detail << tap << "=" << to_string(got) << " ";
    }
  }
  o.detail << ok << "/" << kLedger.size() << " rows match";
  o.require(ok == static_cast<int>(kLedger.size()), "every row");
}

// 4. channel widths of the skip, context, spatial and fusion stages.
void channel_arithmetic(Outcome& o) {
  const Graph g = build_network();
  const auto shapes = g.infer_shapes(Shape{1, 3, 448, 896});
  const int skip = shapes[g.require_tap("dense_skip")].c;
  const int din = shapes[g.require_tap("daspp_in")].c;
  const int dout = shapes[g.require_tap("daspp_out")].c;
  const int spn = shapes[g.require_tap("spn_out")].c;
  const int cat = shapes[*g.find("ffn.concat")].c;
  const int cls = shapes[*g.find("ffn.classifier")].c;
  const int logits = shapes[g.require_tap("logits")].c;
  o.detail << "skip " << skip << ", context " << din << "->" << dout << ", spatial " << spn
           << ", fusion " << cat << "->" << cls << ", logits " << logits;
  o.require(skip == 640, "dense skip 640");
  o.require(din == 128 && dout == 128, "context 128");
  o.require(spn == 88, "spatial 88");
  o.require(cat == 216 && cls == 19 && logits == 19, "fusion 216 -> 19");
}

// 5. parameter and FLOP totals against the published model size.
void counting(Outcome& o) {
  const auto t0 = Clock::now();
  const auto r = analysis::count_params_flops(build_network(), {1, 3, 448, 896});
  const double secs = seconds_since(t0);
  const double params_m = r.totals.params / 1e6;
  const double macs_g = r.totals.macs / 1e9;
  const double flops_g = r.totals.flops / 1e9;
  o.detail << "params " << params_m << "M (want 5.6..6.8), MACs " << macs_g << "G, 2xMACs "
           << flops_g << "G (want either in 39.6..59.4), " << secs << " s ";
  o.require(params_m >= 5.6 && params_m <= 6.8, "params range");
  const auto in_range = [](double v) { return v >= 39.6 && v <= 59.4; };
  o.require(in_range(macs_g) || in_range(flops_g), "FLOPs range");
  o.require(secs <= 10.0, "runtime <= 10 s");
}

std::set<std::pair<int, int>> probe_offsets(const std::vector<analysis::KernelRate>& stack) {
  const Graph g = rate_stack_graph(stack);
  const int side = static_cast<int>(analysis::stack_receptive_field(stack)) + 4;
  const int c = side / 2;
  const auto fp = analysis::footprint_probe(g, g.output(), {1, 1, side, side}, c, c);
  std::set<std::pair<int, int>> out;
  for (auto [r, col] : fp.pixels) out.emplace(r - c, col - c);
  return out;
}

// 6. stacked rates cover their window more densely than one rate-16 layer.
void gridding(Outcome& o) {
  const std::vector<int> ladder{2, 4, 8, 16};
  const std::vector<int> single{16};
  const auto ls = analysis::rate_stack(ladder);
  const auto ss = analysis::rate_stack(single);
  const double dl = analysis::gridding_coverage(ls);
  const double ds = analysis::gridding_coverage(ss);
  o.detail << "ladder " << dl << " > single " << ds << "; ";
  o.require(dl > ds, "ladder denser");
  o.require(std::abs(ds - 9.0 / 1089.0) < 1e-12, "single density 9/33^2");
  int agree = 0;
  int probed = 0;
  std::vector<std::vector<analysis::KernelRate>> prefixes;
  for (std::size_t n = 1; n <= ls.size(); ++n) prefixes.emplace_back(ls.begin(), ls.begin() + n);
  prefixes.push_back(ss);
  for (const auto& p : prefixes) {
    std::vector<std::pair<int, int>> kd;
    for (const auto& kr : p) kd.emplace_back(kr.kernel, kr.rate);
    const auto analytic = analysis::offset_set(p);
    agree += (probe_offsets(p) == analytic && oracle::offsets_bruteforce(kd) == analytic) ? 1 : 0;
    ++probed;
  }
  o.detail << "probe == offsets on " << agree << "/" << probed << " prefixes";
  o.require(agree == probed, "probe agreement");
}

// 7. analytic receptive field equals the probed footprint on network prefixes.
void receptive_field(Outcome& o) {
  const Graph g = build_network();
  const std::vector<std::string> prefixes{
      "lbn.block0.conv",           "lbn.block0.act",
      "lbn.block1.unit0.depthwise.conv", "lbn.block1.unit0.project.bn",
      "lbn.block2.unit0.expand.act",     "lbn.block2.unit0.depthwise.conv",
      "lbn.block2.unit1.residual",       "lbn.block3.unit0.depthwise.act",
      "spn.layer0.conv",           "spn.layer0.pool",
      "spn.layer1.unit0.conv1.act", "spn.layer1.unit0.relu"};
  const auto rf_big = analysis::receptive_fields(g, Shape{1, 3, 256, 256});
  int match = 0;
  for (const std::string& name : prefixes) {
    const NodeId id = *g.find(name);
    const long rf = rf_big[id].size;
    const int side = static_cast<int>((rf + 15) / 8 * 8);
    const Shape in{1, 3, side, side};
    const Shape out = g.infer_shapes(in)[id];
    const auto fp = analysis::footprint_probe(g, id, in, out.h / 2, out.w / 2);
    if (fp.height() == rf && fp.width() == rf) {
      ++match;
    } else {
      o.detail << name << " rf " << rf << " probe " << fp.height() << "x" << fp.width() << " ";
    }
  }
  const long spn0 = rf_big[g.require_tap("spn_layer0_out")].size;
  o.detail << match << "/" << prefixes.size() << " prefixes match, spatial layer0 rf " << spn0;
  o.require(match == static_cast<int>(prefixes.size()) && match >= 10, "all prefixes");
  o.require(spn0 == 11, "spatial layer0 rf 11");
}

// 8. zero-weight identities of the context, bottleneck and attention blocks.
void block_identities(Outcome& o) {
  const Tensor x = seeded_fill({1, 128, 14, 18}, 8, Uniform{2.0f});
  double worst_daspp = 0.0;
  for (auto merge : {blocks::DasppMerge::kConcatThenShortcut, blocks::DasppMerge::kSum}) {
    blocks::DasppConfig cfg;
    cfg.merge = merge;
    const Graph g = blocks::daspp_graph(cfg);
    worst_daspp = std::max(worst_daspp,
                           oracle::rel_err(execute(g, constant_init(g, 0.0f), x).output(), x));
  }
  const Tensor xb = seeded_fill({1, 64, 14, 18}, 9, Uniform{2.0f});
  const Graph bg = blocks::bottleneck_graph(64, {6, 64, 1, 2});
  const double bott = oracle::rel_err(execute(bg, constant_init(bg, 0.0f), xb).output(), xb);
  const Graph cg = blocks::cam_graph(64);
  Tensor half(xb.shape());
  for (std::size_t i = 0; i < half.size(); ++i) half.data()[i] = 0.5f * xb.data()[i];
  const double cam = oracle::rel_err(execute(cg, constant_init(cg, 0.0f), xb).output(), half);
  o.detail << "daspp " << worst_daspp << ", bottleneck " << bott << ", attention " << cam;
  o.require(worst_daspp <= 1e-6, "daspp identity");
  o.require(bott <= 1e-6, "bottleneck identity");
  o.require(cam <= 1e-6, "attention halves");
}

// 9. seeded end-to-end run: finite, repeatable, valid labels, and timing.
void end_to_end(Outcome& o) {
  const Graph g = build_network();
  WeightStore w = random_init(g, 9001);
  randomize_batchnorm(g, w, 9002);
  const Tensor x = seeded_fill({1, 3, 224, 448}, 9003, Uniform{1.0f});
  ExecOptions fast;
  fast.path = ConvPath::kOptimized;
  ExecOptions slow;
  slow.path = ConvPath::kNaive;

  auto t0 = Clock::now();
  const Tensor a = forward(g, w, x, fast);
  const double t_fast1 = seconds_since(t0);
  t0 = Clock::now();
  const Tensor b = forward(g, w, x, fast);
  const double t_fast2 = seconds_since(t0);
  t0 = Clock::now();
  const Tensor n = forward(g, w, x, slow);
  const double t_naive = seconds_since(t0);

  bool finite = true;
  for (float v : a.data()) finite = finite && std::isfinite(v);
  const LabelMap labels = predict_labels(a);
  bool in_range = true;
  for (int id : labels.ids) in_range = in_range && id >= 0 && id <= 18;
  const double t_fast = std::min(t_fast1, t_fast2);
  const double speedup = t_naive / t_fast;
  const double gap = oracle::rel_err(a, n);
  o.detail << "logits " << to_string(a.shape()) << ", naive " << t_naive << " s, optimized "
           << t_fast << " s, speedup " << speedup << "x, path gap " << gap;
  o.require(finite, "finite logits");
  o.require(a == b, "bit-identical reruns");
  o.require(in_range, "labels in 0..18");
  o.require(t_naive <= 300.0, "naive <= 5 min");
  o.require(speedup >= 5.0, "optimized >= 5x");
  o.require(gap <= 1e-4, "paths agree");
}

// 10. folded batch norms reproduce the unfolded network.
void folding(Outcome& o) {
  const Graph g = build_network();
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    WeightStore w = random_init(g, 700 + i);
    randomize_batchnorm(g, w, 800 + i);
    const Tensor x = seeded_fill({1, 3, 64, 64}, 900 + i, Uniform{1.0f});
    const FoldedModel f = fold_batchnorms(g, w);
    worst = std::max(worst, oracle::rel_err(forward(f.graph, f.weights, x), forward(g, w, x)));
  }
  o.detail << "10 cases, max rel error " << worst;
  o.require(worst <= 1e-4, "rel error <= 1e-4");
}

// 11. every pool x merge x fusion configuration builds, runs, and differs.
void ablations(Outcome& o) {
  const Tensor x = seeded_fill({1, 3, 64, 64}, 11, Uniform{1.0f});
  std::vector<Tensor> outs;
  std::vector<std::string> names;
  for (auto pool : {kernels::PoolKind::kAvg, kernels::PoolKind::kMax}) {
    for (auto merge : {blocks::DasppMerge::kConcatThenShortcut, blocks::DasppMerge::kSum}) {
      for (auto fusion : {blocks::Fusion::kFfn, blocks::Fusion::kAdd}) {
        NetworkConfig cfg;
        cfg.daspp.pool = pool;
        cfg.daspp.merge = merge;
        cfg.fusion = fusion;
        const Graph g = build_network(cfg);
        WeightStore w = random_init(g, 12);
        randomize_batchnorm(g, w, 13);
        outs.push_back(forward(g, w, x));
        names.push_back(std::string(pool == kernels::PoolKind::kAvg ? "avg" : "max") + "/" +
                        (merge == blocks::DasppMerge::kSum ? "sum" : "concat") + "/" +
                        (fusion == blocks::Fusion::kFfn ? "ffn" : "add"));
      }
    }
  }
  int distinct = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    for (std::size_t j = i + 1; j < outs.size(); ++j) {
      ++pairs;
      if (outs[i] != outs[j]) {
        ++distinct;
      } else {
        o.detail << names[i] << "==" << names[j] << " ";
      }
    }
  }
  o.detail << outs.size() << " configs ran at 64x64, " << distinct << "/" << pairs
           << " pairs differ";
  o.require(outs.size() == 8, "8 configs");
  o.require(distinct == pairs, "pairwise different");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"conv oracle equivalence", conv_oracle_equivalence},
      {"rate-one degeneracy", rate_one_degeneracy},
      {"shape ledger", shape_ledger},
      {"channel arithmetic", channel_arithmetic},
      {"parameter and FLOP totals", counting},
      {"gridding coverage", gridding},
      {"receptive field vs probe", receptive_field},
      {"block identities", block_identities},
      {"end-to-end determinism and speed", end_to_end},
      {"batch-norm folding", folding},
      {"ablation configurations", ablations},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
