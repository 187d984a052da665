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

#ifndef LBNSEG_ANALYSIS_REPORT_HPP_
#define LBNSEG_ANALYSIS_REPORT_HPP_

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lbnseg/analysis/gridding.hpp"
#include "lbnseg/analysis/receptive_field.hpp"
#include "lbnseg/graph.hpp"

namespace lbnseg::analysis {

struct LayerRecord {
  std::string name;
  std::string op;
  Shape shape;
  long rf = 1;
  bool rf_global = false;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t aux_ops = 0;  // pooling, activation, resize, elementwise
};

struct Totals {
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t flops = 0;  // 2 * macs
  std::uint64_t aux_ops = 0;

  friend bool operator==(const Totals&, const Totals&) = default;
};

struct CoverageEntry {
  std::string label;
  std::vector<KernelRate> stack;
  double density = 0.0;
};

struct TimingEntry {
  std::string path;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  int repeats = 0;
  int threads = 1;
};

struct AnalysisReport {
  Shape input;
  std::vector<LayerRecord> layers;
  Totals totals;
  std::vector<CoverageEntry> coverage;
  std::vector<TimingEntry> timings;
};

inline Totals sum_layers(const std::vector<LayerRecord>& layers) {
  Totals t;
  for (const LayerRecord& l : layers) {
    t.params += l.params;
    t.macs += l.macs;
    t.aux_ops += l.aux_ops;
  }
  t.flops = 2 * t.macs;
  return t;
}

// Params: weights + biases + 2 per BN channel (running stats excluded).
// MACs per conv: output elements * k^2 * in_channels / groups.
// Aux ops: 1 per output element for pooling, activation, batch norm, add and
// channel scaling; 7 per output element for bilinear resize.
inline AnalysisReport count_params_flops(const Graph& graph, const Shape& input) {
  const auto shapes = graph.infer_shapes(input);
  const auto rf = receptive_fields(graph, input);
  AnalysisReport report;
  report.input = input;
  for (NodeId id = 0; id < static_cast<NodeId>(graph.size()); ++id) {
    const Node& n = graph.node(id);
    LayerRecord rec;
    rec.name = n.name;
    rec.op = std::string(op_name(n.op));
    rec.shape = shapes[id];
    rec.rf = rf[id].size;
    rec.rf_global = rf[id].global;
    const auto out_elems = static_cast<std::uint64_t>(shapes[id].count());
    if (const auto* c = std::get_if<ops::Conv>(&n.op)) {
      const auto& s = c->spec;
      const std::uint64_t per_out = static_cast<std::uint64_t>(s.kernel) *
                                    s.kernel * (s.in_channels / s.groups);
      rec.params = per_out * s.out_channels + (c->bias ? s.out_channels : 0);
      rec.macs = out_elems * per_out;
    } else if (const auto* bn = std::get_if<ops::BatchNorm>(&n.op)) {
      rec.params = 2u * static_cast<std::uint64_t>(bn->channels);
      rec.aux_ops = out_elems;
    } else if (const auto* fc = std::get_if<ops::Linear>(&n.op)) {
      const std::uint64_t w =
          static_cast<std::uint64_t>(fc->in_features) * fc->out_features;
      rec.params = w + (fc->bias ? fc->out_features : 0);
      rec.macs = static_cast<std::uint64_t>(shapes[id].n) * w;
    } else if (std::holds_alternative<ops::ResizeLike>(n.op)) {
      const Shape src = shapes[n.inputs[0]];
      if (src.h != shapes[id].h || src.w != shapes[id].w) rec.aux_ops = 7 * out_elems;
    } else if (std::holds_alternative<ops::Pool>(n.op) ||
               std::holds_alternative<ops::GlobalAvgPool>(n.op) ||
               std::holds_alternative<ops::Act>(n.op) ||
               std::holds_alternative<ops::Add>(n.op) ||
               std::holds_alternative<ops::ScaleChannels>(n.op)) {
      rec.aux_ops = out_elems;
    }
    report.layers.push_back(std::move(rec));
  }
  report.totals = sum_layers(report.layers);
  return report;
}

inline std::string shape_text(const Shape& s) {
  std::ostringstream os;
  os << s.n << 'x' << s.c << 'x' << s.h << 'x' << s.w;
  return os.str();
}

// Fixed-width table: one layer per line, then totals, coverage and timings.
inline std::string to_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "# input " << shape_text(r.input) << '\n';
  os << std::left << std::setw(44) << "layer" << std::setw(9) << "op"
     << std::setw(18) << "shape" << std::right << std::setw(8) << "rf"
     << std::setw(12) << "params" << std::setw(16) << "macs" << '\n';
  for (const LayerRecord& l : r.layers) {
    std::string rf = std::to_string(l.rf);
    if (l.rf_global) rf += "*";
    os << std::left << std::setw(44) << l.name << std::setw(9) << l.op
       << std::setw(18) << shape_text(l.shape) << std::right << std::setw(8)
       << rf << std::setw(12) << l.params << std::setw(16) << l.macs << '\n';
  }
  os << "total params " << r.totals.params << '\n';
  os << "total macs " << r.totals.macs << '\n';
  os << "total flops " << r.totals.flops << '\n';
  os << "total aux_ops " << r.totals.aux_ops << '\n';
  for (const CoverageEntry& c : r.coverage) {
    os << "coverage " << c.label << ' ' << std::setprecision(6) << c.density
       << '\n';
  }
  for (const TimingEntry& t : r.timings) {
    os << "timing " << t.path << " mean_ms " << std::fixed
       << std::setprecision(3) << t.mean_ms << " stddev_ms " << t.stddev_ms
       << " repeats " << t.repeats << " threads " << t.threads << '\n'
       << std::defaultfloat;
  }
  return os.str();
}

// Schema: {"input": [n,c,h,w], "layers": [{"name", "op", "shape": [n,c,h,w],
// "rf", "rf_global", "params", "macs", "aux_ops"}], "totals": {"params",
// "macs", "flops", "aux_ops"}, "coverage": [{"label", "stack": [[k,d]...],
// "density"}], "timings": [{"path", "mean_ms", "stddev_ms", "repeats",
// "threads"}]}
inline nlohmann::json to_json(const AnalysisReport& r) {
  using nlohmann::json;
  auto shape = [](const Shape& s) { return json::array({s.n, s.c, s.h, s.w}); };
  json j;
  j["input"] = shape(r.input);
  j["layers"] = json::array();
  for (const LayerRecord& l : r.layers) {
    j["layers"].push_back({{"name", l.name},
                           {"op", l.op},
                           {"shape", shape(l.shape)},
                           {"rf", l.rf},
                           {"rf_global", l.rf_global},
                           {"params", l.params},
                           {"macs", l.macs},
                           {"aux_ops", l.aux_ops}});
  }
  j["totals"] = {{"params", r.totals.params},
                 {"macs", r.totals.macs},
                 {"flops", r.totals.flops},
                 {"aux_ops", r.totals.aux_ops}};
  j["coverage"] = json::array();
  for (const CoverageEntry& c : r.coverage) {
    json stack = json::array();
    for (const KernelRate& kr : c.stack) stack.push_back({kr.kernel, kr.rate});
    j["coverage"].push_back(
        {{"label", c.label}, {"stack", stack}, {"density", c.density}});
  }
  j["timings"] = json::array();
  for (const TimingEntry& t : r.timings) {
    j["timings"].push_back({{"path", t.path},
                            {"mean_ms", t.mean_ms},
                            {"stddev_ms", t.stddev_ms},
                            {"repeats", t.repeats},
                            {"threads", t.threads}});
  }
  return j;
}

}  // namespace lbnseg::analysis

#endif  // LBNSEG_ANALYSIS_REPORT_HPP_
