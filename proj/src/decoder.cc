// Copyright 2026 The mfnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mfnas/decoder.h"

#include <sstream>

#include "mfnas/errors.h"

namespace mfnas {
namespace {

// Node width and resolution level of the tensor produced by a stage.
struct Stage {
  int channels;  // actual output channels
  int width;     // node width that produced it
  int level;     // number of reductions applied so far
};

int stride_between(int from_level, int to_level) { return 1 << (to_level - from_level); }

}  // namespace

std::vector<std::pair<int, int>> ArchGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < num_nodes; ++k) {
    for (int src : inputs[static_cast<std::size_t>(k)]) out.emplace_back(src, node_vertex(k));
  }
  for (int k : concat) out.emplace_back(node_vertex(k), concat_vertex());
  return out;
}

int ArchGraph::out_degree(int node) const {
  int deg = 0;
  for (int k = node + 1; k < num_nodes; ++k) {
    for (int src : inputs[static_cast<std::size_t>(k)]) deg += src == node_vertex(node);
  }
  return deg;
}

ArchGraph decode_cell(const CellGenome& cell) {
  if (const auto violations = validate(cell); !violations.empty()) {
    throw DecodeError("cannot decode " + std::string(cell_kind_name(cell.kind)) +
                      " cell: " + violations.front().message);
  }
  ArchGraph g;
  g.kind = cell.kind;
  g.num_nodes = cell.num_nodes();
  g.ops.reserve(cell.nodes.size());
  g.inputs.resize(cell.nodes.size());
  std::vector<bool> used(cell.nodes.size(), false);
  for (int k = 0; k < g.num_nodes; ++k) {
    const NodeGene& node = cell.nodes[static_cast<std::size_t>(k)];
    g.ops.push_back(node.op);
    // links[0], links[1] address the inputs; links[2+i] addresses node i,
    // which is vertex 2+i, so the link index is the vertex id.
    for (int v = 0; v < static_cast<int>(node.links.size()); ++v) {
      if (node.links[static_cast<std::size_t>(v)] == 0) continue;
      g.inputs[static_cast<std::size_t>(k)].push_back(v);
      if (v >= 2) used[static_cast<std::size_t>(v - 2)] = true;
    }
  }
  for (int k = 0; k < g.num_nodes; ++k) {
    if (!used[static_cast<std::size_t>(k)]) g.concat.push_back(k);
  }
  return g;
}

std::int64_t conv_parameters(int kernel_area, int c_in, int c_out) {
  return static_cast<std::int64_t>(kernel_area) * c_in * c_out + 2LL * c_out;
}

std::int64_t op_parameters(Op op, int channels) {
  switch (op) {
    case Op::kConv1x1:
      return conv_parameters(1, channels, channels);
    case Op::kConv3x3:
      return conv_parameters(9, channels, channels);
    case Op::kConv1x3_3x1:
      return 2 * conv_parameters(3, channels, channels);
    case Op::kConv1x7_7x1:
      return 2 * conv_parameters(7, channels, channels);
    default:
      return 0;
  }
}

std::int64_t cell_body_parameters(const ArchGraph& graph, int width) {
  std::int64_t total = 0;
  for (Op op : graph.ops) total += op_parameters(op, width);
  return total;
}

NetworkSpec assemble_network(const Genome& genome, const NetworkOptions& options) {
  if (options.n_repeat < 1 || options.base_channels < 1 || options.num_classes < 1 ||
      options.image_channels < 1) {
    throw ConfigError("network sizes must be positive");
  }
  const ArchGraph normal = decode_cell(genome.normal());
  const ArchGraph reduction = decode_cell(genome.reduction());

  NetworkSpec spec;
  spec.n_repeat = options.n_repeat;
  spec.base_channels = options.base_channels;
  spec.num_classes = options.num_classes;
  spec.stem = {options.image_channels, options.base_channels, 3};

  const Stage stem{options.base_channels, options.base_channels, 0};
  Stage prev_prev = stem;
  Stage prev = stem;
  int width = options.base_channels;
  int level = 0;

  auto add_cell = [&](const ArchGraph& graph) {
    CellSpec cell;
    cell.kind = graph.kind;
    cell.graph = graph;
    cell.width_in = prev.width;
    if (graph.kind == CellKind::kReduction) {
      width *= 2;
      ++level;
      cell.stride = 2;
    }
    cell.width = width;
    cell.input_channels = {prev_prev.channels, prev.channels};
    cell.input_strides = {stride_between(prev_prev.level, level),
                          stride_between(prev.level, level)};
    cell.output_channels = static_cast<int>(graph.concat.size()) * width;
    spec.cells.push_back(std::move(cell));
    prev_prev = prev;
    prev = Stage{spec.cells.back().output_channels, width, level};
  };

  for (int block = 0; block < 3; ++block) {
    if (block > 0) add_cell(reduction);
    for (int r = 0; r < options.n_repeat; ++r) add_cell(normal);
  }
  spec.classifier = {prev.channels, options.num_classes};
  return spec;
}

std::int64_t count_parameters(const NetworkSpec& spec) {
  std::int64_t total = static_cast<std::int64_t>(spec.stem.kernel) * spec.stem.kernel *
                           spec.stem.in_channels * spec.stem.out_channels +
                       2LL * spec.stem.out_channels;
  for (const CellSpec& cell : spec.cells) {
    for (int c_in : cell.input_channels) total += conv_parameters(1, c_in, cell.width);
    total += cell_body_parameters(cell.graph, cell.width);
  }
  total += static_cast<std::int64_t>(spec.classifier.in_features) *
               spec.classifier.num_classes +
           spec.classifier.num_classes;
  return total;
}

std::int64_t genome_parameters(const Genome& genome, const NetworkOptions& options) {
  return count_parameters(assemble_network(genome, options));
}

std::string cell_to_dot(const CellGenome& cell, std::string_view graph_name) {
  const ArchGraph g = decode_cell(cell);
  auto vertex_name = [&](int v) -> std::string {
    if (v < 2) return "in" + std::to_string(v);
    if (v == g.concat_vertex()) return "concat";
    return "n" + std::to_string(v - 2);
  };
  std::ostringstream out;
  out << "digraph " << graph_name << " {\n";
  out << "  rankdir=TB;\n";
  out << "  in0 [label=\"input 0\", shape=box];\n";
  out << "  in1 [label=\"input 1\", shape=box];\n";
  for (int k = 0; k < g.num_nodes; ++k) {
    out << "  n" << k << " [label=\"node " << k << "\\n"
        << op_name(g.ops[static_cast<std::size_t>(k)]) << "\"];\n";
  }
  out << "  concat [label=\"concat\", shape=box];\n";
  for (const auto& [from, to] : g.edges()) {
    out << "  " << vertex_name(from) << " -> " << vertex_name(to) << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string to_dot(const Genome& genome) {
  return cell_to_dot(genome.normal(), "normal_cell") +
         cell_to_dot(genome.reduction(), "reduction_cell");
}

nlohmann::json network_to_json(const NetworkSpec& spec) {
  using nlohmann::json;
  json cells = json::array();
  for (const CellSpec& cell : spec.cells) {
    json nodes = json::array();
    for (int k = 0; k < cell.graph.num_nodes; ++k) {
      const Op op = cell.graph.ops[static_cast<std::size_t>(k)];
      nodes.push_back({{"index", k},
                       {"op", op_code(op)},
                       {"op_name", op_name(op)},
                       {"inputs", cell.graph.inputs[static_cast<std::size_t>(k)]}});
    }
    json edges = json::array();
    for (const auto& [from, to] : cell.graph.edges()) edges.push_back({from, to});
    cells.push_back({{"kind", cell_kind_name(cell.kind)},
                     {"stride", cell.stride},
                     {"input_channels", cell.input_channels},
                     {"input_strides", cell.input_strides},
                     {"width", cell.width},
                     {"output_channels", cell.output_channels},
                     {"num_vertices", cell.graph.num_vertices()},
                     {"nodes", nodes},
                     {"edges", edges},
                     {"concat", cell.graph.concat}});
  }
  return {{"n_repeat", spec.n_repeat},
          {"base_channels", spec.base_channels},
          {"num_classes", spec.num_classes},
          {"stem",
           {{"in_channels", spec.stem.in_channels},
            {"out_channels", spec.stem.out_channels},
            {"kernel", spec.stem.kernel}}},
          {"cells", cells},
          {"classifier",
           {{"in_features", spec.classifier.in_features},
            {"num_classes", spec.classifier.num_classes}}}};
}

}  // namespace mfnas
