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

// Genome -> stacked-cell network description, parameter counting and DOT
// rendering.
//
// Parameter model: a k_h*k_w convolution from C_in to C_out channels holds
// k_h*k_w*C_in*C_out weights plus 2*C_out normalization parameters. The
// factorized ops (1*3+3*1, 1*7+7*1) are two stacked convolutions. Identity
// and pooling hold none. Each cell projects both of its inputs to the cell
// width with a 1x1 convolution; the stem is one 3x3 convolution and the head
// is global pooling followed by a linear layer.

#ifndef MFNAS_DECODER_H_
#define MFNAS_DECODER_H_

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mfnas/genome.h"

namespace mfnas {

// Vertex numbering: 0 and 1 are the cell inputs, 2+k is computation node k
// and num_nodes+2 is the concat vertex.
struct ArchGraph {
  CellKind kind = CellKind::kNormal;
  int num_nodes = 0;
  std::vector<Op> ops;                   // per computation node
  std::vector<std::vector<int>> inputs;  // per node, source vertices ascending
  std::vector<int> concat;               // node indices with out-degree 0

  static constexpr int input_vertex(int i) { return i; }
  static constexpr int node_vertex(int k) { return k + 2; }
  int concat_vertex() const { return num_nodes + 2; }
  int num_vertices() const { return num_nodes + 3; }

  // Every edge, node->concat edges included, as (from, to) vertex pairs.
  std::vector<std::pair<int, int>> edges() const;
  // Number of computation nodes consuming node k.
  int out_degree(int node) const;
};

// Throws DecodeError for a cell that fails validate().
ArchGraph decode_cell(const CellGenome& cell);

struct StemSpec {
  int in_channels = 3;
  int out_channels = 0;
  int kernel = 3;
};

struct CellSpec {
  CellKind kind = CellKind::kNormal;
  ArchGraph graph;
  std::array<int, 2> input_channels{};  // channels arriving on each input
  std::array<int, 2> input_strides{};   // stride of each input projection
  int width_in = 0;  // node width of the preceding cell (stem width for cell 0)
  int width = 0;     // channels of every computation node
  int output_channels = 0;  // concat width: |concat| * width
  int stride = 1;
};

struct ClassifierSpec {
  int in_features = 0;
  int num_classes = 0;
};

struct NetworkSpec {
  int n_repeat = 1;
  int base_channels = 16;
  int num_classes = 10;
  StemSpec stem;
  std::vector<CellSpec> cells;
  ClassifierSpec classifier;
};

struct NetworkOptions {
  int n_repeat = 1;
  int base_channels = 16;
  int num_classes = 10;
  int image_channels = 3;
};

// n_repeat normals, reduction, n_repeat normals, reduction, n_repeat normals.
// Throws ConfigError for non-positive sizes, DecodeError for invalid cells.
NetworkSpec assemble_network(const Genome& genome, const NetworkOptions& options = {});

// Parameters of one operation applied at `channels` in and out.
std::int64_t op_parameters(Op op, int channels);
std::int64_t conv_parameters(int kernel_area, int c_in, int c_out);
// Sum of op_parameters over the computation nodes of a cell.
std::int64_t cell_body_parameters(const ArchGraph& graph, int width);
std::int64_t count_parameters(const NetworkSpec& spec);

// Convenience: count_parameters(assemble_network(genome, options)).
std::int64_t genome_parameters(const Genome& genome, const NetworkOptions& options = {});

// Two `digraph` blocks (normal_cell, reduction_cell). Deterministic.
std::string to_dot(const Genome& genome);
std::string cell_to_dot(const CellGenome& cell, std::string_view graph_name);

// JSON shape consumed by external trainers; see docs/protocol.md.
nlohmann::json network_to_json(const NetworkSpec& spec);

}  // namespace mfnas

#endif  // MFNAS_DECODER_H_
