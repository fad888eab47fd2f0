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

#include "mfnas/genome.h"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "mfnas/errors.h"
#include "mfnas/rng.h"

namespace mfnas {
namespace {

constexpr std::array<std::string_view, kNumOps> kOpNames = {
    "Identity",    "Conv 1*1",    "Conv 3*3",    "Conv 1*3+3*1",
    "Conv 1*7+7*1", "MaxPool 2*2", "MaxPool 3*3", "MaxPool 5*5",
    "AvgPool 2*2", "AvgPool 3*3", "AvgPool 5*5",
};

// Returns N when length == N(N+5)/2 for some N >= 1, otherwise 0.
int nodes_for_length(std::size_t length) {
  int n = 1;
  while (true) {
    const std::size_t len = static_cast<std::size_t>(node_offset(n));
    if (len == length) return n;
    if (len > length) return 0;
    ++n;
  }
}

void append_cell_bytes(const CellGenome& cell, std::uint8_t role,
                       std::vector<std::uint8_t>& out) {
  out.push_back(role);
  const auto n = static_cast<std::uint32_t>(cell.nodes.size());
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>(n >> shift));
  }
  for (int v : flatten(cell)) out.push_back(static_cast<std::uint8_t>(v));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

// Parses "[1,0,2]" into integers.
std::vector<int> parse_int_list(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw MalformedEncodingError("expected a bracketed list, got '" +
                                 std::string(text) + "'");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<int> values;
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw MalformedEncodingError("bad integer '" + std::string(item) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return values;
}

}  // namespace

Op op_from_code(int code) {
  if (!is_valid_op_code(code)) {
    throw InvalidOpError("operation code " + std::to_string(code) +
                         " outside [0, 10]");
  }
  return static_cast<Op>(code);
}

std::string_view op_name(Op op) { return kOpNames.at(static_cast<std::size_t>(op)); }

std::string_view cell_kind_name(CellKind kind) {
  return kind == CellKind::kNormal ? "normal" : "reduction";
}

int cell_encoding_length(int num_nodes) {
  if (num_nodes < 1) {
    throw MalformedEncodingError("a cell needs at least one node, got " +
                                 std::to_string(num_nodes));
  }
  return node_offset(num_nodes);
}

std::vector<int> flatten(const CellGenome& cell) {
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(node_offset(cell.num_nodes())));
  for (const NodeGene& node : cell.nodes) {
    for (std::uint8_t bit : node.links) flat.push_back(bit);
    flat.push_back(op_code(node.op));
  }
  return flat;
}

CellGenome parse(std::span<const int> flat, CellKind kind) {
  const int n = nodes_for_length(flat.size());
  if (n == 0) {
    throw MalformedEncodingError("length " + std::to_string(flat.size()) +
                                 " is not N(N+5)/2 for any N >= 1");
  }
  CellGenome cell;
  cell.kind = kind;
  cell.nodes.resize(static_cast<std::size_t>(n));
  std::size_t pos = 0;
  for (int k = 0; k < n; ++k) {
    NodeGene& node = cell.nodes[static_cast<std::size_t>(k)];
    node.links.resize(static_cast<std::size_t>(k + 2));
    for (auto& bit : node.links) {
      const int v = flat[pos++];
      if (v != 0 && v != 1) {
        throw MalformedEncodingError("link value " + std::to_string(v) +
                                     " at position " + std::to_string(pos) +
                                     " is not 0 or 1");
      }
      bit = static_cast<std::uint8_t>(v);
    }
    node.op = op_from_code(flat[pos++]);
  }
  return cell;
}

std::vector<Violation> validate(const CellGenome& cell) {
  std::vector<Violation> out;
  if (cell.nodes.empty()) {
    out.push_back({ViolationKind::kEmptyCell, -1, "empty cell"});
  }
  for (int k = 0; k < cell.num_nodes(); ++k) {
    const NodeGene& node = cell.nodes[static_cast<std::size_t>(k)];
    const std::string where = "node " + std::to_string(k) + ": ";
    if (node.links.size() != static_cast<std::size_t>(k + 2)) {
      out.push_back({ViolationKind::kLinkLength, k,
                     where + "link length " + std::to_string(node.links.size()) +
                         ", expected " + std::to_string(k + 2)});
    }
    bool any = false;
    bool binary = true;
    for (std::uint8_t bit : node.links) {
      any = any || bit == 1;
      binary = binary && bit <= 1;
    }
    if (!binary) {
      out.push_back({ViolationKind::kLinkLength, k, where + "non-binary link value"});
    }
    if (!any) {
      out.push_back({ViolationKind::kOrphanNode, k, where + "orphan node"});
    }
    if (!is_valid_op_code(op_code(node.op))) {
      out.push_back({ViolationKind::kOpRange, k,
                     where + "op " + std::to_string(op_code(node.op)) + " out of range"});
    }
  }
  return out;
}

std::string GenomeId::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

GenomeId genome_id(const CellGenome& normal, const CellGenome& reduction) {
  std::vector<std::uint8_t> bytes;
  append_cell_bytes(normal, 'N', bytes);
  append_cell_bytes(reduction, 'R', bytes);
  return GenomeId{fnv1a64(bytes)};
}

Genome::Genome(CellGenome normal, CellGenome reduction)
    : normal_(std::move(normal)), reduction_(std::move(reduction)) {
  normal_.kind = CellKind::kNormal;
  reduction_.kind = CellKind::kReduction;
  id_ = genome_id(normal_, reduction_);
}

const EvalResult& Genome::evaluation() const {
  if (!eval) throw UnevaluatedGenomeError("genome " + id_.hex() + " has no evaluation");
  return *eval;
}

std::string to_text(const CellGenome& cell) {
  std::string out = "[";
  bool first = true;
  for (int v : flatten(cell)) {
    if (!first) out += ',';
    out += std::to_string(v);
    first = false;
  }
  out += ']';
  return out;
}

std::string to_text(const Genome& genome) {
  return "NC=" + to_text(genome.normal()) + " RC=" + to_text(genome.reduction());
}

Genome genome_from_text(std::string_view line) {
  line = trim(line);
  const std::size_t nc = line.find("NC=");
  const std::size_t rc = line.find("RC=");
  if (nc == std::string_view::npos || rc == std::string_view::npos || rc < nc) {
    throw MalformedEncodingError("expected 'NC=[...] RC=[...]', got '" +
                                 std::string(line) + "'");
  }
  const std::vector<int> nc_flat = parse_int_list(line.substr(nc + 3, rc - nc - 3));
  std::string_view rc_text = line.substr(rc + 3);
  const std::size_t close = rc_text.find(']');
  if (close == std::string_view::npos) {
    throw MalformedEncodingError("unterminated RC list");
  }
  const std::vector<int> rc_flat = parse_int_list(rc_text.substr(0, close + 1));
  return Genome(parse(nc_flat, CellKind::kNormal), parse(rc_flat, CellKind::kReduction));
}

}  // namespace mfnas
