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

// Variable-length integer encoding of cell-based architectures.
//
// A cell with N computation nodes is stored as the concatenation of its node
// genes. Node k carries k+2 link bits (input 0, input 1, node 0 .. node k-1)
// followed by one operation code, so the flat cell is N(N+5)/2 integers long.

#ifndef MFNAS_GENOME_H_
#define MFNAS_GENOME_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mfnas {

// Operation codes. The integer value is the on-disk code.
enum class Op : std::uint8_t {
  kIdentity = 0,
  kConv1x1 = 1,
  kConv3x3 = 2,
  kConv1x3_3x1 = 3,
  kConv1x7_7x1 = 4,
  kMaxPool2x2 = 5,
  kMaxPool3x3 = 6,
  kMaxPool5x5 = 7,
  kAvgPool2x2 = 8,
  kAvgPool3x3 = 9,
  kAvgPool5x5 = 10,
};

constexpr int kNumOps = 11;
constexpr int kFirstConvOp = 1;
constexpr int kLastConvOp = 4;
constexpr int kFirstPoolOp = 5;
constexpr int kLastPoolOp = 10;

// Default upper bound on computation nodes per cell.
constexpr int kDefaultMaxNodes = 20;

constexpr bool is_valid_op_code(int code) { return code >= 0 && code < kNumOps; }
constexpr bool is_convolution(Op op) {
  const int c = static_cast<int>(op);
  return c >= kFirstConvOp && c <= kLastConvOp;
}
constexpr bool is_pooling(Op op) {
  const int c = static_cast<int>(op);
  return c >= kFirstPoolOp && c <= kLastPoolOp;
}
constexpr int op_code(Op op) { return static_cast<int>(op); }

// Throws InvalidOpError outside [0, 10].
Op op_from_code(int code);

// Display name, e.g. "Conv 3*3" or "AvgPool 5*5".
std::string_view op_name(Op op);

enum class CellKind : std::uint8_t { kNormal, kReduction };

std::string_view cell_kind_name(CellKind kind);

struct NodeGene {
  std::vector<std::uint8_t> links;  // size == node index + 2
  Op op = Op::kIdentity;

  bool operator==(const NodeGene&) const = default;
};

struct CellGenome {
  CellKind kind = CellKind::kNormal;
  std::vector<NodeGene> nodes;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  bool operator==(const CellGenome&) const = default;
};

// Number of integers in the flat encoding of an n-node cell.
// Throws MalformedEncodingError for n < 1.
int cell_encoding_length(int num_nodes);

// Offset of node k inside the flat encoding: k(k+5)/2.
constexpr int node_offset(int node) { return node * (node + 5) / 2; }

std::vector<int> flatten(const CellGenome& cell);

// Inverse of flatten. Throws MalformedEncodingError for a bad length or a
// link value outside {0,1}, InvalidOpError for an out-of-range op.
CellGenome parse(std::span<const int> flat, CellKind kind = CellKind::kNormal);

enum class ViolationKind { kEmptyCell, kLinkLength, kOrphanNode, kOpRange };

struct Violation {
  ViolationKind kind;
  int node;  // -1 for cell-level violations
  std::string message;
};

// Every structural problem in `cell`; empty when the cell is valid.
std::vector<Violation> validate(const CellGenome& cell);
inline bool is_valid(const CellGenome& cell) { return validate(cell).empty(); }

// Per-individual survival bookkeeping for multi-fidelity selection.
struct Counters {
  int ss = 0;  // survivals under a single evaluation
  int ms = 0;  // survivals under multi-fidelity re-evaluation
  int me = 0;  // eliminations under multi-fidelity re-evaluation

  bool operator==(const Counters&) const = default;
};

struct EvalResult {
  double val_error = 1.0;     // f1, in [0, 1]
  std::int64_t params = 0;    // f2
  int epochs_trained = 0;
  std::string checkpoint_id;  // empty when no checkpoint is held

  bool operator==(const EvalResult&) const = default;
};

struct GenomeId {
  std::uint64_t value = 0;

  std::string hex() const;
  auto operator<=>(const GenomeId&) const = default;
};

// 64-bit FNV-1a over the role-tagged flat encodings of both cells.
GenomeId genome_id(const CellGenome& normal, const CellGenome& reduction);

// One individual: a normal cell plus a reduction cell. The genotype is fixed
// at construction; counters and the evaluation record evolve during search.
class Genome {
 public:
  Genome(CellGenome normal, CellGenome reduction);

  const CellGenome& normal() const { return normal_; }
  const CellGenome& reduction() const { return reduction_; }
  GenomeId id() const { return id_; }

  // Genotype equality; ignores counters and evaluation.
  bool same_genotype(const Genome& other) const {
    return id_ == other.id_ && normal_ == other.normal_ &&
           reduction_ == other.reduction_;
  }

  // Throws UnevaluatedGenomeError when no evaluation is attached.
  const EvalResult& evaluation() const;

  Counters counters;
  std::optional<EvalResult> eval;

 private:
  CellGenome normal_;
  CellGenome reduction_;
  GenomeId id_;
};

// Canonical text form: `NC=[1,0,2] RC=[1,1,5]`.
std::string to_text(const Genome& genome);
std::string to_text(const CellGenome& cell);

// Parses the canonical text form. Throws MalformedEncodingError.
Genome genome_from_text(std::string_view line);

}  // namespace mfnas

#endif  // MFNAS_GENOME_H_
