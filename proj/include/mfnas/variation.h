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

// Population initialization and genetic operators. Every operator returns
// fresh, repaired values; inputs are never modified.

#ifndef MFNAS_VARIATION_H_
#define MFNAS_VARIATION_H_

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mfnas/genome.h"
#include "mfnas/rng.h"

namespace mfnas {

struct VariationConfig {
  double p_crossover = 0.9;
  double p_inter = 0.5;          // inter-cell vs intra-cell crossover
  std::optional<double> p_link;  // unset: 1 / flat length of the mutated cell
  double p_op = 0.1;
  double p_add = 0.2;            // per cell
  int max_nodes = kDefaultMaxNodes;
  double init_replace = 0.5;     // op replacement rate during initialization

  // Throws ConfigError when a probability leaves [0,1] or max_nodes < 1.
  void validate() const;
};

struct NodeRange {
  int lo = 5;
  int hi = 12;
};

// Diversity-graded initialization. Individual i (1-based) uses prob = i/pop:
// the last link bit of every node is set with probability 1-prob, the first
// two with probability prob and the rest uniformly; ops are drawn uniformly
// and then biased towards convolutions (normal cell) or pooling (reduction).
// Throws ConfigError for pop_size < 1 or an empty range.
std::vector<Genome> initialize_population(int pop_size, NodeRange range, Rng& rng,
                                          const VariationConfig& cfg = {});

// {NC1,RC1},{NC2,RC2} -> {NC1,RC2},{NC2,RC1}.
std::pair<Genome, Genome> inter_cell_crossover(const Genome& a, const Genome& b);

// Draws the crossover point uniformly from [1, length of the longer cell].
std::pair<CellGenome, CellGenome> intra_cell_crossover(const CellGenome& a,
                                                       const CellGenome& b, Rng& rng);

// Same as above with an explicit 1-based crossover point. Offspring are
// returned in argument order. Points up to the shorter cell's length swap the
// flat prefixes; larger points append the truncated node of the longer cell
// that contains the point to the shorter cell. `rng` is used by repair only.
std::pair<CellGenome, CellGenome> intra_cell_crossover_at(const CellGenome& a,
                                                          const CellGenome& b,
                                                          int point, Rng& rng);

CellGenome single_point_mutation(const CellGenome& cell, const VariationConfig& cfg,
                                 Rng& rng);

// Appends one random node. At the cap the cell is returned unchanged.
CellGenome add_node_mutation(const CellGenome& cell, int max_nodes, Rng& rng);

// Gives every orphan node exactly one uniformly chosen link.
CellGenome repair(CellGenome cell, Rng& rng);

// Pairs consecutive parents, applies crossover with probability p_crossover,
// then mutation to every offspring cell. Throws ConfigError on an odd or
// empty parent list.
std::vector<Genome> make_offspring(std::span<const Genome> parents,
                                   const VariationConfig& cfg, Rng& rng);

}  // namespace mfnas

#endif  // MFNAS_VARIATION_H_
