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

#include "mfnas/variation.h"

#include <algorithm>
#include <string>

#include "mfnas/errors.h"
#include "mfnas/log.h"

namespace mfnas {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " = " + std::to_string(p) +
                      " is not a probability");
  }
}

CellGenome init_cell(CellKind kind, int num_nodes, double prob, double replace,
                     Rng& rng) {
  CellGenome cell;
  cell.kind = kind;
  cell.nodes.resize(static_cast<std::size_t>(num_nodes));
  for (int k = 0; k < num_nodes; ++k) {
    NodeGene& node = cell.nodes[static_cast<std::size_t>(k)];
    node.links.assign(static_cast<std::size_t>(k + 2), 0);
    if (rng.bernoulli(1.0 - prob)) node.links.back() = 1;
    if (rng.bernoulli(prob)) node.links[0] = 1;
    if (rng.bernoulli(prob)) node.links[1] = 1;
    for (int j = 2; j <= k; ++j) {
      if (rng.bernoulli(0.5)) node.links[static_cast<std::size_t>(j)] = 1;
    }
    node.op = op_from_code(rng.uniform_int(0, kNumOps - 1));
  }
  for (NodeGene& node : cell.nodes) {
    if (!rng.bernoulli(replace)) continue;
    node.op = kind == CellKind::kNormal
                  ? op_from_code(rng.uniform_int(kFirstConvOp, kLastConvOp))
                  : op_from_code(rng.uniform_int(kFirstPoolOp, kLastPoolOp));
  }
  return repair(std::move(cell), rng);
}

NodeGene random_node(int index, Rng& rng) {
  NodeGene node;
  node.links.resize(static_cast<std::size_t>(index + 2));
  for (auto& bit : node.links) bit = rng.bernoulli(0.5) ? 1 : 0;
  node.op = op_from_code(rng.uniform_int(0, kNumOps - 1));
  return node;
}

// Finds node k with k(k+5)/2 < point <= (k+1)(k+6)/2.
int node_containing(int point) {
  int k = 0;
  while (node_offset(k + 1) < point) ++k;
  return k;
}

}  // namespace

void VariationConfig::validate() const {
  check_probability(p_crossover, "p_crossover");
  check_probability(p_inter, "p_inter");
  if (p_link) check_probability(*p_link, "p_link");
  check_probability(p_op, "p_op");
  check_probability(p_add, "p_add");
  check_probability(init_replace, "init_replace");
  if (max_nodes < 1) throw ConfigError("max_nodes must be at least 1");
}

std::vector<Genome> initialize_population(int pop_size, NodeRange range, Rng& rng,
                                          const VariationConfig& cfg) {
  if (pop_size < 1) throw ConfigError("population size must be at least 1");
  if (range.lo < 1 || range.lo > range.hi) {
    throw ConfigError("empty node range [" + std::to_string(range.lo) + "," +
                      std::to_string(range.hi) + "]");
  }
  std::vector<Genome> population;
  population.reserve(static_cast<std::size_t>(pop_size));
  for (int i = 1; i <= pop_size; ++i) {
    const double prob = static_cast<double>(i) / pop_size;
    const int normal_nodes = rng.uniform_int(range.lo, range.hi);
    const int reduction_nodes = rng.uniform_int(range.lo, range.hi);
    CellGenome normal =
        init_cell(CellKind::kNormal, normal_nodes, prob, cfg.init_replace, rng);
    CellGenome reduction =
        init_cell(CellKind::kReduction, reduction_nodes, prob, cfg.init_replace, rng);
    population.emplace_back(std::move(normal), std::move(reduction));
  }
  return population;
}

std::pair<Genome, Genome> inter_cell_crossover(const Genome& a, const Genome& b) {
  return {Genome(a.normal(), b.reduction()), Genome(b.normal(), a.reduction())};
}

std::pair<CellGenome, CellGenome> intra_cell_crossover(const CellGenome& a,
                                                       const CellGenome& b, Rng& rng) {
  const int longest = std::max(a.num_nodes(), b.num_nodes());
  const int point = rng.uniform_int(1, cell_encoding_length(longest));
  return intra_cell_crossover_at(a, b, point, rng);
}

std::pair<CellGenome, CellGenome> intra_cell_crossover_at(const CellGenome& a,
                                                          const CellGenome& b,
                                                          int point, Rng& rng) {
  const bool swapped = a.num_nodes() > b.num_nodes();
  const CellGenome& shorter = swapped ? b : a;
  const CellGenome& longer = swapped ? a : b;
  const int short_len = cell_encoding_length(shorter.num_nodes());
  const int long_len = cell_encoding_length(longer.num_nodes());
  if (point < 1 || point > long_len) {
    throw ConfigError("crossover point " + std::to_string(point) + " outside [1," +
                      std::to_string(long_len) + "]");
  }

  CellGenome short_child;
  CellGenome long_child;
  if (point <= short_len) {
    // Node k sits at the same flat offset in every cell, so a prefix swap
    // exchanges whole link bits and ops without breaking node layout.
    std::vector<int> fs = flatten(shorter);
    std::vector<int> fl = flatten(longer);
    std::swap_ranges(fs.begin(), fs.begin() + point, fl.begin());
    short_child = parse(fs, shorter.kind);
    long_child = parse(fl, longer.kind);
  } else {
    const int k = node_containing(point);
    const NodeGene& donor = longer.nodes[static_cast<std::size_t>(k)];
    const auto keep = static_cast<std::ptrdiff_t>(shorter.num_nodes() + 2);
    NodeGene moved;
    moved.links.assign(donor.links.begin(), donor.links.begin() + keep);
    moved.op = donor.op;
    short_child = shorter;
    short_child.nodes.push_back(std::move(moved));
    long_child = longer;
  }
  short_child = repair(std::move(short_child), rng);
  long_child = repair(std::move(long_child), rng);
  if (swapped) return {std::move(long_child), std::move(short_child)};
  return {std::move(short_child), std::move(long_child)};
}

CellGenome single_point_mutation(const CellGenome& cell, const VariationConfig& cfg,
                                 Rng& rng) {
  const double p_link =
      cfg.p_link.value_or(1.0 / cell_encoding_length(std::max(cell.num_nodes(), 1)));
  CellGenome out = cell;
  for (NodeGene& node : out.nodes) {
    for (auto& bit : node.links) {
      if (rng.bernoulli(p_link)) bit = bit ? 0 : 1;
    }
    if (rng.bernoulli(cfg.p_op)) {
      // Uniform over the ten codes other than the current one.
      int code = rng.uniform_int(0, kNumOps - 2);
      if (code >= op_code(node.op)) ++code;
      node.op = op_from_code(code);
    }
  }
  return repair(std::move(out), rng);
}

CellGenome add_node_mutation(const CellGenome& cell, int max_nodes, Rng& rng) {
  if (cell.num_nodes() >= max_nodes) {
    log(LogLevel::kDebug, "add-node mutation skipped: cell already has " +
                              std::to_string(cell.num_nodes()) + " nodes");
    return cell;
  }
  CellGenome out = cell;
  out.nodes.push_back(random_node(cell.num_nodes(), rng));
  return repair(std::move(out), rng);
}

CellGenome repair(CellGenome cell, Rng& rng) {
  for (NodeGene& node : cell.nodes) {
    if (node.links.empty()) continue;
    const bool orphan =
        std::none_of(node.links.begin(), node.links.end(), [](auto b) { return b != 0; });
    if (orphan) node.links[rng.uniform_index(node.links.size())] = 1;
  }
  return cell;
}

std::vector<Genome> make_offspring(std::span<const Genome> parents,
                                   const VariationConfig& cfg, Rng& rng) {
  if (parents.empty() || parents.size() % 2 != 0) {
    throw ConfigError("offspring generation needs a positive, even number of parents, got " +
                      std::to_string(parents.size()));
  }
  std::vector<Genome> offspring;
  offspring.reserve(parents.size());
  for (std::size_t i = 0; i < parents.size(); i += 2) {
    CellGenome nc[2] = {parents[i].normal(), parents[i + 1].normal()};
    CellGenome rc[2] = {parents[i].reduction(), parents[i + 1].reduction()};
    if (rng.bernoulli(cfg.p_crossover)) {
      if (rng.bernoulli(cfg.p_inter)) {
        std::swap(rc[0], rc[1]);
      } else {
        auto [n0, n1] = intra_cell_crossover(nc[0], nc[1], rng);
        auto [r0, r1] = intra_cell_crossover(rc[0], rc[1], rng);
        nc[0] = std::move(n0);
        nc[1] = std::move(n1);
        rc[0] = std::move(r0);
        rc[1] = std::move(r1);
      }
    }
    for (int j = 0; j < 2; ++j) {
      CellGenome n = single_point_mutation(nc[j], cfg, rng);
      if (rng.bernoulli(cfg.p_add)) n = add_node_mutation(n, cfg.max_nodes, rng);
      CellGenome r = single_point_mutation(rc[j], cfg, rng);
      if (rng.bernoulli(cfg.p_add)) r = add_node_mutation(r, cfg.max_nodes, rng);
      offspring.emplace_back(std::move(n), std::move(r));
    }
  }
  return offspring;
}

}  // namespace mfnas
