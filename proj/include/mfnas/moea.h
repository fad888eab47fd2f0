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

// NSGA-II building blocks over the bi-objective (validation error, parameter
// count) space. Both objectives are minimized. Dominance uses raw values;
// crowding distance and hypervolume normalize.
//
// Ties are always broken by position in the input so that a fixed seed gives
// a fixed selection.

#ifndef MFNAS_MOEA_H_
#define MFNAS_MOEA_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mfnas/genome.h"
#include "mfnas/rng.h"

namespace mfnas {

struct ObjectiveVector {
  double error = 0.0;   // f1
  double params = 0.0;  // f2

  bool operator==(const ObjectiveVector&) const = default;
};

// Throws UnevaluatedGenomeError.
ObjectiveVector objectives_of(const Genome& genome);
std::vector<ObjectiveVector> objectives_of(std::span<const Genome> genomes);

struct RankInfo {
  int front = 1;          // 1 = non-dominated
  double crowding = 0.0;  // +inf on front boundaries
};

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// 1-based front index per point.
std::vector<int> fast_non_dominated_sort(std::span<const ObjectiveVector> points);

// Crowding distance of points that share one front.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

// Front and within-front crowding distance of every point.
std::vector<RankInfo> rank_population(std::span<const ObjectiveVector> points);

struct SelectionSplit {
  std::vector<std::size_t> survivors;   // ascending input positions
  std::vector<std::size_t> eliminated;  // ascending input positions
};

// Whole fronts while they fit, then the most crowded-apart members of the
// splitting front. Throws InsufficientPoolError when n > |points|.
SelectionSplit environment_selection(std::span<const ObjectiveVector> points, std::size_t n);

struct GenomeSplit {
  std::vector<Genome> survivors;
  std::vector<Genome> eliminated;
};

GenomeSplit environment_selection(std::vector<Genome> pool, std::size_t n);

// n winners of independent two-candidate tournaments: lower front wins, then
// larger crowding, then a fair coin. Returns input positions.
std::vector<std::size_t> binary_tournament(std::span<const RankInfo> ranks, std::size_t n,
                                           Rng& rng);
std::vector<Genome> binary_tournament(std::span<const Genome> population, std::size_t n,
                                      Rng& rng);

struct HypervolumeResult {
  double value = 0.0;
  std::size_t skipped = 0;  // points not weakly dominating the reference
};

// Exact 2-D hypervolume by sort-and-sweep.
HypervolumeResult hypervolume(std::span<const ObjectiveVector> points,
                              const ObjectiveVector& ref);

// Hypervolume after scaling params by `params_scale`, with reference
// (1, 1.1) in the scaled space. `params_scale` is typically the largest
// parameter count among the populations being compared.
double normalized_hypervolume(std::span<const ObjectiveVector> points, double params_scale);

}  // namespace mfnas

#endif  // MFNAS_MOEA_H_
