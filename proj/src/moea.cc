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

#include "mfnas/moea.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "mfnas/errors.h"

namespace mfnas {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Better rank: lower front, then larger crowding.
bool better(const RankInfo& a, const RankInfo& b) {
  if (a.front != b.front) return a.front < b.front;
  return a.crowding > b.crowding;
}

}  // namespace

ObjectiveVector objectives_of(const Genome& genome) {
  const EvalResult& e = genome.evaluation();
  return {e.val_error, static_cast<double>(e.params)};
}

std::vector<ObjectiveVector> objectives_of(std::span<const Genome> genomes) {
  std::vector<ObjectiveVector> out;
  out.reserve(genomes.size());
  for (const Genome& g : genomes) out.push_back(objectives_of(g));
  return out;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  return a.error <= b.error && a.params <= b.params &&
         (a.error < b.error || a.params < b.params);
}

std::vector<int> fast_non_dominated_sort(std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<int> domination_count(n, 0);
  std::vector<int> front(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (dominates(points[p], points[q])) {
        dominated_by[p].push_back(q);
      } else if (dominates(points[q], points[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) {
      front[p] = 1;
      current.push_back(p);
    }
  }
  int index = 1;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by[p]) {
        if (--domination_count[q] == 0) {
          front[q] = index + 1;
          next.push_back(q);
        }
      }
    }
    ++index;
    current = std::move(next);
  }
  return front;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), kInf);
    return distance;
  }
  std::vector<std::size_t> order(n);
  auto accumulate = [&](auto key) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key(front[a]) < key(front[b]); });
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    const double range = key(front[order.back()]) - key(front[order.front()]);
    if (range <= 0.0) return;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      distance[order[i]] += (key(front[order[i + 1]]) - key(front[order[i - 1]])) / range;
    }
  };
  accumulate([](const ObjectiveVector& v) { return v.error; });
  accumulate([](const ObjectiveVector& v) { return v.params; });
  return distance;
}

std::vector<RankInfo> rank_population(std::span<const ObjectiveVector> points) {
  const std::vector<int> fronts = fast_non_dominated_sort(points);
  std::vector<RankInfo> ranks(points.size());
  const int max_front = fronts.empty() ? 0 : *std::max_element(fronts.begin(), fronts.end());
  for (int f = 1; f <= max_front; ++f) {
    std::vector<std::size_t> members;
    std::vector<ObjectiveVector> values;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (fronts[i] != f) continue;
      members.push_back(i);
      values.push_back(points[i]);
    }
    const std::vector<double> crowd = crowding_distance(values);
    for (std::size_t j = 0; j < members.size(); ++j) {
      ranks[members[j]] = {f, crowd[j]};
    }
  }
  return ranks;
}

SelectionSplit environment_selection(std::span<const ObjectiveVector> points,
                                     std::size_t n) {
  if (n > points.size()) {
    throw InsufficientPoolError("cannot select " + std::to_string(n) + " from a pool of " +
                                std::to_string(points.size()));
  }
  const std::vector<RankInfo> ranks = rank_population(points);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return better(ranks[a], ranks[b]);
  });
  SelectionSplit split;
  split.survivors.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  split.eliminated.assign(order.begin() + static_cast<std::ptrdiff_t>(n), order.end());
  std::sort(split.survivors.begin(), split.survivors.end());
  std::sort(split.eliminated.begin(), split.eliminated.end());
  return split;
}

GenomeSplit environment_selection(std::vector<Genome> pool, std::size_t n) {
  const std::vector<ObjectiveVector> points = objectives_of(pool);
  const SelectionSplit split = environment_selection(points, n);
  GenomeSplit out;
  out.survivors.reserve(split.survivors.size());
  out.eliminated.reserve(split.eliminated.size());
  for (std::size_t i : split.survivors) out.survivors.push_back(std::move(pool[i]));
  for (std::size_t i : split.eliminated) out.eliminated.push_back(std::move(pool[i]));
  return out;
}

std::vector<std::size_t> binary_tournament(std::span<const RankInfo> ranks, std::size_t n,
                                           Rng& rng) {
  std::vector<std::size_t> winners;
  if (ranks.empty()) return winners;
  winners.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = rng.uniform_index(ranks.size());
    const std::size_t b = rng.uniform_index(ranks.size());
    if (better(ranks[a], ranks[b])) {
      winners.push_back(a);
    } else if (better(ranks[b], ranks[a])) {
      winners.push_back(b);
    } else {
      winners.push_back(rng.bernoulli(0.5) ? a : b);
    }
  }
  return winners;
}

std::vector<Genome> binary_tournament(std::span<const Genome> population, std::size_t n,
                                      Rng& rng) {
  const std::vector<RankInfo> ranks = rank_population(objectives_of(population));
  std::vector<Genome> out;
  out.reserve(n);
  for (std::size_t i : binary_tournament(ranks, n, rng)) out.push_back(population[i]);
  return out;
}

HypervolumeResult hypervolume(std::span<const ObjectiveVector> points,
                              const ObjectiveVector& ref) {
  HypervolumeResult result;
  std::vector<ObjectiveVector> kept;
  kept.reserve(points.size());
  for (const ObjectiveVector& p : points) {
    if (p.error <= ref.error && p.params <= ref.params) {
      kept.push_back(p);
    } else {
      ++result.skipped;
    }
  }
  std::sort(kept.begin(), kept.end(), [](const ObjectiveVector& a, const ObjectiveVector& b) {
    return a.error != b.error ? a.error < b.error : a.params < b.params;
  });
  double floor = ref.params;
  for (const ObjectiveVector& p : kept) {
    if (p.params < floor) {
      result.value += (ref.error - p.error) * (floor - p.params);
      floor = p.params;
    }
  }
  return result;
}

double normalized_hypervolume(std::span<const ObjectiveVector> points, double params_scale) {
  if (!(params_scale > 0.0)) return 0.0;
  std::vector<ObjectiveVector> scaled;
  scaled.reserve(points.size());
  for (const ObjectiveVector& p : points) scaled.push_back({p.error, p.params / params_scale});
  return hypervolume(scaled, {1.0, 1.1}).value;
}

}  // namespace mfnas
