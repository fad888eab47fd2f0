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

// Rank-correlation studies and result export.

#ifndef MFNAS_ANALYSIS_H_
#define MFNAS_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mfnas/evaluation.h"
#include "mfnas/genome.h"

namespace mfnas {

struct RunConfig;

// Genome ids ordered from best (lowest error) to worst.
using Ranking = std::vector<GenomeId>;

struct ScoredGenome {
  GenomeId id;
  double error = 0.0;
};

// Ascending error, ties by id. Duplicate ids keep their first occurrence.
Ranking make_ranking(std::span<const ScoredGenome> scores);

// Kendall's tau-a, (concordant - discordant) / (n(n-1)/2), computed in
// O(n log n) by counting inversions. Throws InputError when the rankings do
// not hold the same distinct ids or hold fewer than two.
double kendall_tau(const Ranking& a, const Ranking& b);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// tau between the epoch-e ranking and the epoch-max_epochs ranking of
// n_arch sampled architectures (node range [5,12]), for e = 1..max_epochs.
std::vector<double> ranking_study(int n_arch, int max_epochs, std::uint64_t seed,
                                  const CurveCoefficients& coeffs = {});

struct SweepRow {
  int mf = 0;
  double cost_ratio = 0.0;      // median epochs(MF) / epochs(baseline)
  double cost_reduction = 0.0;  // median 1 - cost_ratio
  double tau = 0.0;             // median fidelity-vs-complete tau on the final pool
};

// Runs the baseline once per seed and the multi-fidelity search per
// (MF, seed). Search and synthetic seeds are both set to each seed.
std::vector<SweepRow> fidelity_sweep(std::span<const int> mf_values,
                                     std::span<const std::uint64_t> seeds,
                                     const RunConfig& base);

// Writes front.csv (id, val_error, params, front, nc, rc; ascending error)
// and one DOT file per non-dominated genome into `dir`. Throws IoError.
void export_front(std::span<const Genome> population, const std::filesystem::path& dir);

}  // namespace mfnas

#endif  // MFNAS_ANALYSIS_H_
