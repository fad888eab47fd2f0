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

// Multi-fidelity evaluation based selection.
//
// Every generation, NSGA-II environment selection splits parents+offspring
// into survivors and eliminated individuals. Eliminated individuals compete
// with an archive of earlier eliminations for a bounded number of archive
// slots, ranked by their survival counters. Every floor(Gen/MF) generations
// the shared training level S grows by one epoch, survivors and archive
// members are trained further from their checkpoints, and selection is
// repeated on the re-evaluated set. At the last generation the survivors and
// the archive are trained to the complete epoch count and selected once more.

#ifndef MFNAS_MULTIFIDELITY_H_
#define MFNAS_MULTIFIDELITY_H_

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "mfnas/evaluation.h"
#include "mfnas/genome.h"

namespace mfnas {

struct Archive {
  std::vector<Genome> members;
  std::size_t capacity = 0;
};

struct FidelityState {
  int level = 1;  // S: epochs every current evaluation is trained for
  int mf = 1;     // number of fidelities, also the highest level
  int gen_budget = 1;
  int complete_epochs = 1;

  // floor(gen_budget / mf).
  int tick_interval() const { return gen_budget / mf; }
  // Throws ConfigError when mf > gen_budget (interval would be 0), mf < 1,
  // mf > complete_epochs or the level is outside [1, mf].
  void validate() const;
};

// Survivors: ss += 1. Eliminated with me == 0: me = 1.
void record_env_selection(std::span<Genome> survivors, std::span<Genome> eliminated);

// Archive priority, compared lexicographically; larger keys are kept first.
struct CriteriaKey {
  int net_multi_survival = 0;   // ms - me
  int neg_multi_events = 0;     // -(ms + me)
  int single_survival = 0;      // ss
  std::int64_t params = 0;      // larger architectures preferred last

  auto operator<=>(const CriteriaKey&) const = default;
};

// Throws UnevaluatedGenomeError when the genome carries no evaluation.
CriteriaKey criteria_key(const Genome& genome);

// Stable sort by descending key.
void sort_by_criteria(std::vector<Genome>& genomes);

struct Truncation {
  Archive archive;
  std::vector<Genome> discarded;  // callers release their checkpoints
};

// Keeps the `capacity` highest-criterion genomes of archive + newcomers
// (archive members first on ties).
Truncation truncate_archive(Archive archive, std::vector<Genome> newly_eliminated);

bool tick_fires(int generation, const FidelityState& state);
// Level + 1 when the tick fires. Generations are 1-based.
FidelityState fidelity_tick(int generation, FidelityState state);

struct CounterSnapshot {
  GenomeId id;
  Counters counters;
};

// Error of one final-pool genome before and after complete training.
struct FinalScore {
  GenomeId id;
  double fidelity_error = 0.0;
  double complete_error = 0.0;
};

// One line of the per-generation event log.
struct GenerationRecord {
  int generation = 0;
  int level = 1;
  bool tick = false;
  bool final = false;
  bool has_archive = true;
  std::vector<CounterSnapshot> survivors;
  std::vector<CounterSnapshot> archive;
  std::int64_t epochs_total = 0;
  double hypervolume = 0.0;
  double hv_ref_error = 1.0;
  double hv_ref_params = 0.0;
};

nlohmann::json to_json(const GenerationRecord& record);

struct SelectionOutcome {
  std::vector<Genome> population;
  Archive archive;
  FidelityState state;
  GenerationRecord record;
  std::vector<FinalScore> final_scores;  // filled at the last generation only
};

// One generation of selection. `population` and `offspring` must be
// evaluated at state.level epochs; |population| is the population size.
SelectionOutcome mf_selection(std::vector<Genome> population, std::vector<Genome> offspring,
                              Archive archive, int generation, FidelityState state,
                              EvaluationService& evaluator);

}  // namespace mfnas

#endif  // MFNAS_MULTIFIDELITY_H_
