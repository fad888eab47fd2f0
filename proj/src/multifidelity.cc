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

#include "mfnas/multifidelity.h"

#include <algorithm>
#include <string>

#include "mfnas/errors.h"
#include "mfnas/moea.h"

namespace mfnas {
namespace {

std::vector<CounterSnapshot> snapshot(std::span<const Genome> genomes) {
  std::vector<CounterSnapshot> out;
  out.reserve(genomes.size());
  for (const Genome& g : genomes) out.push_back({g.id(), g.counters});
  return out;
}

template <typename... Parts>
std::vector<Genome> concat(Parts&&... parts) {
  std::vector<Genome> out;
  (out.insert(out.end(), std::make_move_iterator(parts.begin()),
              std::make_move_iterator(parts.end())),
   ...);
  return out;
}

}  // namespace

void FidelityState::validate() const {
  if (mf < 1) throw ConfigError("mf must be at least 1");
  if (gen_budget < 1) throw ConfigError("gen_budget must be at least 1");
  if (mf > gen_budget) {
    throw ConfigError("mf (" + std::to_string(mf) + ") > gen_budget (" +
                      std::to_string(gen_budget) + "): tick interval would be 0");
  }
  if (mf > complete_epochs) {
    throw ConfigError("mf (" + std::to_string(mf) + ") > complete_epochs (" +
                      std::to_string(complete_epochs) + ")");
  }
  if (level < 1 || level > mf) throw ConfigError("fidelity level outside [1, mf]");
}

void record_env_selection(std::span<Genome> survivors, std::span<Genome> eliminated) {
  for (Genome& g : survivors) ++g.counters.ss;
  for (Genome& g : eliminated) {
    if (g.counters.me == 0) g.counters.me = 1;
  }
}

CriteriaKey criteria_key(const Genome& genome) {
  const Counters& c = genome.counters;
  return {c.ms - c.me, -(c.ms + c.me), c.ss, genome.evaluation().params};
}

void sort_by_criteria(std::vector<Genome>& genomes) {
  std::vector<CriteriaKey> keys;
  keys.reserve(genomes.size());
  for (const Genome& g : genomes) keys.push_back(criteria_key(g));
  std::vector<std::size_t> order(genomes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  std::vector<Genome> sorted;
  sorted.reserve(genomes.size());
  for (std::size_t i : order) sorted.push_back(std::move(genomes[i]));
  genomes = std::move(sorted);
}

Truncation truncate_archive(Archive archive, std::vector<Genome> newly_eliminated) {
  std::vector<Genome> pool = concat(archive.members, newly_eliminated);
  sort_by_criteria(pool);
  Truncation out;
  out.archive.capacity = archive.capacity;
  const std::size_t keep = std::min(archive.capacity, pool.size());
  out.archive.members.assign(std::make_move_iterator(pool.begin()),
                             std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(keep)));
  out.discarded.assign(std::make_move_iterator(pool.begin() + static_cast<std::ptrdiff_t>(keep)),
                       std::make_move_iterator(pool.end()));
  return out;
}

bool tick_fires(int generation, const FidelityState& state) {
  state.validate();
  if (generation < 1 || generation > state.gen_budget) {
    throw ConfigError("generation " + std::to_string(generation) + " outside [1, " +
                      std::to_string(state.gen_budget) + "]");
  }
  return generation % state.tick_interval() == 0 && state.level != state.mf;
}

FidelityState fidelity_tick(int generation, FidelityState state) {
  if (tick_fires(generation, state)) ++state.level;
  return state;
}

nlohmann::json to_json(const GenerationRecord& r) {
  auto counters = [](const std::vector<CounterSnapshot>& snaps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const CounterSnapshot& s : snaps) {
      arr.push_back({{"id", s.id.hex()},
                     {"ss", s.counters.ss},
                     {"ms", s.counters.ms},
                     {"me", s.counters.me}});
    }
    return arr;
  };
  nlohmann::json j = {{"generation", r.generation},
                      {"level", r.level},
                      {"tick", r.tick},
                      {"final", r.final},
                      {"survivors", counters(r.survivors)},
                      {"epochs_total", r.epochs_total},
                      {"hypervolume", r.hypervolume},
                      {"hv_ref", {r.hv_ref_error, r.hv_ref_params}}};
  if (r.has_archive) j["archive"] = counters(r.archive);
  return j;
}

SelectionOutcome mf_selection(std::vector<Genome> population, std::vector<Genome> offspring,
                              Archive archive, int generation, FidelityState state,
                              EvaluationService& evaluator) {
  const std::size_t pop_size = population.size();
  const bool tick = tick_fires(generation, state);

  // Environment selection on P + Q, counter update, archive truncation.
  GenomeSplit split = environment_selection(concat(population, offspring), pop_size);
  record_env_selection(split.survivors, split.eliminated);
  Truncation trunc = truncate_archive(std::move(archive), std::move(split.eliminated));
  for (Genome& g : trunc.discarded) evaluator.release(g);

  SelectionOutcome out;
  out.record.generation = generation;
  out.record.tick = tick;
  Archive& arc = out.archive = std::move(trunc.archive);

  if (tick) {
    ++state.level;
    evaluator.set_phase(generation, "reevaluate");
    evaluator.evaluate_all(split.survivors, state.level);
    evaluator.evaluate_all(arc.members, state.level);
    GenomeSplit re = environment_selection(concat(split.survivors, arc.members), pop_size);
    for (Genome& g : re.survivors) {
      ++g.counters.ms;
      g.counters.ss = 0;
    }
    for (Genome& g : re.eliminated) {
      if (g.counters.me == 0) ++g.counters.ms;
      ++g.counters.me;
    }
    out.population = std::move(re.survivors);
    arc.members = std::move(re.eliminated);
  } else {
    out.population = std::move(split.survivors);
  }

  if (generation == state.gen_budget) {
    evaluator.set_phase(generation, "finalize");
    std::vector<Genome> pool = concat(out.population, arc.members);
    out.final_scores.reserve(pool.size());
    for (Genome& g : pool) {
      const double before = g.evaluation().val_error;
      evaluator.evaluate(g, state.complete_epochs);
      out.final_scores.push_back({g.id(), before, g.evaluation().val_error});
    }
    GenomeSplit fin = environment_selection(std::move(pool), pop_size);
    out.population = std::move(fin.survivors);
    arc.members = std::move(fin.eliminated);
    out.record.final = true;
  }

  out.state = state;
  out.record.level = state.level;
  out.record.survivors = snapshot(out.population);
  out.record.archive = snapshot(arc.members);
  out.record.epochs_total = evaluator.total_epochs();
  return out;
}

}  // namespace mfnas
