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

// Run configuration and the two search loops: the multi-fidelity search and
// the complete-epoch NSGA-II baseline.

#ifndef MFNAS_SEARCH_H_
#define MFNAS_SEARCH_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfnas/decoder.h"
#include "mfnas/evaluation.h"
#include "mfnas/multifidelity.h"
#include "mfnas/variation.h"

namespace mfnas {

// Flat key = value configuration. Keys (defaults):
//   pop_size (20), gen_budget (25), node_min (5), node_max (12), mf (6),
//   complete_epochs (25), archive_capacity (pop_size), p_crossover (0.9),
//   p_inter (0.5), p_link (auto = 1/cell length), p_op (0.1), p_add (0.2),
//   max_nodes (20), init_replace (0.5), evaluator (synthetic:0), seed (0),
//   output_dir (empty), n_repeat (1), base_channels (16), num_classes (10),
//   eval_timeout (3600 seconds), synthetic_noise (0.003).
struct RunConfig {
  int pop_size = 20;
  int gen_budget = 25;
  NodeRange node_range{5, 12};
  int mf = 6;
  int complete_epochs = 25;
  std::optional<int> archive_capacity;
  VariationConfig variation;
  EvaluatorSpec evaluator;
  std::uint64_t seed = 0;
  std::string output_dir;
  NetworkOptions network;
  double eval_timeout = 3600.0;
  double synthetic_noise = CurveCoefficients{}.noise;

  int effective_archive_capacity() const { return archive_capacity.value_or(pop_size); }

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  // Throws ConfigError for an unknown key or an unparsable value.
  void set(std::string_view key, std::string_view value);
  // Effective configuration, one `key = value` per line, stable key order.
  std::string to_text() const;
  // Parses `key = value` lines; `#` starts a comment.
  static RunConfig from_text(std::string_view text);
  static RunConfig from_file(const std::filesystem::path& path);
};

// Backend named by config.evaluator.
std::unique_ptr<TrainerBackend> make_backend(const RunConfig& config);

using RecordSink = std::function<void(const GenerationRecord&)>;

struct SearchResult {
  std::vector<Genome> population;
  Archive archive;
  std::vector<GenerationRecord> records;
  std::vector<FinalScore> final_scores;  // multi-fidelity search only
  std::vector<LedgerEntry> ledger;
  std::int64_t total_epochs = 0;
};

// Multi-fidelity search: initialization, then per generation tournament
// mating, variation, evaluation at the current level and multi-fidelity
// selection.
SearchResult run_search(const RunConfig& config, TrainerBackend& backend,
                        const RecordSink& sink = {});

// Same loop with every evaluation at complete epochs and plain NSGA-II
// environment selection (no archive, no level ladder).
SearchResult run_baseline(const RunConfig& config, TrainerBackend& backend,
                          const RecordSink& sink = {});

// Writes config.txt, events.jsonl, ledger.csv, final_population.tsv and the
// front export into `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const RunConfig& config,
                         const SearchResult& result);

// One line per genome: id, val_error, params, canonical text.
std::string population_to_tsv(std::span<const Genome> population);
std::vector<Genome> population_from_tsv(std::string_view text);

}  // namespace mfnas

#endif  // MFNAS_SEARCH_H_
