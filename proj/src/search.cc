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

#include "mfnas/search.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mfnas/analysis.h"
#include "mfnas/errors.h"
#include "mfnas/moea.h"

namespace mfnas {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(std::string_view key, std::string_view value) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects an unsigned integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("key '" + std::string(key) + "' expects a number, got '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Tracks the largest parameter count seen so the hypervolume reference grows
// monotonically over a run.
class HypervolumeTracker {
 public:
  void observe(std::span<const Genome> genomes) {
    for (const Genome& g : genomes) {
      if (g.eval) max_params_ = std::max(max_params_, static_cast<double>(g.eval->params));
    }
  }
  void annotate(GenerationRecord& record, std::span<const Genome> population) const {
    record.hv_ref_error = 1.0;
    record.hv_ref_params = 1.1 * max_params_;
    record.hypervolume =
        hypervolume(objectives_of(population), {1.0, record.hv_ref_params}).value;
  }

 private:
  double max_params_ = 0.0;
};

std::vector<CounterSnapshot> snapshot(std::span<const Genome> genomes) {
  std::vector<CounterSnapshot> out;
  for (const Genome& g : genomes) out.push_back({g.id(), g.counters});
  return out;
}

struct Streams {
  Rng init;
  Rng variation;
  Rng tournament;

  explicit Streams(std::uint64_t seed)
      : init(Rng(seed).substream("init")),
        variation(Rng(seed).substream("variation")),
        tournament(Rng(seed).substream("tournament")) {}
};

}  // namespace

void RunConfig::validate() const {
  if (pop_size < 2 || pop_size % 2 != 0) {
    throw ConfigError("pop_size must be even and at least 2, got " + std::to_string(pop_size));
  }
  if (gen_budget < 1) throw ConfigError("gen_budget must be at least 1");
  if (node_range.lo < 1 || node_range.lo > node_range.hi) {
    throw ConfigError("node range [" + std::to_string(node_range.lo) + "," +
                      std::to_string(node_range.hi) + "] is empty");
  }
  if (complete_epochs < 1) throw ConfigError("complete_epochs must be at least 1");
  FidelityState{1, mf, gen_budget, complete_epochs}.validate();
  if (effective_archive_capacity() < 0) throw ConfigError("archive_capacity must be >= 0");
  variation.validate();
  if (variation.max_nodes < node_range.hi) {
    throw ConfigError("max_nodes is below node_max");
  }
  if (network.n_repeat < 1 || network.base_channels < 1 || network.num_classes < 1) {
    throw ConfigError("n_repeat, base_channels and num_classes must be positive");
  }
  if (!(eval_timeout > 0.0)) throw ConfigError("eval_timeout must be positive");
  if (!(synthetic_noise >= 0.0)) throw ConfigError("synthetic_noise must be >= 0");
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "pop_size") {
    pop_size = parse_int(key, value);
  } else if (key == "gen_budget") {
    gen_budget = parse_int(key, value);
  } else if (key == "node_min") {
    node_range.lo = parse_int(key, value);
  } else if (key == "node_max") {
    node_range.hi = parse_int(key, value);
  } else if (key == "mf") {
    mf = parse_int(key, value);
  } else if (key == "complete_epochs") {
    complete_epochs = parse_int(key, value);
  } else if (key == "archive_capacity") {
    archive_capacity = parse_int(key, value);
  } else if (key == "p_crossover") {
    variation.p_crossover = parse_double(key, value);
  } else if (key == "p_inter") {
    variation.p_inter = parse_double(key, value);
  } else if (key == "p_link") {
    if (value == "auto") {
      variation.p_link.reset();
    } else {
      variation.p_link = parse_double(key, value);
    }
  } else if (key == "p_op") {
    variation.p_op = parse_double(key, value);
  } else if (key == "p_add") {
    variation.p_add = parse_double(key, value);
  } else if (key == "max_nodes") {
    variation.max_nodes = parse_int(key, value);
  } else if (key == "init_replace") {
    variation.init_replace = parse_double(key, value);
  } else if (key == "evaluator") {
    evaluator = EvaluatorSpec::parse(std::string(value));
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "output_dir") {
    output_dir = std::string(value);
  } else if (key == "n_repeat") {
    network.n_repeat = parse_int(key, value);
  } else if (key == "base_channels") {
    network.base_channels = parse_int(key, value);
  } else if (key == "num_classes") {
    network.num_classes = parse_int(key, value);
  } else if (key == "eval_timeout") {
    eval_timeout = parse_double(key, value);
  } else if (key == "synthetic_noise") {
    synthetic_noise = parse_double(key, value);
  } else {
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  }
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "pop_size = " << pop_size << '\n'
      << "gen_budget = " << gen_budget << '\n'
      << "node_min = " << node_range.lo << '\n'
      << "node_max = " << node_range.hi << '\n'
      << "mf = " << mf << '\n'
      << "complete_epochs = " << complete_epochs << '\n'
      << "archive_capacity = " << effective_archive_capacity() << '\n'
      << "p_crossover = " << format_double(variation.p_crossover) << '\n'
      << "p_inter = " << format_double(variation.p_inter) << '\n'
      << "p_link = " << (variation.p_link ? format_double(*variation.p_link) : "auto") << '\n'
      << "p_op = " << format_double(variation.p_op) << '\n'
      << "p_add = " << format_double(variation.p_add) << '\n'
      << "max_nodes = " << variation.max_nodes << '\n'
      << "init_replace = " << format_double(variation.init_replace) << '\n'
      << "evaluator = " << evaluator.to_string() << '\n'
      << "seed = " << seed << '\n'
      << "output_dir = " << output_dir << '\n'
      << "n_repeat = " << network.n_repeat << '\n'
      << "base_channels = " << network.base_channels << '\n'
      << "num_classes = " << network.num_classes << '\n'
      << "eval_timeout = " << format_double(eval_timeout) << '\n'
      << "synthetic_noise = " << format_double(synthetic_noise) << '\n';
  return out.str();
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig config;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::unique_ptr<TrainerBackend> make_backend(const RunConfig& config) {
  if (config.evaluator.kind == EvaluatorSpec::Kind::kSynthetic) {
    CurveCoefficients coeffs;
    coeffs.noise = config.synthetic_noise;
    return std::make_unique<SyntheticTrainer>(config.evaluator.seed, coeffs, config.network);
  }
  return std::make_unique<ExternalTrainer>(
      ExternalTrainerOptions{config.evaluator.command, config.eval_timeout});
}

SearchResult run_search(const RunConfig& config, TrainerBackend& backend,
                        const RecordSink& sink) {
  config.validate();
  Streams rng(config.seed);
  EvaluationService evaluator(backend, config.network);
  HypervolumeTracker hv;
  SearchResult result;
  auto emit = [&](GenerationRecord record, std::span<const Genome> population) {
    hv.annotate(record, population);
    if (sink) sink(record);
    result.records.push_back(std::move(record));
  };

  FidelityState state{1, config.mf, config.gen_budget, config.complete_epochs};
  const auto pop = static_cast<std::size_t>(config.pop_size);
  std::vector<Genome> population =
      initialize_population(config.pop_size, config.node_range, rng.init, config.variation);
  Archive archive{{}, static_cast<std::size_t>(config.effective_archive_capacity())};

  evaluator.set_phase(0, "init");
  evaluator.evaluate_all(population, state.level);
  hv.observe(population);
  {
    GenerationRecord record;
    record.generation = 0;
    record.level = state.level;
    record.survivors = snapshot(population);
    record.epochs_total = evaluator.total_epochs();
    emit(std::move(record), population);
  }

  for (int g = 1; g <= config.gen_budget; ++g) {
    const std::vector<Genome> parents = binary_tournament(population, pop, rng.tournament);
    std::vector<Genome> offspring = make_offspring(parents, config.variation, rng.variation);
    evaluator.set_phase(g, "offspring");
    evaluator.evaluate_all(offspring, state.level);
    hv.observe(offspring);
    SelectionOutcome outcome = mf_selection(std::move(population), std::move(offspring),
                                            std::move(archive), g, state, evaluator);
    population = std::move(outcome.population);
    archive = std::move(outcome.archive);
    state = outcome.state;
    hv.observe(population);
    hv.observe(archive.members);
    if (!outcome.final_scores.empty()) result.final_scores = std::move(outcome.final_scores);
    emit(std::move(outcome.record), population);
  }

  result.population = std::move(population);
  result.archive = std::move(archive);
  result.ledger = evaluator.ledger();
  result.total_epochs = evaluator.total_epochs();
  return result;
}

SearchResult run_baseline(const RunConfig& config, TrainerBackend& backend,
                          const RecordSink& sink) {
  config.validate();
  Streams rng(config.seed);
  EvaluationService evaluator(backend, config.network);
  HypervolumeTracker hv;
  SearchResult result;
  auto emit = [&](GenerationRecord record, std::span<const Genome> population) {
    record.has_archive = false;
    record.level = config.complete_epochs;
    record.survivors = snapshot(population);
    record.epochs_total = evaluator.total_epochs();
    hv.annotate(record, population);
    if (sink) sink(record);
    result.records.push_back(std::move(record));
  };

  const auto pop = static_cast<std::size_t>(config.pop_size);
  std::vector<Genome> population =
      initialize_population(config.pop_size, config.node_range, rng.init, config.variation);
  evaluator.set_phase(0, "init");
  evaluator.evaluate_all(population, config.complete_epochs);
  hv.observe(population);
  emit(GenerationRecord{}, population);

  for (int g = 1; g <= config.gen_budget; ++g) {
    const std::vector<Genome> parents = binary_tournament(population, pop, rng.tournament);
    std::vector<Genome> offspring = make_offspring(parents, config.variation, rng.variation);
    evaluator.set_phase(g, "offspring");
    evaluator.evaluate_all(offspring, config.complete_epochs);
    hv.observe(offspring);
    std::vector<Genome> pool = std::move(population);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    GenomeSplit split = environment_selection(std::move(pool), pop);
    for (Genome& gone : split.eliminated) evaluator.release(gone);
    population = std::move(split.survivors);
    GenerationRecord record;
    record.generation = g;
    record.final = g == config.gen_budget;
    emit(std::move(record), population);
  }

  result.population = std::move(population);
  result.ledger = evaluator.ledger();
  result.total_epochs = evaluator.total_epochs();
  return result;
}

std::string population_to_tsv(std::span<const Genome> population) {
  std::string out = "id\tval_error\tparams\tgenome\n";
  for (const Genome& g : population) {
    const EvalResult& e = g.evaluation();
    out += g.id().hex() + '\t' + format_double(e.val_error) + '\t' +
           std::to_string(e.params) + '\t' + to_text(g) + '\n';
  }
  return out;
}

std::vector<Genome> population_from_tsv(std::string_view text) {
  std::vector<Genome> out;
  bool header = true;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string_view> cols;
    std::string_view rest = line;
    for (int i = 0; i < 3; ++i) {
      const std::size_t tab = rest.find('\t');
      if (tab == std::string_view::npos) throw IoError("malformed population row");
      cols.push_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    Genome g = genome_from_text(rest);
    EvalResult e;
    e.val_error = parse_double("val_error", cols[1]);
    e.params = static_cast<std::int64_t>(parse_u64("params", cols[2]));
    g.eval = e;
    out.push_back(std::move(g));
  }
  return out;
}

void write_run_artifacts(const std::filesystem::path& dir, const RunConfig& config,
                         const SearchResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  open("config.txt") << config.to_text();
  {
    std::ofstream events = open("events.jsonl");
    for (const GenerationRecord& r : result.records) events << to_json(r).dump() << '\n';
  }
  {
    std::ofstream ledger = open("ledger.csv");
    ledger << "generation,phase,genome,checkpoint,from_epochs,to_epochs,charged\n";
    for (const LedgerEntry& e : result.ledger) {
      ledger << e.generation << ',' << e.phase << ',' << e.genome.hex() << ','
             << e.checkpoint_id << ',' << e.from_epochs << ',' << e.to_epochs << ','
             << e.charged() << '\n';
    }
    ledger << "total,,,,,," << result.total_epochs << '\n';
  }
  open("final_population.tsv") << population_to_tsv(result.population);
  export_front(result.population, dir / "front");
}

}  // namespace mfnas
