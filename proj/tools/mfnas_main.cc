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

// Command-line entry point.
//
// Exit codes:
//   0  success
//   1  any other failure (I/O, malformed input)
//   2  invalid configuration or command line
//   3  evaluator failure (trainer crashed, timed out or broke the protocol)

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "mfnas/analysis.h"
#include "mfnas/decoder.h"
#include "mfnas/errors.h"
#include "mfnas/genome.h"
#include "mfnas/log.h"
#include "mfnas/search.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEvaluator = 3;

// Config keys exposed as --flags (underscores become dashes).
const char* const kConfigKeys[] = {
    "pop_size",      "gen_budget",   "node_min",  "node_max",     "mf",
    "complete_epochs", "archive_capacity", "p_crossover", "p_inter", "p_link",
    "p_op",          "p_add",        "max_nodes", "init_replace", "evaluator",
    "seed",          "output_dir",   "n_repeat",  "base_channels", "num_classes",
    "eval_timeout",  "synthetic_noise",
};

struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> values;  // key, value

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "key = value configuration file");
    cmd->add_option("--set", sets, "override as key=value (repeatable)");
    values.reserve(std::size(kConfigKeys));
    for (const char* key : kConfigKeys) values.emplace_back(key, std::string());
    for (auto& [key, value] : values) {
      std::string flag = "--" + key;
      for (char& ch : flag) {
        if (ch == '_') ch = '-';
      }
      if (key == "output_dir") flag = "-o," + flag;
      cmd->add_option(flag, value);
    }
  }

  mfnas::RunConfig load() const {
    mfnas::RunConfig config;
    if (!config_file.empty()) config = mfnas::RunConfig::from_file(config_file);
    for (const auto& [key, value] : values) {
      if (!value.empty()) config.set(key, value);
    }
    for (const std::string& s : sets) {
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos) throw mfnas::ConfigError("--set expects key=value, got " + s);
      config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    config.validate();
    return config;
  }
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw mfnas::IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_loop(const ConfigFlags& flags, bool baseline) {
  const mfnas::RunConfig config = flags.load();
  const std::filesystem::path dir = config.output_dir;
  std::ofstream events;
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    events.open(dir / "events.jsonl");
    if (!events) throw mfnas::IoError("cannot write " + (dir / "events.jsonl").string());
  }
  auto sink = [&](const mfnas::GenerationRecord& record) {
    const std::string line = mfnas::to_json(record).dump();
    if (events.is_open()) {
      events << line << '\n' << std::flush;
    } else {
      std::cout << line << '\n';
    }
  };
  auto backend = mfnas::make_backend(config);
  const mfnas::SearchResult result = baseline ? mfnas::run_baseline(config, *backend, sink)
                                              : mfnas::run_search(config, *backend, sink);
  if (events.is_open()) events.close();
  if (!dir.empty()) mfnas::write_run_artifacts(dir, config, result);
  std::fprintf(stderr, "%s finished: %zu individuals, %lld simulated epochs\n",
               baseline ? "baseline" : "search", result.population.size(),
               static_cast<long long>(result.total_epochs));
  return kExitOk;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw mfnas::ConfigError("not an integer list: " + text);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity evolutionary neural architecture search"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging to stderr");

  ConfigFlags search_flags, baseline_flags, sweep_flags, validate_flags;

  CLI::App* search = app.add_subcommand("search", "multi-fidelity search");
  search_flags.attach(search);
  CLI::App* baseline = app.add_subcommand("baseline", "complete-epoch NSGA-II baseline");
  baseline_flags.attach(baseline);

  CLI::App* rank = app.add_subcommand("rank-study", "tau of epoch-e rankings vs the last epoch");
  int rank_n = 200, rank_epochs = 25;
  std::uint64_t rank_seed = 0;
  std::string rank_out;
  rank->add_option("--n", rank_n, "number of sampled architectures");
  rank->add_option("--epochs", rank_epochs, "largest epoch");
  rank->add_option("--seed", rank_seed);
  rank->add_option("-o,--out", rank_out, "write the table here instead of stdout");

  CLI::App* sweep = app.add_subcommand("fidelity-sweep", "cost and tau per MF value");
  std::string sweep_mf = "1,2,4,6,8,12";
  int sweep_seeds = 10;
  std::uint64_t sweep_first_seed = 0;
  std::string sweep_out;
  sweep->add_option("--mf-values", sweep_mf, "comma-separated MF values");
  sweep->add_option("--seeds", sweep_seeds, "number of seeds");
  sweep->add_option("--first-seed", sweep_first_seed);
  sweep->add_option("--out", sweep_out, "write the table here instead of stdout");
  sweep_flags.attach(sweep);

  CLI::App* exp = app.add_subcommand("export", "front CSV and DOT files of a finished run");
  std::string export_run, export_out;
  exp->add_option("run_dir", export_run, "run directory")->required();
  exp->add_option("-o,--out", export_out, "destination (default <run_dir>/front)");

  CLI::App* validate = app.add_subcommand("validate-config", "check and print the effective config");
  validate_flags.attach(validate);

  CLI::App* dot = app.add_subcommand("render-dot", "DOT graph of a genome");
  std::string dot_genome, dot_out;
  dot->add_option("genome", dot_genome, "\"NC=[...] RC=[...]\"")->required();
  dot->add_option("-o,--out", dot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (verbose) mfnas::set_log_level(mfnas::LogLevel::kDebug);

  try {
    if (search->parsed()) return run_loop(search_flags, false);
    if (baseline->parsed()) return run_loop(baseline_flags, true);

    if (rank->parsed()) {
      const std::vector<double> taus = mfnas::ranking_study(rank_n, rank_epochs, rank_seed);
      std::ostringstream table;
      table << "# evaluator: synthetic learning-curve model, n=" << rank_n
            << ", seed=" << rank_seed << "\nepoch\ttau\n";
      for (std::size_t e = 0; e < taus.size(); ++e) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", taus[e]);
        table << e + 1 << '\t' << buf << '\n';
      }
      if (rank_out.empty()) {
        std::cout << table.str();
      } else {
        std::ofstream(rank_out) << table.str();
      }
      return kExitOk;
    }

    if (sweep->parsed()) {
      const mfnas::RunConfig base = sweep_flags.load();
      const std::vector<int> mfs = parse_int_list(sweep_mf);
      for (int mf : mfs) {
        mfnas::RunConfig probe = base;
        probe.mf = mf;
        probe.validate();
      }
      if (sweep_seeds < 1) throw mfnas::ConfigError("--seeds must be at least 1");
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < sweep_seeds; ++i) seeds.push_back(sweep_first_seed + i);
      const auto rows = mfnas::fidelity_sweep(mfs, seeds, base);
      std::ostringstream table;
      table << "# evaluator: synthetic learning-curve model, seeds=" << sweep_seeds << '\n'
            << "mf\tcost_ratio\tcost_reduction\ttau\n";
      for (const auto& row : rows) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\t%.6f\n", row.mf, row.cost_ratio,
                      row.cost_reduction, row.tau);
        table << buf;
      }
      if (sweep_out.empty()) {
        std::cout << table.str();
      } else {
        std::ofstream(sweep_out) << table.str();
      }
      return kExitOk;
    }

    if (exp->parsed()) {
      const std::filesystem::path run = export_run;
      const auto population =
          mfnas::population_from_tsv(read_file(run / "final_population.tsv"));
      mfnas::export_front(population, export_out.empty() ? run / "front" : std::filesystem::path(export_out));
      return kExitOk;
    }

    if (validate->parsed()) {
      std::cout << validate_flags.load().to_text();
      return kExitOk;
    }

    if (dot->parsed()) {
      const std::string text = mfnas::to_dot(mfnas::genome_from_text(dot_genome));
      if (dot_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream(dot_out) << text;
      }
      return kExitOk;
    }
  } catch (const mfnas::ConfigError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitConfig;
  } catch (const mfnas::EvaluationError& e) {
    std::fprintf(stderr, "evaluator failure: %s\n", e.what());
    return kExitEvaluator;
  } catch (const mfnas::ProtocolError& e) {
    std::fprintf(stderr, "evaluator failure: %s\n", e.what());
    return kExitEvaluator;
  } catch (const mfnas::CheckpointError& e) {
    std::fprintf(stderr, "evaluator failure: %s\n", e.what());
    return kExitEvaluator;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
