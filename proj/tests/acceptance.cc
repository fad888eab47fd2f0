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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "micro_run.h"
#include "mfnas/analysis.h"
#include "mfnas/moea.h"
#include "mfnas/search.h"
#include "mfnas/variation.h"
#include "test_util.h"

namespace mfnas {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Sorting and environment selection against brute-force oracles.
Verdict a1() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2024);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t size = 1 + gen() % 16;
    std::vector<ObjectiveVector> pts;
    const bool grid = t % 2 == 0;  // half the pools carry ties and duplicates
    for (std::size_t i = 0; i < size; ++i) {
      if (grid) {
        pts.push_back({(gen() % 6) / 10.0, 1e5 * (1 + gen() % 6)});
      } else {
        pts.push_back({std::uniform_real_distribution<double>(0, 1)(gen),
                       std::uniform_real_distribution<double>(1e4, 1e7)(gen)});
      }
    }
    if (fast_non_dominated_sort(pts) != testing::oracle_fronts(pts)) ++mismatches;
    for (std::size_t n = 0; n <= size; ++n) {
      const auto split = environment_selection(pts, n);
      const std::set<std::size_t> got(split.survivors.begin(), split.survivors.end());
      if (got != testing::oracle_survivors(pts, n)) ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "500 pools, %d mismatches, %.2f s (limit 60 s)", mismatches,
                secs);
  return {mismatches == 0 && secs < 60.0, buf};
}

// Kendall's tau against pair enumeration.
Verdict a2() {
  std::mt19937_64 gen(7);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + static_cast<int>(gen() % 49);
    std::vector<int> a(static_cast<std::size_t>(n));
    std::iota(a.begin(), a.end(), 0);
    std::vector<int> b = a;
    std::shuffle(a.begin(), a.end(), gen);
    std::shuffle(b.begin(), b.end(), gen);
    Ranking ra, rb;
    for (int x : a) ra.push_back(GenomeId{static_cast<std::uint64_t>(x)});
    for (int x : b) rb.push_back(GenomeId{static_cast<std::uint64_t>(x)});
    worst = std::max(worst, std::abs(kendall_tau(ra, rb) - testing::oracle_kendall(a, b)));
  }
  Ranking r;
  for (std::uint64_t i = 0; i < 20; ++i) r.push_back(GenomeId{i});
  Ranking rev(r.rbegin(), r.rend());
  const bool ends = kendall_tau(r, r) == 1.0 && kendall_tau(r, rev) == -1.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |diff| %.3g over 1000 pairs (limit 1e-12), endpoints %s",
                worst, ends ? "ok" : "wrong");
  return {worst <= 1e-12 && ends, buf};
}

// Fidelity ladder in the event log and the micro-run golden transcript.
Verdict a3() {
  RunConfig config;  // Gen=25, MF=6
  auto backend = make_backend(config);
  std::vector<int> ticks;
  int max_level = 0, last = 1;
  bool ok = true;
  run_search(config, *backend, [&](const GenerationRecord& r) {
    if (r.level != last) ticks.push_back(r.generation);
    ok = ok && (r.level == last || r.level == last + 1) && (r.level != last) == r.tick;
    last = r.level;
    max_level = std::max(max_level, r.level);
  });
  const bool ladder = ok && ticks == std::vector<int>{4, 8, 12, 16, 20} && max_level == 6;
  std::ifstream in(std::string(MFNAS_GOLDEN_DIR) + "/micro_run.txt");
  std::stringstream golden;
  golden << in.rdbuf();
  const bool micro = testing::run_micro().transcript == golden.str();
  std::string tick_list;
  for (int g : ticks) tick_list += (tick_list.empty() ? "" : ",") + std::to_string(g);
  return {ladder && micro, "ticks at {" + tick_list + "}, max S " + std::to_string(max_level) +
                               ", micro-run golden " + (micro ? "identical" : "DIFFERS")};
}

struct SeedRun {
  double cost_ratio = 0.0;
  double hv_ratio = 0.0;
  double slowest = 0.0;
};

std::vector<SeedRun> paired_runs() {
  std::vector<SeedRun> runs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunConfig config;
    config.seed = seed;
    config.evaluator = EvaluatorSpec::parse("synthetic:" + std::to_string(seed));
    auto b1 = make_backend(config);
    auto t0 = Clock::now();
    const SearchResult mf = run_search(config, *b1);
    const double t_mf = seconds_since(t0);
    auto b2 = make_backend(config);
    t0 = Clock::now();
    const SearchResult base = run_baseline(config, *b2);
    const double t_base = seconds_since(t0);
    const auto pm = objectives_of(mf.population);
    const auto pb = objectives_of(base.population);
    double scale = 0.0;
    for (const auto& p : pm) scale = std::max(scale, p.params);
    for (const auto& p : pb) scale = std::max(scale, p.params);
    SeedRun r;
    r.cost_ratio = static_cast<double>(mf.total_epochs) / static_cast<double>(base.total_epochs);
    r.hv_ratio = normalized_hypervolume(pm, scale) / normalized_hypervolume(pb, scale);
    r.slowest = std::max(t_mf, t_base);
    runs.push_back(r);
  }
  return runs;
}

Verdict a4(const std::vector<SeedRun>& runs) {
  std::vector<double> ratios;
  double slowest = 0.0;
  for (const auto& r : runs) {
    ratios.push_back(r.cost_ratio);
    slowest = std::max(slowest, r.slowest);
  }
  const double med = median(ratios);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "median epochs(MF)/epochs(baseline) %.4f over 10 seeds (limit 0.35), slowest run "
                "%.2f s (limit 30 s)",
                med, slowest);
  return {med <= 0.35 && slowest < 30.0, buf};
}

Verdict a5(const std::vector<SeedRun>& runs) {
  std::vector<double> ratios;
  for (const auto& r : runs) ratios.push_back(r.hv_ratio);
  const double med = median(ratios);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "median HV(MF)/HV(baseline) %.4f over 10 seeds (limit 0.95)",
                med);
  return {med >= 0.95, buf};
}

Verdict a6() {
  const std::vector<double> taus = ranking_study(200, 25, 0);
  std::vector<double> epochs;
  for (int e = 1; e <= 25; ++e) epochs.push_back(e);
  const double lowest = *std::min_element(taus.begin(), taus.end());
  const double trend = spearman(epochs, taus);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "min tau %.4f (limit > 0.4), Spearman(e, tau) %.4f (limit > 0.9)",
                lowest, trend);
  return {lowest > 0.4 && trend > 0.9, buf};
}

Verdict a7() {
  const std::vector<int> mfs{1, 2, 4, 6, 8, 12};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
  const auto rows = fidelity_sweep(mfs, seeds, RunConfig{});
  std::vector<double> x, reduction, tau;
  std::string table;
  for (const auto& r : rows) {
    x.push_back(r.mf);
    reduction.push_back(r.cost_reduction);
    tau.push_back(r.tau);
    char cell[64];
    std::snprintf(cell, sizeof(cell), " MF%d:%.3f/%.3f", r.mf, r.cost_reduction, r.tau);
    table += cell;
  }
  const double rho_cost = spearman(x, reduction);
  const double rho_tau = spearman(x, tau);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "Spearman(MF, reduction) %.3f (limit < -0.8), Spearman(MF, tau) %.3f (limit > 0.8);",
                rho_cost, rho_tau);
  return {rho_cost < -0.8 && rho_tau > 0.8, std::string(buf) + table};
}

// Encoding round trips and operator outputs under fuzzing.
Verdict a8() {
  std::mt19937_64 gen(99);
  Rng rng(99);
  long failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const Genome g = testing::random_genome(gen, 1, 20);
    if (parse(flatten(g.normal()), CellKind::kNormal) != g.normal()) ++failures;
    if (parse(flatten(g.reduction()), CellKind::kReduction) != g.reduction()) ++failures;
  }
  VariationConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const Genome a = testing::random_genome(gen, 1, 15);
    const Genome b = testing::random_genome(gen, 1, 15);
    const auto [x, y] = inter_cell_crossover(a, b);
    failures += !is_valid(x.normal()) + !is_valid(x.reduction()) + !is_valid(y.normal()) +
                !is_valid(y.reduction());
    const auto [p, q] = intra_cell_crossover(a.normal(), b.normal(), rng);
    failures += !is_valid(p) + !is_valid(q);
    failures += !is_valid(single_point_mutation(a.normal(), cfg, rng));
    const CellGenome grown = add_node_mutation(a.normal(), 20, rng);
    failures += !is_valid(grown);
    const auto old_len = flatten(a.normal()).size();
    if (a.normal().num_nodes() < 20 &&
        flatten(grown).size() != old_len + static_cast<std::size_t>(a.normal().num_nodes()) + 3) {
      ++failures;
    }
    failures += !is_valid(repair(testing::random_raw_cell(gen, 1, 20, CellKind::kNormal), rng));
  }
  return {failures == 0, "10000 round trips x2 cells, 10000 applications per operator, " +
                             std::to_string(failures) + " failures"};
}

// First-two-link-bit density rises with the individual's index.
Verdict a9() {
  const int pop = 20;
  std::vector<double> set(pop, 0.0), total(pop, 0.0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto population = initialize_population(pop, NodeRange{5, 12}, rng);
    for (int i = 0; i < pop; ++i) {
      for (const CellGenome* c : {&population[static_cast<std::size_t>(i)].normal(),
                                  &population[static_cast<std::size_t>(i)].reduction()}) {
        for (const NodeGene& n : c->nodes) {
          set[static_cast<std::size_t>(i)] += n.links[0] + n.links[1];
          total[static_cast<std::size_t>(i)] += 2;
        }
      }
    }
  }
  std::vector<double> index, density;
  for (int i = 0; i < pop; ++i) {
    index.push_back(i + 1);
    density.push_back(set[static_cast<std::size_t>(i)] / total[static_cast<std::size_t>(i)]);
  }
  const double rho = spearman(index, density);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "Spearman(i, density) %.4f (limit > 0.95), density %.3f -> %.3f",
                rho, density.front(), density.back());
  return {rho > 0.95, buf};
}

}  // namespace
}  // namespace mfnas

int main() {
  using mfnas::Verdict;
  int failed = 0;
  auto report = [&](const char* name, const char* title, const Verdict& v) {
    std::printf("%s %s  %s: %s\n", v.pass ? "PASS" : "FAIL", name, title, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  };
  report("A1", "sorting oracle equivalence", mfnas::a1());
  report("A2", "Kendall tau oracle", mfnas::a2());
  report("A3", "fidelity ladder trace", mfnas::a3());
  const auto runs = mfnas::paired_runs();
  report("A4", "cost reduction", mfnas::a4(runs));
  report("A5", "quality parity", mfnas::a5(runs));
  report("A6", "ranking-study shape", mfnas::a6());
  report("A7", "fidelity sweep shape", mfnas::a7());
  report("A8", "encoding/variation fuzz", mfnas::a8());
  report("A9", "initialization diversity", mfnas::a9());
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
