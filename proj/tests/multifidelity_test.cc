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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <numeric>
#include <sstream>
#include <tuple>

#include "mfnas/errors.h"
#include "mfnas/variation.h"
#include "micro_run.h"
#include "test_util.h"

namespace mfnas {
namespace {

Genome with_counters(Genome g, int ss, int ms, int me, std::int64_t params) {
  g.counters = {ss, ms, me};
  return testing::evaluated(std::move(g), 0.5, params);
}

std::string read_golden(const std::string& name) {
  std::ifstream in(std::string(MFNAS_GOLDEN_DIR) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(Counters, RecordEnvSelection) {
  std::mt19937_64 gen(1);
  std::vector<Genome> surv{with_counters(testing::random_genome(gen), 1, 0, 0, 1)};
  std::vector<Genome> elim{with_counters(testing::random_genome(gen), 0, 0, 0, 1),
                           with_counters(testing::random_genome(gen), 0, 0, 2, 1)};
  record_env_selection(surv, elim);
  EXPECT_EQ(surv[0].counters, (Counters{2, 0, 0}));
  EXPECT_EQ(elim[0].counters, (Counters{0, 0, 1}));
  EXPECT_EQ(elim[1].counters, (Counters{0, 0, 2}));
}

TEST(Criteria, HandEvaluatedExamples) {
  std::mt19937_64 gen(2);
  const Genome a = with_counters(testing::random_genome(gen), 3, 2, 1, 2'900'000);
  const Genome b = with_counters(testing::random_genome(gen), 9, 1, 0, 9'000'000);
  EXPECT_EQ(criteria_key(a), (CriteriaKey{1, -3, 3, 2'900'000}));
  EXPECT_EQ(criteria_key(b), (CriteriaKey{1, -1, 9, 9'000'000}));
  std::vector<Genome> v{a, b};
  sort_by_criteria(v);
  EXPECT_EQ(v[0].id(), b.id());

  const Genome big = with_counters(testing::random_genome(gen), 1, 1, 1, 5'000'000);
  const Genome small = with_counters(testing::random_genome(gen), 1, 1, 1, 3'000'000);
  v = {small, big};
  sort_by_criteria(v);
  EXPECT_EQ(v[0].id(), big.id());

  const Genome x = with_counters(testing::random_genome(gen), 1, 1, 1, 4);
  const Genome y = with_counters(testing::random_genome(gen), 1, 1, 1, 4);
  v = {x, y};
  sort_by_criteria(v);
  EXPECT_EQ(v[0].id(), x.id());
  v = {y, x};
  sort_by_criteria(v);
  EXPECT_EQ(v[0].id(), y.id());

  EXPECT_THROW(criteria_key(testing::random_genome(gen)), UnevaluatedGenomeError);
}

TEST(Truncate, SmallUnionAndZeroCapacity) {
  std::mt19937_64 gen(3);
  std::vector<Genome> newcomers{with_counters(testing::random_genome(gen), 0, 0, 1, 10),
                                with_counters(testing::random_genome(gen), 0, 0, 1, 20)};
  auto t = truncate_archive(Archive{{}, 5}, newcomers);
  EXPECT_EQ(t.archive.members.size(), 2u);
  EXPECT_TRUE(t.discarded.empty());
  t = truncate_archive(Archive{{}, 0}, newcomers);
  EXPECT_TRUE(t.archive.members.empty());
  EXPECT_EQ(t.discarded.size(), 2u);
}

TEST(Truncate, MatchesIndependentSort) {
  std::mt19937_64 gen(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Genome> all;
    for (int i = 0; i < 30; ++i) {
      all.push_back(with_counters(testing::random_genome(gen), static_cast<int>(gen() % 4),
                                  static_cast<int>(gen() % 4), static_cast<int>(gen() % 4),
                                  static_cast<std::int64_t>(gen() % 5)));
    }
    Archive archive{{all.begin(), all.begin() + 10}, 20};
    std::vector<Genome> fresh(all.begin() + 10, all.end());
    const auto t = truncate_archive(archive, fresh);
    // Oracle: score each genome by a single comparable tuple, ties by position.
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto score = [&](std::size_t i) {
      const Counters& c = all[i].counters;
      return std::make_tuple(c.ms - c.me, -(c.ms + c.me), c.ss, all[i].evaluation().params);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
    ASSERT_EQ(t.archive.members.size(), 20u);
    for (std::size_t r = 0; r < 20; ++r) EXPECT_EQ(t.archive.members[r].id(), all[order[r]].id());
  }
}

TEST(Tick, Trajectory) {
  FidelityState s{1, 6, 25, 25};
  EXPECT_EQ(s.tick_interval(), 4);
  std::vector<int> ticks;
  for (int g = 1; g <= 25; ++g) {
    const FidelityState next = fidelity_tick(g, s);
    if (next.level != s.level) ticks.push_back(g);
    EXPECT_LE(next.level, 6);
    EXPECT_GE(next.level, s.level);
    s = next;
  }
  EXPECT_EQ(ticks, (std::vector<int>{4, 8, 12, 16, 20}));
  EXPECT_EQ(s.level, 6);
  EXPECT_EQ(fidelity_tick(5, FidelityState{2, 6, 25, 25}).level, 2);
  EXPECT_EQ(fidelity_tick(24, FidelityState{6, 6, 25, 25}).level, 6);
}

TEST(Tick, ConfigGuards) {
  EXPECT_THROW((FidelityState{1, 7, 6, 25}.validate()), ConfigError);
  try {
    FidelityState{1, 7, 6, 25}.validate();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("tick interval would be 0"), std::string::npos);
  }
  EXPECT_THROW((FidelityState{1, 6, 25, 5}.validate()), ConfigError);
  EXPECT_THROW((FidelityState{1, 0, 25, 25}.validate()), ConfigError);
}

TEST(MicroRun, MatchesHandSimulation) {
  EXPECT_EQ(testing::run_micro().transcript, read_golden("micro_run.txt"));
}

TEST(MicroRun, FixtureParameterOrder) {
  const auto run = testing::run_micro();
  auto p = [&](const char* n) { return genome_parameters(run.genomes.at(n)); };
  for (int i = 1; i < 10; ++i) {
    const std::string a = "G" + std::to_string(i), b = "G" + std::to_string(i + 1);
    if (i + 1 <= 8) EXPECT_LT(p(a.c_str()), p(b.c_str()));
  }
  EXPECT_EQ(p("H3"), p("G3"));
  EXPECT_LT(p("G8"), p("H9"));
  EXPECT_LT(p("H9"), p("H10"));
}

// Selection driven by the synthetic evaluator on random populations.
class SyntheticSelection : public ::testing::Test {
 protected:
  SyntheticTrainer trainer{17};
  EvaluationService service{trainer};
};

TEST_F(SyntheticSelection, NonTickKeepsSurvivorsAndBoundsArchive) {
  Rng rng(5);
  auto pop = initialize_population(8, NodeRange{5, 8}, rng);
  auto kids = initialize_population(8, NodeRange{5, 8}, rng);
  service.evaluate_all(pop, 1);
  service.evaluate_all(kids, 1);
  FidelityState st{1, 3, 9, 9};
  auto pool = pop;
  pool.insert(pool.end(), kids.begin(), kids.end());
  const auto expected = environment_selection(pool, 8);
  const auto out = mf_selection(pop, kids, Archive{{}, 3}, 1, st, service);
  EXPECT_FALSE(out.record.tick);
  ASSERT_EQ(out.population.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(out.population[i].id(), expected.survivors[i].id());
  }
  EXPECT_EQ(out.archive.members.size(), 3u);
  for (const Genome& g : out.archive.members) EXPECT_GE(g.counters.me, 1);
  EXPECT_EQ(out.state.level, 1);
}

TEST_F(SyntheticSelection, TickWithEmptyArchiveReRanksSurvivors) {
  Rng rng(6);
  auto pop = initialize_population(6, NodeRange{5, 8}, rng);
  auto kids = initialize_population(6, NodeRange{5, 8}, rng);
  service.evaluate_all(pop, 1);
  service.evaluate_all(kids, 1);
  const std::int64_t before = service.total_epochs();
  FidelityState st{1, 3, 6, 6};  // interval 2
  const auto out = mf_selection(pop, kids, Archive{{}, 0}, 2, st, service);
  EXPECT_TRUE(out.record.tick);
  EXPECT_EQ(out.state.level, 2);
  // Exactly the six survivors were trained one more epoch.
  EXPECT_EQ(service.total_epochs() - before, 6);
  ASSERT_EQ(out.population.size(), 6u);
  for (const Genome& g : out.population) {
    EXPECT_EQ(g.counters.ss, 0);
    EXPECT_EQ(g.counters.ms, 1);
    EXPECT_EQ(g.evaluation().epochs_trained, 2);
  }
  EXPECT_TRUE(out.archive.members.empty());
}

TEST_F(SyntheticSelection, FinalGenerationTrainsToCompleteEpochs) {
  Rng rng(7);
  auto pop = initialize_population(4, NodeRange{5, 8}, rng);
  auto kids = initialize_population(4, NodeRange{5, 8}, rng);
  service.evaluate_all(pop, 2);
  service.evaluate_all(kids, 2);
  FidelityState st{2, 2, 4, 10};
  const auto out = mf_selection(pop, kids, Archive{{}, 4}, 4, st, service);
  EXPECT_TRUE(out.record.final);
  EXPECT_EQ(out.final_scores.size(), 8u);
  for (const Genome& g : out.population) EXPECT_EQ(g.evaluation().epochs_trained, 10);
  for (const Genome& g : out.archive.members) EXPECT_EQ(g.evaluation().epochs_trained, 10);
}

TEST(RecordJson, ArchiveOmittedWhenAbsent) {
  GenerationRecord r;
  r.has_archive = false;
  EXPECT_FALSE(to_json(r).contains("archive"));
  r.has_archive = true;
  EXPECT_TRUE(to_json(r).contains("archive"));
  EXPECT_TRUE(to_json(r).contains("level"));
  EXPECT_TRUE(to_json(r).contains("tick"));
  EXPECT_TRUE(to_json(r).contains("epochs_total"));
}

}  // namespace
}  // namespace mfnas
