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

#include "mfnas/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <atomic>
#include <thread>

#include "mfnas/errors.h"
#include "mfnas/variation.h"
#include "micro_run.h"
#include "test_util.h"

namespace mfnas {
namespace {

TEST(CheckpointStore, PutGetRelease) {
  CheckpointStore store;
  const GenomeId id{0x1234};
  const std::string h = store.allocate(id);
  EXPECT_EQ(h.rfind(id.hex() + "-", 0), 0u);
  EXPECT_FALSE(store.contains(h));
  store.put(h, id, 2);
  EXPECT_EQ(store.get(h).genome, id);
  EXPECT_EQ(store.get(h).epochs, 2);
  store.put(h, id, 5);
  EXPECT_EQ(store.usage(), 5);
  EXPECT_EQ(store.live(), 1u);
  store.release(h);
  EXPECT_THROW(store.get(h), CheckpointError);
  EXPECT_EQ(store.live(), 0u);
  EXPECT_EQ(store.usage(), 5);
  EXPECT_NE(store.allocate(id), h);
}

TEST(CheckpointStore, ConcurrentReaders) {
  CheckpointStore store;
  std::vector<std::string> handles;
  for (std::uint64_t i = 0; i < 64; ++i) {
    handles.push_back(store.allocate(GenomeId{i}));
    store.put(handles.back(), GenomeId{i}, 1);
  }
  std::vector<std::thread> readers;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      for (const auto& h : handles) ok += store.get(h).epochs == 1;
    });
  }
  for (auto& th : readers) th.join();
  EXPECT_EQ(ok.load(), 256);
}

TEST(Service, ResumeChargesOnlyNewEpochs) {
  SyntheticTrainer trainer(1);
  EvaluationService service(trainer);
  std::mt19937_64 gen(1);
  Genome g = testing::random_genome(gen, 5, 8);
  service.evaluate(g, 1);
  EXPECT_EQ(service.total_epochs(), 1);
  service.evaluate(g, 3);
  EXPECT_EQ(service.total_epochs(), 3);
  ASSERT_EQ(service.ledger().size(), 2u);
  EXPECT_EQ(service.ledger()[1].from_epochs, 1);
  EXPECT_EQ(service.ledger()[1].to_epochs, 3);
  EXPECT_EQ(service.ledger()[1].charged(), 2);
  service.evaluate(g, 3);  // already there
  EXPECT_EQ(service.total_epochs(), 3);
  EXPECT_THROW(service.evaluate(g, 2), CheckpointError);
}

TEST(Service, ParamsComeFromDecoder) {
  SyntheticTrainer trainer(2);
  EvaluationService service(trainer);
  std::mt19937_64 gen(2);
  for (int i = 0; i < 20; ++i) {
    Genome g = testing::random_genome(gen);
    service.evaluate(g, 1);
    EXPECT_EQ(g.evaluation().params, count_parameters(assemble_network(g)));
    EXPECT_EQ(g.evaluation().epochs_trained, 1);
  }
}

TEST(Service, ReleasedCheckpointCannotResume) {
  SyntheticTrainer trainer(3);
  EvaluationService service(trainer);
  std::mt19937_64 gen(3);
  Genome g = testing::random_genome(gen);
  service.evaluate(g, 1);
  Genome copy = g;
  service.release(g);
  EXPECT_TRUE(g.evaluation().checkpoint_id.empty());
  EXPECT_THROW(service.evaluate(copy, 2), CheckpointError);
  // Without a handle the genome trains from scratch.
  service.evaluate(g, 2);
  EXPECT_EQ(service.total_epochs(), 3);
}

TEST(Service, LedgerSumsToUsage) {
  SyntheticTrainer trainer(4);
  EvaluationService service(trainer);
  Rng rng(4);
  auto pop = initialize_population(10, NodeRange{5, 12}, rng);
  service.evaluate_all(pop, 1);
  service.evaluate_all(pop, 4);
  service.evaluate_all(pop, 4);
  std::int64_t sum = 0;
  for (const auto& e : service.ledger()) sum += e.charged();
  EXPECT_EQ(sum, service.total_epochs());
  EXPECT_EQ(sum, 40);
}

TEST(Synthetic, Deterministic) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    const Genome g = testing::random_genome(gen);
    EXPECT_EQ(synthetic_evaluate(g, 7, 99), synthetic_evaluate(g, 7, 99));
    const double e = synthetic_error(g, 7, 99);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
  }
}

TEST(Synthetic, NoiselessCurveClosedForm) {
  CurveCoefficients c;
  c.noise = 0.0;
  std::mt19937_64 gen(6);
  for (int i = 0; i < 50; ++i) {
    const Genome g = testing::random_genome(gen);
    const CurveFeatures f = curve_features(g);
    // Independent evaluation of the documented formula.
    const double size = std::exp(-static_cast<double>(f.params) / c.params_scale);
    const double a_inf = c.floor + c.params_weight * size +
                         c.depth_weight * std::exp(-(f.depth - 1.0) / c.depth_scale) +
                         c.conv_weight * (1.0 - f.conv_share) + c.jitter_weight * f.jitter;
    const double tau = c.tau_base + c.tau_params * (1.0 - size) + c.tau_jitter * f.tau_jitter;
    for (int e : {1, 3, 10, 25}) {
      EXPECT_NEAR(synthetic_error(g, e, 0, c), a_inf + (c.a0 - a_inf) * std::exp(-e / tau),
                  1e-12);
    }
    EXPECT_NEAR(synthetic_error(g, 100000, 0, c), a_inf, 1e-12);
    for (int e = 1; e < 25; ++e) EXPECT_LT(synthetic_error(g, e + 1, 0, c), synthetic_error(g, e, 0, c));
  }
}

TEST(Synthetic, FeatureExamples) {
  const Genome g(testing::seven_node_cell(), testing::seven_node_cell());
  const CurveFeatures f = curve_features(g);
  EXPECT_EQ(f.params, genome_parameters(g));
  // Node 6 <- node 4 <- node 1 is the longest chain: 3 nodes.
  EXPECT_EQ(longest_path(testing::seven_node_cell()), 3);
  EXPECT_EQ(f.depth, 6);
  // Ops 2,1,6,2,3,9,4: five convolutions out of seven.
  EXPECT_DOUBLE_EQ(f.conv_share, 5.0 / 7.0);
}

TEST(Synthetic, NoiseIsStandardNormal) {
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = curve_noise(GenomeId{static_cast<std::uint64_t>(i) * 7919}, i % 25 + 1, 3);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.03);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(EvaluatorSpec, ParseAndPrint) {
  const auto s = EvaluatorSpec::parse("synthetic:42");
  EXPECT_EQ(s.kind, EvaluatorSpec::Kind::kSynthetic);
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.to_string(), "synthetic:42");
  const auto x = EvaluatorSpec::parse("exec:python3 trainer.py --fast");
  EXPECT_EQ(x.kind, EvaluatorSpec::Kind::kExternal);
  EXPECT_EQ(x.command, "python3 trainer.py --fast");
  EXPECT_THROW(EvaluatorSpec::parse("synthetic:"), ConfigError);
  EXPECT_THROW(EvaluatorSpec::parse("gpu:0"), ConfigError);
  EXPECT_THROW(EvaluatorSpec::parse("exec:"), ConfigError);
}

}  // namespace
}  // namespace mfnas
