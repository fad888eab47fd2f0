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

// Evaluator contract. An EvaluationService owns the checkpoint store and the
// epoch ledger and talks to one TrainerBackend (the deterministic synthetic
// curve model, or an external trainer process).

#ifndef MFNAS_EVALUATION_H_
#define MFNAS_EVALUATION_H_

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfnas/decoder.h"
#include "mfnas/genome.h"

namespace mfnas {

struct EvalRequest {
  GenomeId id;
  std::vector<int> nc;
  std::vector<int> rc;
  nlohmann::json network;  // network_to_json() of the decoded genome
  int target_epochs = 1;
  bool resume = false;
  int trained_epochs = 0;  // epochs held by the checkpoint when resuming
  std::string checkpoint_id;
};

// What a trainer reports. The parameter count is never taken from a trainer.
struct TrainResult {
  double val_error = 1.0;
  int epochs_trained = 0;
  std::string checkpoint_id;
};

class TrainerBackend {
 public:
  virtual ~TrainerBackend() = default;
  virtual TrainResult train(const EvalRequest& request) = 0;
  // Lets the backend drop checkpoint state it holds for `checkpoint_id`.
  virtual void release(const std::string& checkpoint_id) { (void)checkpoint_id; }
};

struct Checkpoint {
  GenomeId genome;
  int epochs = 0;
};

// Checkpoint handles keyed by genome id: "<genome hex>-<serial>", so two
// individuals sharing a genotype still own separate training state.
// Safe for concurrent readers; writers are exclusive.
class CheckpointStore {
 public:
  // Reserves a fresh handle for `genome` without storing anything.
  std::string allocate(GenomeId genome);
  // Stores (or advances) a checkpoint and charges the newly trained epochs.
  void put(const std::string& handle, GenomeId genome, int epochs);
  // Throws CheckpointError for unknown or released handles.
  Checkpoint get(const std::string& handle) const;
  bool contains(const std::string& handle) const;
  void release(const std::string& handle);
  std::size_t live() const;
  // Cumulative simulated epochs charged since construction.
  std::int64_t usage() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, Checkpoint> live_;
  std::uint64_t next_serial_ = 0;
  std::int64_t usage_ = 0;
};

struct LedgerEntry {
  int generation = 0;
  std::string phase;
  GenomeId genome;
  std::string checkpoint_id;
  int from_epochs = 0;
  int to_epochs = 0;

  int charged() const { return to_epochs - from_epochs; }
};

class EvaluationService {
 public:
  EvaluationService(TrainerBackend& backend, NetworkOptions network = {});

  // Trains `genome` to `target_epochs`, resuming from its checkpoint when it
  // holds one, and attaches the result. f2 comes from the local decoder.
  // Throws EvaluationError / ProtocolError from the backend and
  // CheckpointError when a resumable checkpoint has gone missing.
  void evaluate(Genome& genome, int target_epochs);
  void evaluate_all(std::span<Genome> genomes, int target_epochs);

  // Drops the genome's checkpoint (if any) and clears its handle.
  void release(Genome& genome);
  void release_handle(const std::string& checkpoint_id);

  // Labels subsequent ledger entries.
  void set_phase(int generation, std::string phase);

  std::int64_t total_epochs() const { return store_.usage(); }
  const std::vector<LedgerEntry>& ledger() const { return ledger_; }
  const CheckpointStore& checkpoints() const { return store_; }
  const NetworkOptions& network_options() const { return network_; }

 private:
  TrainerBackend& backend_;
  NetworkOptions network_;
  CheckpointStore store_;
  std::vector<LedgerEntry> ledger_;
  int generation_ = 0;
  std::string phase_ = "init";
};

// Coefficients of the synthetic learning curve
//
//   error(e) = a_inf + (a0 - a_inf) * exp(-e / tau) + noise * z(genome, e, seed)
//
// clamped to [0, 1], with z a standard normal draw keyed by (genome, epoch,
// seed) and
//
//   a_inf = floor + params_weight * exp(-P / params_scale)
//                 + depth_weight  * exp(-(D - 1) / depth_scale)
//                 + conv_weight   * (1 - C)
//                 + jitter_weight * u(genome)
//   tau   = tau_base + tau_params * (1 - exp(-P / params_scale))
//                    + tau_jitter * u'(genome)
//
// where P is the parameter count, D the longest input-to-concat chain of the
// normal cell plus that of the reduction cell, C the convolution share of
// normal-cell ops and u, u' uniform [0,1) values hashed from the genome id.
struct CurveCoefficients {
  double a0 = 0.90;
  double floor = 0.03;
  double params_weight = 0.30;
  double params_scale = 3.0e5;
  double depth_weight = 0.08;
  double depth_scale = 4.0;
  double conv_weight = 0.06;
  double jitter_weight = 0.04;
  double tau_base = 8.0;
  double tau_params = 1.5;
  double tau_jitter = 1.5;
  double noise = 0.003;
};

struct CurveFeatures {
  std::int64_t params = 0;
  int depth = 0;
  double conv_share = 0.0;
  double jitter = 0.0;      // u(genome)
  double tau_jitter = 0.0;  // u'(genome)
};

struct CurveParams {
  double a0 = 0.0;
  double a_inf = 0.0;
  double tau = 1.0;
};

// Longest chain of computation nodes from an input to the concat vertex.
int longest_path(const CellGenome& cell);

CurveFeatures curve_features(const Genome& genome, const NetworkOptions& network = {});
CurveParams curve_params(const CurveFeatures& features, const CurveCoefficients& coeffs);
// Standard normal draw keyed by (genome, epoch, seed).
double curve_noise(GenomeId genome, int epoch, std::uint64_t seed);

// Deterministic validation error of `genome` after `epochs` (>= 1) epochs.
double synthetic_error(const Genome& genome, int epochs, std::uint64_t seed,
                       const CurveCoefficients& coeffs = {},
                       const NetworkOptions& network = {});

// Result without checkpoint bookkeeping.
EvalResult synthetic_evaluate(const Genome& genome, int epochs, std::uint64_t seed,
                              const CurveCoefficients& coeffs = {},
                              const NetworkOptions& network = {});

class SyntheticTrainer : public TrainerBackend {
 public:
  explicit SyntheticTrainer(std::uint64_t seed, CurveCoefficients coeffs = {},
                            NetworkOptions network = {})
      : seed_(seed), coeffs_(coeffs), network_(network) {}

  TrainResult train(const EvalRequest& request) override;

  std::uint64_t seed() const { return seed_; }
  const CurveCoefficients& coefficients() const { return coeffs_; }

 private:
  std::uint64_t seed_;
  CurveCoefficients coeffs_;
  NetworkOptions network_;
};

// Wire-protocol records (newline-delimited JSON). Field names are fixed.
nlohmann::json make_hello_record();
nlohmann::json make_request_record(const EvalRequest& request);
// Validates a response against `request`. Throws ProtocolError naming the
// offending field, or EvaluationError for an error record.
TrainResult parse_response_record(const nlohmann::json& record, const EvalRequest& request);

struct ExternalTrainerOptions {
  std::string command;        // run through /bin/sh -c
  double timeout_seconds = 3600.0;
};

// Drives one trainer process over its standard streams: a hello handshake,
// then one request line and one response line per evaluation. A response
// whose id does not match is answered by resending the request once.
class ExternalTrainer : public TrainerBackend {
 public:
  explicit ExternalTrainer(ExternalTrainerOptions options);
  ~ExternalTrainer() override;
  ExternalTrainer(const ExternalTrainer&) = delete;
  ExternalTrainer& operator=(const ExternalTrainer&) = delete;

  TrainResult train(const EvalRequest& request) override;

  // Exit status of the trainer once it has terminated, -1 while running.
  int exit_status() const { return exit_status_; }

 private:
  void spawn();
  void handshake();
  void send_line(const std::string& line, const std::string& genome);
  std::string read_line(const std::string& genome);
  [[noreturn]] void fail(const std::string& genome, const std::string& what);
  void reap(bool force);

  ExternalTrainerOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int exit_status_ = -1;
  std::string buffer_;
};

// Parses "synthetic:<seed>" or "exec:<command line>".
struct EvaluatorSpec {
  enum class Kind { kSynthetic, kExternal } kind = Kind::kSynthetic;
  std::uint64_t seed = 0;
  std::string command;

  static EvaluatorSpec parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace mfnas

#endif  // MFNAS_EVALUATION_H_
