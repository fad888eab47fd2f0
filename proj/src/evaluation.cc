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

#include <mutex>

#include "mfnas/errors.h"

namespace mfnas {

std::string CheckpointStore::allocate(GenomeId genome) {
  std::unique_lock lock(mu_);
  return genome.hex() + "-" + std::to_string(next_serial_++);
}

void CheckpointStore::put(const std::string& handle, GenomeId genome, int epochs) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = live_.try_emplace(handle, Checkpoint{genome, 0});
  if (!inserted && it->second.genome != genome) {
    throw CheckpointError("checkpoint " + handle + " belongs to another genome");
  }
  if (epochs < it->second.epochs) {
    throw CheckpointError("checkpoint " + handle + " cannot go back from " +
                          std::to_string(it->second.epochs) + " to " +
                          std::to_string(epochs) + " epochs");
  }
  usage_ += epochs - it->second.epochs;
  it->second.epochs = epochs;
}

Checkpoint CheckpointStore::get(const std::string& handle) const {
  std::shared_lock lock(mu_);
  const auto it = live_.find(handle);
  if (it == live_.end()) throw CheckpointError("missing checkpoint " + handle);
  return it->second;
}

bool CheckpointStore::contains(const std::string& handle) const {
  std::shared_lock lock(mu_);
  return live_.count(handle) != 0;
}

void CheckpointStore::release(const std::string& handle) {
  std::unique_lock lock(mu_);
  live_.erase(handle);
}

std::size_t CheckpointStore::live() const {
  std::shared_lock lock(mu_);
  return live_.size();
}

std::int64_t CheckpointStore::usage() const {
  std::shared_lock lock(mu_);
  return usage_;
}

EvaluationService::EvaluationService(TrainerBackend& backend, NetworkOptions network)
    : backend_(backend), network_(network) {}

void EvaluationService::set_phase(int generation, std::string phase) {
  generation_ = generation;
  phase_ = std::move(phase);
}

void EvaluationService::evaluate(Genome& genome, int target_epochs) {
  if (target_epochs < 1) {
    throw ConfigError("target epochs must be at least 1, got " + std::to_string(target_epochs));
  }
  EvalRequest request;
  request.id = genome.id();
  request.target_epochs = target_epochs;
  const bool holds_checkpoint = genome.eval && !genome.eval->checkpoint_id.empty();
  if (holds_checkpoint) {
    const Checkpoint ckpt = store_.get(genome.eval->checkpoint_id);
    if (ckpt.epochs == target_epochs) return;
    if (ckpt.epochs > target_epochs) {
      throw CheckpointError("genome " + genome.id().hex() + " already trained " +
                            std::to_string(ckpt.epochs) + " epochs, asked for " +
                            std::to_string(target_epochs));
    }
    request.resume = true;
    request.trained_epochs = ckpt.epochs;
    request.checkpoint_id = genome.eval->checkpoint_id;
  } else {
    request.checkpoint_id = store_.allocate(genome.id());
  }
  request.nc = flatten(genome.normal());
  request.rc = flatten(genome.reduction());
  const NetworkSpec spec = assemble_network(genome, network_);
  request.network = network_to_json(spec);

  const TrainResult trained = backend_.train(request);
  if (trained.epochs_trained != target_epochs) {
    throw ProtocolError("trainer reported " + std::to_string(trained.epochs_trained) +
                        " epochs for a request of " + std::to_string(target_epochs));
  }
  store_.put(request.checkpoint_id, genome.id(), target_epochs);
  ledger_.push_back({generation_, phase_, genome.id(), request.checkpoint_id,
                     request.trained_epochs, target_epochs});

  EvalResult result;
  result.val_error = trained.val_error;
  result.params = count_parameters(spec);
  result.epochs_trained = target_epochs;
  result.checkpoint_id = request.checkpoint_id;
  genome.eval = std::move(result);
}

void EvaluationService::evaluate_all(std::span<Genome> genomes, int target_epochs) {
  for (Genome& g : genomes) evaluate(g, target_epochs);
}

void EvaluationService::release_handle(const std::string& checkpoint_id) {
  if (checkpoint_id.empty() || !store_.contains(checkpoint_id)) return;
  store_.release(checkpoint_id);
  backend_.release(checkpoint_id);
}

void EvaluationService::release(Genome& genome) {
  if (!genome.eval) return;
  release_handle(genome.eval->checkpoint_id);
  genome.eval->checkpoint_id.clear();
}

EvaluatorSpec EvaluatorSpec::parse(const std::string& text) {
  EvaluatorSpec spec;
  if (text.rfind("synthetic:", 0) == 0) {
    const std::string digits = text.substr(10);
    std::size_t used = 0;
    try {
      spec.seed = std::stoull(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (digits.empty() || used != digits.size()) {
      throw ConfigError("bad synthetic seed in '" + text + "'");
    }
    spec.kind = Kind::kSynthetic;
    return spec;
  }
  if (text.rfind("exec:", 0) == 0 && text.size() > 5) {
    spec.kind = Kind::kExternal;
    spec.command = text.substr(5);
    return spec;
  }
  throw ConfigError("evaluator must be 'synthetic:<seed>' or 'exec:<command>', got '" +
                    text + "'");
}

std::string EvaluatorSpec::to_string() const {
  return kind == Kind::kSynthetic ? "synthetic:" + std::to_string(seed) : "exec:" + command;
}

}  // namespace mfnas
