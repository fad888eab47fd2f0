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

// Desk-scale stand-in for real training: a saturating learning curve whose
// asymptote rewards larger, deeper, convolution-heavy cells.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfnas/errors.h"
#include "mfnas/evaluation.h"
#include "mfnas/rng.h"

namespace mfnas {
namespace {

double genome_uniform(GenomeId id, std::uint64_t salt) {
  return to_unit(mix64(id.value ^ mix64(salt)));
}

}  // namespace

int longest_path(const CellGenome& cell) {
  std::vector<int> depth(cell.nodes.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < cell.nodes.size(); ++k) {
    int d = 1;
    const auto& links = cell.nodes[k].links;
    for (std::size_t v = 2; v < links.size(); ++v) {
      if (links[v]) d = std::max(d, depth[v - 2] + 1);
    }
    depth[k] = d;
    best = std::max(best, d);
  }
  return best;
}

CurveFeatures curve_features(const Genome& genome, const NetworkOptions& network) {
  CurveFeatures f;
  f.params = genome_parameters(genome, network);
  f.depth = longest_path(genome.normal()) + longest_path(genome.reduction());
  const auto& nodes = genome.normal().nodes;
  const auto convs = std::count_if(nodes.begin(), nodes.end(),
                                   [](const NodeGene& n) { return is_convolution(n.op); });
  f.conv_share = nodes.empty() ? 0.0 : static_cast<double>(convs) / nodes.size();
  f.jitter = genome_uniform(genome.id(), 1);
  f.tau_jitter = genome_uniform(genome.id(), 2);
  return f;
}

CurveParams curve_params(const CurveFeatures& f, const CurveCoefficients& c) {
  const double size_term = std::exp(-static_cast<double>(f.params) / c.params_scale);
  CurveParams p;
  p.a0 = c.a0;
  p.a_inf = c.floor + c.params_weight * size_term +
            c.depth_weight * std::exp(-(f.depth - 1) / c.depth_scale) +
            c.conv_weight * (1.0 - f.conv_share) + c.jitter_weight * f.jitter;
  p.tau = c.tau_base + c.tau_params * (1.0 - size_term) + c.tau_jitter * f.tau_jitter;
  return p;
}

double curve_noise(GenomeId genome, int epoch, std::uint64_t seed) {
  // Box-Muller on two hashed uniforms.
  const std::uint64_t key =
      mix64(genome.value ^ mix64(seed ^ mix64(static_cast<std::uint64_t>(epoch))));
  const double u1 = 1.0 - to_unit(mix64(key));  // (0, 1]
  const double u2 = to_unit(mix64(key ^ 0x5851f42d4c957f2dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double synthetic_error(const Genome& genome, int epochs, std::uint64_t seed,
                       const CurveCoefficients& coeffs, const NetworkOptions& network) {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  const CurveParams p = curve_params(curve_features(genome, network), coeffs);
  const double clean = p.a_inf + (p.a0 - p.a_inf) * std::exp(-epochs / p.tau);
  const double noisy = clean + coeffs.noise * curve_noise(genome.id(), epochs, seed);
  return std::clamp(noisy, 0.0, 1.0);
}

EvalResult synthetic_evaluate(const Genome& genome, int epochs, std::uint64_t seed,
                              const CurveCoefficients& coeffs, const NetworkOptions& network) {
  EvalResult r;
  r.val_error = synthetic_error(genome, epochs, seed, coeffs, network);
  r.params = genome_parameters(genome, network);
  r.epochs_trained = epochs;
  return r;
}

TrainResult SyntheticTrainer::train(const EvalRequest& request) {
  const Genome genome(parse(request.nc, CellKind::kNormal),
                      parse(request.rc, CellKind::kReduction));
  TrainResult r;
  r.val_error = synthetic_error(genome, request.target_epochs, seed_, coeffs_, network_);
  r.epochs_trained = request.target_epochs;
  r.checkpoint_id = request.checkpoint_id;
  return r;
}

}  // namespace mfnas
