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

#include "mfnas/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "mfnas/decoder.h"
#include "mfnas/errors.h"
#include "mfnas/moea.h"
#include "mfnas/search.h"
#include "mfnas/variation.h"

namespace mfnas {
namespace {

// Inversions of `v`, counted while merge-sorting it.
std::int64_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& tmp,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t inv = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      tmp[k++] = v[i++];
    } else {
      inv += static_cast<std::int64_t>(mid - i);
      tmp[k++] = v[j++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string csv_quote(const std::string& s) { return '"' + s + '"'; }

}  // namespace

Ranking make_ranking(std::span<const ScoredGenome> scores) {
  std::vector<ScoredGenome> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredGenome& a, const ScoredGenome& b) {
                     return a.error != b.error ? a.error < b.error : a.id < b.id;
                   });
  Ranking ranking;
  std::set<GenomeId> seen;
  for (const ScoredGenome& s : sorted) {
    if (seen.insert(s.id).second) ranking.push_back(s.id);
  }
  return ranking;
}

double kendall_tau(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) throw InputError("rankings have different lengths");
  if (a.size() < 2) throw InputError("kendall tau needs at least two items");
  std::unordered_map<std::uint64_t, std::size_t> position;
  position.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!position.emplace(b[i].value, i).second) {
      throw InputError("ranking holds duplicate id " + b[i].hex());
    }
  }
  // Positions in b, listed in a's order; inversions are discordant pairs.
  std::vector<std::size_t> seq;
  seq.reserve(a.size());
  std::set<std::uint64_t> seen;
  for (const GenomeId& id : a) {
    const auto it = position.find(id.value);
    if (it == position.end() || !seen.insert(id.value).second) {
      throw InputError("rankings hold different ids (" + id.hex() + ")");
    }
    seq.push_back(it->second);
  }
  std::vector<std::size_t> tmp(seq.size());
  const std::int64_t discordant = count_inversions(seq, tmp, 0, seq.size());
  const double n = static_cast<double>(a.size());
  const double pairs = n * (n - 1.0) / 2.0;
  return (pairs - 2.0 * static_cast<double>(discordant)) / pairs;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("spearman needs two equally long series of at least two values");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranking_study(int n_arch, int max_epochs, std::uint64_t seed,
                                  const CurveCoefficients& coeffs) {
  if (n_arch < 2 || max_epochs < 1) {
    throw InputError("ranking study needs at least 2 architectures and 1 epoch");
  }
  Rng rng = Rng(seed).substream("rank-study");
  const std::vector<Genome> sample = initialize_population(n_arch, NodeRange{5, 12}, rng);
  auto ranking_at = [&](int epoch) {
    std::vector<ScoredGenome> scores;
    scores.reserve(sample.size());
    for (const Genome& g : sample) {
      scores.push_back({g.id(), synthetic_error(g, epoch, seed, coeffs)});
    }
    return make_ranking(scores);
  };
  const Ranking final_ranking = ranking_at(max_epochs);
  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(max_epochs));
  for (int e = 1; e <= max_epochs; ++e) taus.push_back(kendall_tau(ranking_at(e), final_ranking));
  return taus;
}

std::vector<SweepRow> fidelity_sweep(std::span<const int> mf_values,
                                     std::span<const std::uint64_t> seeds,
                                     const RunConfig& base) {
  std::vector<double> baseline_cost;
  for (std::uint64_t seed : seeds) {
    RunConfig config = base;
    config.seed = seed;
    config.evaluator = EvaluatorSpec{EvaluatorSpec::Kind::kSynthetic, seed, {}};
    auto backend = make_backend(config);
    baseline_cost.push_back(static_cast<double>(run_baseline(config, *backend).total_epochs));
  }
  std::vector<SweepRow> rows;
  for (int mf : mf_values) {
    std::vector<double> ratios, taus;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      RunConfig config = base;
      config.mf = mf;
      config.seed = seeds[s];
      config.evaluator = EvaluatorSpec{EvaluatorSpec::Kind::kSynthetic, seeds[s], {}};
      auto backend = make_backend(config);
      const SearchResult result = run_search(config, *backend);
      ratios.push_back(static_cast<double>(result.total_epochs) / baseline_cost[s]);
      std::vector<ScoredGenome> fidelity, complete;
      for (const FinalScore& f : result.final_scores) {
        fidelity.push_back({f.id, f.fidelity_error});
        complete.push_back({f.id, f.complete_error});
      }
      const Ranking a = make_ranking(fidelity);
      const Ranking b = make_ranking(complete);
      if (a.size() >= 2) taus.push_back(kendall_tau(a, b));
    }
    SweepRow row;
    row.mf = mf;
    row.cost_ratio = median(ratios);
    row.cost_reduction = 1.0 - row.cost_ratio;
    row.tau = median(taus);
    rows.push_back(row);
  }
  return rows;
}

void export_front(std::span<const Genome> population, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "dot", ec);
  if (ec) throw IoError("cannot create " + (dir / "dot").string() + ": " + ec.message());

  const std::vector<ObjectiveVector> points = objectives_of(population);
  const std::vector<int> fronts = fast_non_dominated_sort(points);
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].error != points[b].error) return points[a].error < points[b].error;
    return points[a].params < points[b].params;
  });

  std::ofstream csv(dir / "front.csv");
  if (!csv) throw IoError("cannot write " + (dir / "front.csv").string());
  csv << "id,val_error,params,front,nc,rc\n";
  for (std::size_t i : order) {
    const Genome& g = population[i];
    char err[32];
    std::snprintf(err, sizeof(err), "%.6f", points[i].error);
    csv << g.id().hex() << ',' << err << ',' << g.evaluation().params << ',' << fronts[i]
        << ',' << csv_quote(to_text(g.normal())) << ',' << csv_quote(to_text(g.reduction()))
        << '\n';
    if (fronts[i] != 1) continue;
    std::ofstream dot(dir / "dot" / (g.id().hex() + ".dot"));
    if (!dot) throw IoError("cannot write DOT file for " + g.id().hex());
    dot << to_dot(g);
  }
  if (!csv) throw IoError("write to " + (dir / "front.csv").string() + " failed");
}

}  // namespace mfnas
