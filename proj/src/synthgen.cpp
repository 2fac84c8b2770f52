// src/synthgen.cpp

// Copyright 2026  pldanorm authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pldanorm/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace pldanorm {

namespace {

std::string pad_num(long v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

LabeledDataset sample_dataset(const SynthConfig &cfg) {
  cfg.truth.validate();
  if (cfg.n_speakers < 1) throw InvalidInput("n_speakers must be >= 1");
  if (cfg.vpk_min < 1 || cfg.vpk_max < cfg.vpk_min)
    throw InvalidInput("vectors per speaker must satisfy 1 <= min <= max");

  const int d = cfg.truth.d;
  const int f = cfg.truth.f;
  const int g = cfg.truth.g;

  // Counts first so row offsets are known before the parallel fill.  The
  // count draw and the content draw use separate derived streams, so content
  // never depends on how many values the count consumed.
  std::vector<int> counts(cfg.n_speakers);
  for (int s = 0; s < cfg.n_speakers; ++s) {
    if (cfg.vpk_min == cfg.vpk_max) {
      counts[s] = cfg.vpk_min;
    } else {
      std::mt19937_64 rng(derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(s)));
      counts[s] = std::uniform_int_distribution<int>(cfg.vpk_min, cfg.vpk_max)(rng);
    }
  }
  std::vector<int> offsets(cfg.n_speakers + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), offsets.begin() + 1);
  const int n_total = offsets.back();

  LabeledDataset data;
  data.X = Matrix(n_total, d);
  data.speakers.resize(n_total);
  data.ids.resize(n_total);

  parallel_chunks(cfg.n_speakers, cfg.num_threads,
                  [&](std::size_t /*chunk*/, std::size_t begin, std::size_t end) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t s = begin; s < end; ++s) {
      std::mt19937_64 rng(derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(s) + 1));
      const std::string spk = cfg.speaker_prefix + "_" + pad_num(static_cast<long>(s), 5);
      Vector x(f);
      for (int i = 0; i < f; ++i) x(i) = gauss(rng);
      const Vector fx = cfg.truth.m + cfg.truth.F * x;
      for (int v = 0; v < counts[s]; ++v) {
        Vector row = fx;
        if (g > 0) {
          Vector y(g);
          for (int i = 0; i < g; ++i) y(i) = gauss(rng);
          row += cfg.truth.G * y;
        }
        for (int i = 0; i < d; ++i) row(i) += std::sqrt(cfg.truth.Sigma(i)) * gauss(rng);
        const int r = offsets[s] + v;
        data.X.row(r) = row;
        data.speakers[r] = spk;
        data.ids[r] = spk + "_v" + pad_num(v, 3);
      }
    }
  });
  data.build_index();
  return data;
}

PldaParameters make_truth_model(int d, int f, int g, std::uint64_t seed,
                                double f_scale, double g_scale,
                                double sigma_min, double sigma_max) {
  if (d <= 0 || f < 1 || f > d || g < 0 || g > d)
    throw InvalidInput("invalid truth model dimensions");
  if (!(sigma_min > 0.0) || sigma_max < sigma_min)
    throw InvalidInput("sigma range must satisfy 0 < min <= max");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(sigma_min, sigma_max);

  PldaParameters p;
  p.d = d;
  p.f = f;
  p.g = g;
  p.m = Vector(d);
  for (int i = 0; i < d; ++i) p.m(i) = 0.5 * gauss(rng);
  p.F = Matrix(d, f);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < f; ++j) p.F(i, j) = f_scale * gauss(rng);
  p.G = Matrix(d, g);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < g; ++j) p.G(i, j) = g_scale * gauss(rng);
  p.Sigma = Vector(d);
  for (int i = 0; i < d; ++i) p.Sigma(i) = unif(rng);
  p.validate();
  return p;
}

EnrollmentConditionSpec uniform_condition(int L, int n_speakers) {
  if (L < 1) throw InvalidInput("enrollment size L must be >= 1");
  if (n_speakers < 1) throw InvalidInput("n_speakers must be >= 1");
  EnrollmentConditionSpec spec;
  spec.name = "L" + std::to_string(L);
  spec.buckets.push_back({L, n_speakers});
  return spec;
}

EnrollmentConditionSpec mixed_condition(int n_speakers) {
  if (n_speakers < 1) throw InvalidInput("n_speakers must be >= 1");
  static const int base[5] = {94, 93, 194, 189, 113};
  static const int base_total = 683;

  EnrollmentConditionSpec spec;
  spec.name = "mixed";
  std::vector<int> sizes(5, 0);
  if (n_speakers == base_total) {
    for (int i = 0; i < 5; ++i) sizes[i] = base[i];
  } else {
    // Largest-remainder rounding of the base proportions.
    std::vector<double> frac(5);
    int assigned = 0;
    for (int i = 0; i < 5; ++i) {
      const double quota = static_cast<double>(n_speakers) * base[i] / base_total;
      sizes[i] = static_cast<int>(std::floor(quota));
      frac[i] = quota - sizes[i];
      assigned += sizes[i];
    }
    std::vector<int> order = {0, 1, 2, 3, 4};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (int k = 0; k < n_speakers - assigned; ++k) ++sizes[order[k]];
  }
  for (int i = 0; i < 5; ++i) spec.buckets.push_back({i + 1, sizes[i]});
  return spec;
}

EnrollmentCondition build_conditions(const LabeledDataset &models,
                                     const EnrollmentConditionSpec &spec,
                                     std::uint64_t seed, int reserve) {
  if (models.X.rows() == 0) throw InvalidInput("model set is empty");
  if (static_cast<Eigen::Index>(models.speakers.size()) != models.X.rows())
    throw InvalidInput("speaker label count does not match the number of vectors");
  if (spec.buckets.empty()) throw InvalidInput("condition spec has no buckets");

  int max_L = 0;
  int n_enrolled = 0;
  for (const auto &b : spec.buckets) {
    if (b.L < 1) throw InvalidInput("bucket enrollment size must be >= 1");
    if (b.n_speakers < 0) throw InvalidInput("bucket speaker count must be >= 0");
    max_L = std::max(max_L, b.L);
    n_enrolled += b.n_speakers;
  }
  if (reserve < 0) reserve = max_L;
  if (max_L > reserve)
    throw InvalidInput("bucket enrollment size exceeds the reserved pool");

  // Group rows by speaker in first-seen order.
  std::unordered_map<std::string, int> index;
  std::vector<std::string> speaker_ids;
  std::vector<std::vector<int>> rows_by_speaker;
  for (int r = 0; r < static_cast<int>(models.speakers.size()); ++r) {
    auto [it, inserted] = index.emplace(models.speakers[r],
                                        static_cast<int>(rows_by_speaker.size()));
    if (inserted) {
      rows_by_speaker.emplace_back();
      speaker_ids.push_back(models.speakers[r]);
    }
    rows_by_speaker[it->second].push_back(r);
  }
  const int n_speakers = static_cast<int>(speaker_ids.size());
  if (n_enrolled > n_speakers)
    throw InvalidInput("condition needs " + std::to_string(n_enrolled) +
                       " speakers; the model set has " + std::to_string(n_speakers));
  for (int s = 0; s < n_speakers; ++s) {
    if (static_cast<int>(rows_by_speaker[s].size()) < reserve + 1)
      throw InvalidInput("speaker " + speaker_ids[s] + " has " +
                         std::to_string(rows_by_speaker[s].size()) +
                         " vectors; needs at least " + std::to_string(reserve + 1));
  }

  std::vector<int> shuffled(n_speakers);
  std::iota(shuffled.begin(), shuffled.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, 0x636f6e64ULL));
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  EnrollmentCondition cond;
  cond.name = spec.name;
  int cursor = 0;
  for (const auto &b : spec.buckets) {
    for (int k = 0; k < b.n_speakers; ++k) {
      const int s = shuffled[cursor++];
      const auto &rows = rows_by_speaker[s];
      Enrollment e;
      e.speaker_id = speaker_ids[s];
      e.L = b.L;
      e.i_sum = Vector::Zero(models.X.cols());
      for (int j = 0; j < b.L; ++j) e.i_sum += models.X.row(rows[j]);
      cond.enrollments.push_back(std::move(e));
    }
  }

  // Tests: every vector past the pool, for all speakers, in dataset order.
  std::vector<int> test_rows;
  for (int s = 0; s < n_speakers; ++s)
    for (std::size_t j = reserve; j < rows_by_speaker[s].size(); ++j)
      test_rows.push_back(rows_by_speaker[s][j]);
  cond.test_vectors = Matrix(static_cast<Eigen::Index>(test_rows.size()), models.X.cols());
  cond.test_ids.reserve(test_rows.size());
  cond.test_speakers.reserve(test_rows.size());
  for (std::size_t k = 0; k < test_rows.size(); ++k) {
    const int r = test_rows[k];
    cond.test_vectors.row(static_cast<Eigen::Index>(k)) = models.X.row(r);
    cond.test_ids.push_back(models.ids.empty() ? "row_" + std::to_string(r)
                                               : models.ids[r]);
    cond.test_speakers.push_back(models.speakers[r]);
  }
  return cond;
}

}  // namespace pldanorm
