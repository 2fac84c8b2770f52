// pldanorm/training.hpp

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

#ifndef PLDANORM_TRAINING_HPP_
#define PLDANORM_TRAINING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pldanorm/common.hpp"
#include "pldanorm/plda_model.hpp"

namespace pldanorm {

/// Training corpus: one row of X per i-vector, speakers[r] names the speaker
/// of row r.  Rows of the same speaker need not be contiguous.
struct LabeledDataset {
  Matrix X;                           // num_vectors x dim
  std::vector<std::string> speakers;  // one entry per row of X
  std::vector<std::string> ids;       // optional per-row vector ids (empty or one per row)

  // Grouping index, filled by build_index():
  std::vector<std::string> speaker_ids;        // distinct speakers, first-seen order
  std::vector<std::vector<int>> speaker_rows;  // rows of X per distinct speaker

  /// Rebuilds speaker_ids / speaker_rows from speakers.  Throws InvalidInput
  /// if speakers.size() != X.rows().
  void build_index();

  int dim() const { return static_cast<int>(X.cols()); }
  int num_vectors() const { return static_cast<int>(X.rows()); }
  int num_speakers() const { return static_cast<int>(speaker_ids.size()); }
};

struct EmConfig {
  int iters = 50;             // maximum EM iterations
  std::uint64_t seed = 0;     // reserved; initialization is data-deterministic
  double rel_tol = 1e-6;      // early exit when relative log-likelihood gain drops below
  int num_threads = 1;
};

struct EmResult {
  PldaParameters params;
  // log_likelihood_history[k] is the total data log-likelihood under the
  // parameters entering iteration k; the last entry is the final model.
  // Exact EM guarantees this sequence is nondecreasing.
  std::vector<double> log_likelihood_history;
  int iters_run = 0;
};

/// Fits a two-factor model with f speaker dimensions and g channel dimensions
/// by maximum-likelihood EM.  The mean m is the sample mean of the data and is
/// fixed; F starts from the leading eigenpairs of the corrected between
/// speaker scatter, G and Sigma from a split of the within-speaker scatter.
/// g = 0 is allowed and drops the channel term.
///
/// Throws InvalidInput for f < 1, f > dim, g < 0, g > dim, fewer than two
/// distinct speakers, or an empty dataset.
EmResult em_fit(const LabeledDataset &data, int f, int g, const EmConfig &cfg = EmConfig());

/// Total log-likelihood of the dataset under p, summed over speakers.  Within
/// a speaker the vectors are dependent through the shared speaker factor.
double log_likelihood(const PldaParameters &p, const LabeledDataset &data);

}  // namespace pldanorm

#endif  // PLDANORM_TRAINING_HPP_
