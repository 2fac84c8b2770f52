// pldanorm/synthgen.hpp

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

#ifndef PLDANORM_SYNTHGEN_HPP_
#define PLDANORM_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pldanorm/common.hpp"
#include "pldanorm/plda_model.hpp"
#include "pldanorm/scoring.hpp"
#include "pldanorm/training.hpp"

namespace pldanorm {

struct SynthConfig {
  PldaParameters truth;
  int n_speakers = 0;
  // Vectors per speaker, drawn uniformly from [vpk_min, vpk_max]; equal
  // bounds give a fixed count.
  int vpk_min = 1;
  int vpk_max = 1;
  std::uint64_t seed = 0;
  std::string speaker_prefix = "spk";
  int num_threads = 1;
};

/// Draws a labeled dataset from the ground-truth model: per speaker one
/// speaker factor, per vector a fresh channel factor and residual.  Each
/// speaker consumes its own substream derived from the seed, so the output is
/// byte-identical for any thread count and any speaker subset is stable.
LabeledDataset sample_dataset(const SynthConfig &cfg);

/// Convenience ground-truth model with seeded random factor loadings.  The
/// scale arguments set the entrywise standard deviation of F and G; Sigma is
/// drawn uniformly from [sigma_min, sigma_max] per coordinate.
PldaParameters make_truth_model(int d, int f, int g, std::uint64_t seed,
                                double f_scale = 0.12, double g_scale = 0.2,
                                double sigma_min = 0.2, double sigma_max = 0.6);

struct ConditionBucket {
  int L = 1;
  int n_speakers = 0;
};

struct EnrollmentConditionSpec {
  std::string name;
  std::vector<ConditionBucket> buckets;
};

/// Single-bucket condition: every enrolled speaker uses its first L vectors.
EnrollmentConditionSpec uniform_condition(int L, int n_speakers);

/// Mixed condition with bucket sizes 94/93/194/189/113 for L = 1..5 at 683
/// speakers; other speaker counts are scaled proportionally with
/// largest-remainder rounding so the sizes still sum to n_speakers.
EnrollmentConditionSpec mixed_condition(int n_speakers);

struct EnrollmentCondition {
  std::string name;
  std::vector<Enrollment> enrollments;
  std::vector<std::string> test_ids;
  std::vector<std::string> test_speakers;
  Matrix test_vectors;  // num_tests x dim
};

/// Builds enrollments and the held-out test set for one condition.  The first
/// `reserve` vectors of each speaker form the enrollment pool (a bucket with
/// enrollment size L uses the first L of them) and everything after the pool
/// becomes a test vector, so conditions built with the same reserve share an
/// identical test set.  reserve < 0 means the largest bucket L.  Bucket
/// membership is a deterministic shuffle of the speakers under `seed`.
///
/// Throws InvalidInput when bucket sizes exceed the speaker count or a
/// speaker lacks reserve + 1 vectors (the error names the speaker).
EnrollmentCondition build_conditions(const LabeledDataset &models,
                                     const EnrollmentConditionSpec &spec,
                                     std::uint64_t seed, int reserve = -1);

}  // namespace pldanorm

#endif  // PLDANORM_SYNTHGEN_HPP_
