// pldanorm/scoring.hpp

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

#ifndef PLDANORM_SCORING_HPP
#define PLDANORM_SCORING_HPP

#include <optional>
#include <string>
#include <vector>

#include "pldanorm/plda_model.hpp"

namespace pldanorm {

/// A speaker model: the sum of the speaker's (preprocessed, mean-subtracted)
/// enrollment i-vectors and their count.  The verification score depends on
/// the enrollment only through (i_sum, L).
struct Enrollment {
  std::string speaker_id;
  Vector i_sum;  // length d
  int L = 0;     // >= 1
};

/// The verification score as a quadratic function of the test vector t:
///   s(t) = 1/2 t^T A t + b^T t + c,
/// with A = K_{L+1} - K_1, b = K_{L+1} i, c = 1/2 i^T (K_{L+1} - K_L) i + alpha(L).
/// A has rank at most f and is usually singular, in which case the centered
/// form around d_center = -A^{-1} b is unavailable and scores are evaluated
/// in the non-centered form above.
struct QuadraticForm {
  Matrix A;   // d x d symmetric
  Vector b;   // d
  double c = 0.0;
  std::optional<Vector> d_center;  // -A^{-1} b, present only when A is invertible
};

/// PLDA log-likelihood-ratio score of a (multi-enrollment, test) trial:
///   s = 1/2 [ (i+t)^T K_{L+1} (i+t) - i^T K_L i - t^T K_1 t ] + alpha(L).
double score_trial(const DerivedOperators &ops, const Enrollment &e, const Vector &test);

/// The same score rewritten as a quadratic form in the test vector.
/// want_center controls whether -A^{-1} b is attempted (it needs a full
/// factorization of A; callers that only use A, b, c can skip it).
QuadraticForm quadratic_form(const DerivedOperators &ops, const Enrollment &e,
                             bool want_center = true);

/// Evaluates a quadratic form at t (non-centered evaluation; works for
/// singular A).
double evaluate_quadratic_form(const QuadraticForm &qf, const Vector &test);

/// One row of a trial list: indices into the enrollment and test arrays.
struct Trial {
  int model_index = -1;
  int test_index = -1;
};

/// Scores a list of trials.  Order is preserved and results are identical
/// regardless of num_threads.  Internally works in the f-dimensional factor
/// space, so per-trial cost is O(f) after an O(n d f) projection pass.
std::vector<double> batch_score(const DerivedOperators &ops,
                                const std::vector<Enrollment> &enrollments,
                                const std::vector<Vector> &tests,
                                const std::vector<Trial> &trials,
                                int num_threads = 1);

}  // namespace pldanorm

#endif  // PLDANORM_SCORING_HPP
