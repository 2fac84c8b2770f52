// pldanorm/score_stats.hpp

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

#ifndef PLDANORM_SCORE_STATS_HPP
#define PLDANORM_SCORE_STATS_HPP

#include <utility>

#include "pldanorm/scoring.hpp"

namespace pldanorm {

/// Exact first and second moments of a speaker's score distribution under
/// the target (mu1, var1) and non-target (mu2, var2) hypotheses.  These are
/// exact moments of the quadratic score; only the Gaussian shape assumed by
/// calibration is an approximation.
struct SpeakerScoreStats {
  std::string speaker_id;
  int L = 0;
  double mu1 = 0.0, var1 = 0.0;
  double mu2 = 0.0, var2 = 0.0;
};

/// Distribution of the test i-vector conditioned on the speaker's
/// enrollment: t | i_1..i_L ~ N(mu_hat, R_hat).
struct ConditionalTestDistribution {
  Vector mu_hat;  // d
  Matrix R_hat;   // d x d, symmetric PSD
};

/// Moments of the quadratic form z = q^T Lambda q for q ~ (mu_q, Sigma_q):
///   E[z]   = tr(Lambda Sigma_q) + mu_q^T Lambda mu_q
///   Var[z] = 2 tr(Lambda Sigma_q Lambda Sigma_q) + 4 mu_q^T Lambda Sigma_q Lambda mu_q
std::pair<double, double> quad_moments(const Matrix &Lambda, const Vector &mu_q,
                                       const Matrix &Sigma_q);

/// Non-target moments.  Impostor tests have zero mean and covariance
/// R = V + U, giving
///   mu2 = 1/2 tr(A R) + c,   var2 = 1/2 tr(A R A R) + b^T R b.
std::pair<double, double> nontarget_stats(const DerivedOperators &ops,
                                          const QuadraticForm &qf);

/// Conditional distribution of the test vector given the enrollment,
///   mu_hat = (V Ubar + L V Q) i,   R_hat = R - L (V Ubar + L V Q) V,
/// with Q = -(L V + U)^{-1} V Ubar.
ConditionalTestDistribution conditional_test_distribution(const DerivedOperators &ops,
                                                          const Enrollment &e);

/// Target moments.  With w = A mu_hat + b (so the A^{-1} terms cancel),
///   mu1  = 1/2 tr(A R_hat) + b^T mu_hat + 1/2 mu_hat^T A mu_hat + c
///   var1 = 1/2 tr(A R_hat A R_hat) + w^T R_hat w.
std::pair<double, double> target_stats(const DerivedOperators &ops, const Enrollment &e,
                                       const QuadraticForm &qf,
                                       const ConditionalTestDistribution &cond);

/// All four moments for one speaker; depends on the enrollment only through
/// (i_sum, L).
SpeakerScoreStats speaker_stats(const DerivedOperators &ops, const Enrollment &e);

}  // namespace pldanorm

#endif  // PLDANORM_SCORE_STATS_HPP
