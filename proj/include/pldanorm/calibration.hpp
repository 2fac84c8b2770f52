// pldanorm/calibration.hpp

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

#ifndef PLDANORM_CALIBRATION_HPP
#define PLDANORM_CALIBRATION_HPP

#include <utility>
#include <vector>

#include "pldanorm/score_stats.hpp"

namespace pldanorm {

/// Detection cost weights: DCF(t) = FR(t) + beta * FA(t).
struct DcfConfig {
  double beta = 100.0;  // > 0
};

/// A speaker with its minDCF-optimal threshold and normalization scale
/// 1/sqrt(var1 + var2).  The normalized score (s - t) * scale has its
/// speaker-specific DCF minimum at zero.
struct CalibratedSpeaker {
  SpeakerScoreStats stats;
  double threshold = 0.0;
  double scale = 0.0;
};

/// The analytic DCF under speaker-dependent Gaussian score distributions:
///   Phi(t; mu1, sigma1) + beta (1 - Phi(t; mu2, sigma2)).
double analytic_dcf(double t, const SpeakerScoreStats &stats, const DcfConfig &cfg);

/// Closed-form minimizer of the analytic DCF.  For sigma1 != sigma2 this is
/// a root of a quadratic (the larger root when sigma1 > sigma2, the smaller
/// when sigma1 < sigma2); for sigma1 == sigma2 and mu1 > mu2 it is
///   t = (mu1 + mu2)/2 + sigma^2 Delta / (2 (mu1 - mu2)),
/// Delta = 2 log(beta sigma1 / sigma2).  Throws ComputeError when the
/// quadratic has no real root or the stationary point is not a minimum
/// ("analytic DCF has no interior minimum; degenerate stats") and when the
/// hypotheses coincide ("indistinguishable hypotheses").
double optimal_threshold(const SpeakerScoreStats &stats, const DcfConfig &cfg);

/// Grid minimizer of the analytic DCF; the harness falls back to this for
/// speakers whose analytic root fails.  Returns (argmin, min value).
std::pair<double, double> sweep_threshold(const SpeakerScoreStats &stats,
                                          const DcfConfig &cfg, int n_points = 10000);

/// Builds the calibrated view of a speaker (threshold + scale).  If
/// use_fallback is true, a failed analytic root falls back to the sweep
/// minimizer instead of throwing; fell_back reports which path was taken.
CalibratedSpeaker calibrate_speaker(const SpeakerScoreStats &stats, const DcfConfig &cfg,
                                    bool use_fallback = false, bool *fell_back = nullptr);

/// (s - t) / sqrt(var1 + var2).
double normalize_score(double score, const CalibratedSpeaker &cal);

/// Exact empirical minDCF over all thresholds.  A trial is accepted when its
/// score is >= t, so FR(t) is the fraction of target scores < t and FA(t)
/// the fraction of non-target scores >= t.  The minimum is attained at a
/// midpoint between adjacent distinct scores or at the +/-infinity
/// sentinels; all candidates are evaluated.  Returns (minDCF, argmin).
std::pair<double, double> empirical_min_dcf(const std::vector<double> &target_scores,
                                            const std::vector<double> &nontarget_scores,
                                            const DcfConfig &cfg);

}  // namespace pldanorm

#endif  // PLDANORM_CALIBRATION_HPP
