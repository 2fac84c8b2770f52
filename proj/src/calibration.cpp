// src/calibration.cpp

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

#include "pldanorm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pldanorm {

static double gaussian_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::numbers::sqrt2));
}

static void check_stats(const SpeakerScoreStats &stats, const DcfConfig &cfg) {
  if (!(cfg.beta > 0.0)) throw InvalidInput("beta must be positive");
  if (!(stats.var1 >= 0.0) || !(stats.var2 >= 0.0))
    throw InvalidInput("score variances must be non-negative");
}

double analytic_dcf(double t, const SpeakerScoreStats &stats, const DcfConfig &cfg) {
  check_stats(stats, cfg);
  double s1 = std::sqrt(stats.var1), s2 = std::sqrt(stats.var2);
  return gaussian_cdf(t, stats.mu1, s1) + cfg.beta * (1.0 - gaussian_cdf(t, stats.mu2, s2));
}

double optimal_threshold(const SpeakerScoreStats &stats, const DcfConfig &cfg) {
  check_stats(stats, cfg);
  const double mu1 = stats.mu1, mu2 = stats.mu2;
  const double s1 = std::sqrt(stats.var1), s2 = std::sqrt(stats.var2);
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw ComputeError("analytic DCF has no interior minimum; degenerate stats");

  // Equal variances are routed through the linear stationary-point formula;
  // the quadratic's denominator sigma1^2 - sigma2^2 cancels catastrophically
  // there.
  if (std::abs(s1 - s2) <= 1e-9 * std::max(s1, s2)) {
    if (mu1 == mu2) throw ComputeError("indistinguishable hypotheses");
    if (mu1 < mu2)
      throw ComputeError("analytic DCF has no interior minimum; degenerate stats");
    double sigma_sq = s1 * s2;
    double delta = 2.0 * std::log(cfg.beta * s1 / s2);
    return 0.5 * (mu1 + mu2) + sigma_sq * delta / (2.0 * (mu1 - mu2));
  }

  double delta = 2.0 * std::log(cfg.beta * s1 / s2);
  double denom = stats.var1 - stats.var2;
  double disc = (mu1 - mu2) * (mu1 - mu2) + delta * denom;
  if (disc < 0.0)
    throw ComputeError("analytic DCF has no interior minimum; degenerate stats");
  double center = (stats.var1 * mu2 - stats.var2 * mu1) / denom;
  double spread = s1 * s2 * std::sqrt(disc) / denom;
  double lo = center - std::abs(spread), hi = center + std::abs(spread);
  // sigma1 > sigma2: the DCF falls between the roots and rises after the
  // larger one, so the larger root is the minimum; mirrored otherwise.
  double t_star = (s1 > s2) ? hi : lo;
  // The stationary point is only a local minimum. The DCF tends to beta at
  // -inf and to 1 at +inf; a wide impostor distribution can hold the interior
  // valley above both limits, in which case no global minimizer exists.
  if (analytic_dcf(t_star, stats, cfg) >= std::min(1.0, cfg.beta))
    throw ComputeError("analytic DCF has no interior minimum; degenerate stats");
  return t_star;
}

std::pair<double, double> sweep_threshold(const SpeakerScoreStats &stats,
                                          const DcfConfig &cfg, int n_points) {
  check_stats(stats, cfg);
  double s1 = std::sqrt(stats.var1), s2 = std::sqrt(stats.var2);
  double pad1 = 8.0 * std::max(s1, 1e-6), pad2 = 8.0 * std::max(s2, 1e-6);
  double lo = std::min(stats.mu1 - pad1, stats.mu2 - pad2);
  double hi = std::max(stats.mu1 + pad1, stats.mu2 + pad2);
  double best_t = lo, best_v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_points; ++k) {
    double t = lo + (hi - lo) * k / (n_points - 1);
    double v = analytic_dcf(t, stats, cfg);
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  }
  return {best_t, best_v};
}

CalibratedSpeaker calibrate_speaker(const SpeakerScoreStats &stats, const DcfConfig &cfg,
                                    bool use_fallback, bool *fell_back) {
  CalibratedSpeaker cal;
  cal.stats = stats;
  double total_var = stats.var1 + stats.var2;
  if (!(total_var > 0.0)) throw ComputeError("zero total score variance; cannot calibrate");
  cal.scale = 1.0 / std::sqrt(total_var);
  if (fell_back) *fell_back = false;
  try {
    cal.threshold = optimal_threshold(stats, cfg);
  } catch (const ComputeError &) {
    if (!use_fallback) throw;
    cal.threshold = sweep_threshold(stats, cfg).first;
    if (fell_back) *fell_back = true;
  }
  return cal;
}

double normalize_score(double score, const CalibratedSpeaker &cal) {
  double total_var = cal.stats.var1 + cal.stats.var2;
  if (!(total_var > 0.0)) throw ComputeError("zero total score variance");
  return (score - cal.threshold) / std::sqrt(total_var);
}

std::pair<double, double> empirical_min_dcf(const std::vector<double> &target_scores,
                                            const std::vector<double> &nontarget_scores,
                                            const DcfConfig &cfg) {
  if (!(cfg.beta > 0.0)) throw InvalidInput("beta must be positive");
  if (target_scores.empty()) throw InvalidInput("empty target score list");
  if (nontarget_scores.empty()) throw InvalidInput("empty non-target score list");

  // Pool and sort; walking t upward past a score flips one trial's decision.
  struct Item {
    double score;
    bool target;
  };
  std::vector<Item> items;
  items.reserve(target_scores.size() + nontarget_scores.size());
  for (double s : target_scores) items.push_back({s, true});
  for (double s : nontarget_scores) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item &a, const Item &b) { return a.score < b.score; });

  const double nt = static_cast<double>(target_scores.size());
  const double nn = static_cast<double>(nontarget_scores.size());
  // Integer counts keep the sweep exact: rejected targets / accepted
  // non-targets for the current threshold position.
  std::size_t n_rej_tar = 0, n_acc_non = nontarget_scores.size();
  // t below every score: nothing rejected, everything accepted.
  double best = cfg.beta;
  double best_t = -std::numeric_limits<double>::infinity();

  std::size_t k = 0;
  while (k < items.size()) {
    double v = items[k].score;
    while (k < items.size() && items[k].score == v) {
      if (items[k].target)
        ++n_rej_tar;
      else
        --n_acc_non;
      ++k;
    }
    double t = (k < items.size()) ? 0.5 * (v + items[k].score)
                                  : std::numeric_limits<double>::infinity();
    double dcf = n_rej_tar / nt + cfg.beta * (n_acc_non / nn);
    if (dcf < best) {
      best = dcf;
      best_t = t;
    }
  }
  return {best, best_t};
}

}  // namespace pldanorm
