// pldanorm/harness.hpp

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

#ifndef PLDANORM_HARNESS_HPP_
#define PLDANORM_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pldanorm/calibration.hpp"
#include "pldanorm/io.hpp"
#include "pldanorm/synthgen.hpp"

namespace pldanorm {

/// End-to-end experiment: preprocess, train, calibrate, score, evaluate; the
/// evaluation compares raw pooled scoring against blind-normalized pooled
/// scoring per enrollment condition.
struct ExperimentConfig {
  std::uint64_t seed = 0;

  // Synthetic source, used when train_csv is empty.  Ground truth and both
  // datasets are drawn from seeds derived from `seed`.
  int dim = 100;
  int truth_f = 80;
  int truth_g = 10;
  int n_train_speakers = 500;
  int train_vpk_min = 6, train_vpk_max = 6;
  int n_eval_speakers = 683;
  int eval_vpk_min = 8, eval_vpk_max = 8;
  // Scales of the generating model. The channel term dominates the
  // within-speaker variability, so enrollment quality varies with the
  // realized channel noise and error rates stay in a meaningful range.
  double truth_f_scale = 0.06;
  double truth_g_scale = 1.0;
  double truth_sigma_min = 0.2, truth_sigma_max = 0.6;

  // File source: labeled i-vector CSVs for training and evaluation.
  std::string train_csv;
  std::string eval_csv;

  int f = 80;
  int g = 10;
  int em_iters = 20;
  bool whiten = true;
  bool length_norm = false;
  double beta = 100.0;

  std::vector<int> uniform_L = {1, 2, 3, 4, 5};
  bool include_mixed = true;

  std::string out_dir;       // empty: keep results in memory only
  bool write_scores = true;  // scores_<condition>.csv can be large
  // Per-trial arrays in ConditionResult cost memory on big runs; summaries
  // and files are unaffected when this is off.
  bool keep_trial_data = true;
  int num_threads = 1;
};

struct ConditionResult {
  std::string name;
  long n_trials = 0;
  long n_targets = 0;
  double raw_min_dcf = 0.0, raw_threshold = 0.0;
  double norm_min_dcf = 0.0, norm_threshold = 0.0;
  int n_fallbacks = 0;  // speakers whose analytic threshold needed the sweep
  std::vector<SpeakerCalRow> speakers;
  std::map<int, double> mean_threshold_by_L;
  // Per-trial data (present when keep_trial_data): trials index into
  // model_ids / test_ids; the four arrays are aligned.
  std::vector<std::string> model_ids;
  std::vector<std::string> test_ids;
  std::vector<Trial> trials;
  std::vector<double> raw_scores;
  std::vector<double> norm_scores;
  std::vector<bool> is_target;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  int dim = 0, f = 0, g = 0;
  int n_train_speakers = 0, n_train_vectors = 0;
  int n_model_speakers = 0, n_tests = 0;
  double beta = 100.0;
  std::vector<double> train_ll;
  std::vector<ConditionResult> conditions;
};

/// Runs the full pipeline.  With out_dir set, writes report.json, table.csv,
/// thresholds_<condition>.csv and (optionally) scores_<condition>.csv.
/// Results are deterministic given the config, including num_threads.
/// Stage failures rethrow the original error type prefixed with the stage
/// name.
ExperimentReport run_experiment(const ExperimentConfig &cfg);

struct Histogram {
  Vector edges;               // bins + 1 monotone edges spanning all values
  std::vector<long> counts;   // size bins; sums to the number of values
};

/// Bins the per-speaker decision thresholds of one condition.  Throws
/// InvalidInput for an unknown condition name.
Histogram threshold_histogram(const ExperimentReport &report,
                              const std::string &condition, int bins = 30);

struct ComparisonTable {
  std::string csv;   // method,<cond1>,<cond2>,...
  std::string text;  // aligned for terminals
};

/// Renders the raw vs normalized minDCF matrix over all conditions.
ComparisonTable compare_table(const ExperimentReport &report);

}  // namespace pldanorm

#endif  // PLDANORM_HARNESS_HPP_
