// src/harness.cpp

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

#include "pldanorm/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "pldanorm/preprocessing.hpp"
#include "pldanorm/score_stats.hpp"
#include "pldanorm/training.hpp"

namespace pldanorm {

namespace {

using nlohmann::json;

template <typename Fn>
auto run_stage(const char *name, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InvalidInput &e) {
    throw InvalidInput(std::string(name) + ": " + e.what());
  } catch (const ComputeError &e) {
    throw ComputeError(std::string(name) + ": " + e.what());
  }
}

void length_normalize_rows(Matrix &X) {
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    X.row(r) = length_normalize(X.row(r).transpose()).transpose();
}

ConditionResult evaluate_condition(const DerivedOperators &ops,
                                   const EnrollmentCondition &cond,
                                   const ExperimentConfig &cfg,
                                   const std::string &out_dir) {
  ConditionResult res;
  res.name = cond.name;

  const std::size_t n_models = cond.enrollments.size();
  const std::size_t n_tests = cond.test_ids.size();
  if (n_models == 0 || n_tests == 0)
    throw InvalidInput("condition " + cond.name + " has no models or no tests");

  std::vector<Vector> tests(n_tests);
  for (std::size_t j = 0; j < n_tests; ++j)
    tests[j] = cond.test_vectors.row(static_cast<Eigen::Index>(j)).transpose();

  std::vector<Trial> trials;
  trials.reserve(n_models * n_tests);
  std::vector<bool> is_target;
  is_target.reserve(n_models * n_tests);
  long n_targets = 0;
  for (std::size_t r = 0; r < n_models; ++r)
    for (std::size_t j = 0; j < n_tests; ++j) {
      trials.push_back({static_cast<int>(r), static_cast<int>(j)});
      const bool tgt = cond.enrollments[r].speaker_id == cond.test_speakers[j];
      is_target.push_back(tgt);
      if (tgt) ++n_targets;
    }
  res.n_trials = static_cast<long>(trials.size());
  res.n_targets = n_targets;

  const std::vector<double> raw =
      batch_score(ops, cond.enrollments, tests, trials, cfg.num_threads);

  // Blind per-speaker calibration from the enrollment alone.
  const DcfConfig dcf{cfg.beta};
  std::vector<double> thresholds(n_models), scales(n_models);
  std::map<int, std::pair<double, long>> thr_by_L;
  for (std::size_t r = 0; r < n_models; ++r) {
    const Enrollment &e = cond.enrollments[r];
    const SpeakerScoreStats stats = speaker_stats(ops, e);
    bool fell_back = false;
    const CalibratedSpeaker cal =
        calibrate_speaker(stats, dcf, /*use_fallback=*/true, &fell_back);
    if (fell_back) ++res.n_fallbacks;
    thresholds[r] = cal.threshold;
    scales[r] = cal.scale;
    SpeakerCalRow row;
    row.speaker_id = e.speaker_id;
    row.L = e.L;
    row.mu1 = stats.mu1;
    row.var1 = stats.var1;
    row.mu2 = stats.mu2;
    row.var2 = stats.var2;
    row.threshold = cal.threshold;
    row.scale = cal.scale;
    res.speakers.push_back(std::move(row));
    auto &acc = thr_by_L[e.L];
    acc.first += cal.threshold;
    acc.second += 1;
  }
  for (const auto &[L, acc] : thr_by_L)
    res.mean_threshold_by_L[L] = acc.first / static_cast<double>(acc.second);

  std::vector<double> norm(raw.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const int r = trials[k].model_index;
    norm[k] = (raw[k] - thresholds[r]) * scales[r];
  }

  // Pooled evaluation: one global threshold per scoring method.
  std::vector<double> tgt_raw, non_raw, tgt_norm, non_norm;
  tgt_raw.reserve(n_targets);
  non_raw.reserve(trials.size() - n_targets);
  tgt_norm.reserve(n_targets);
  non_norm.reserve(trials.size() - n_targets);
  for (std::size_t k = 0; k < trials.size(); ++k) {
    (is_target[k] ? tgt_raw : non_raw).push_back(raw[k]);
    (is_target[k] ? tgt_norm : non_norm).push_back(norm[k]);
  }
  std::tie(res.raw_min_dcf, res.raw_threshold) = empirical_min_dcf(tgt_raw, non_raw, dcf);
  std::tie(res.norm_min_dcf, res.norm_threshold) = empirical_min_dcf(tgt_norm, non_norm, dcf);

  if (!out_dir.empty()) {
    write_stats_csv(out_dir + "/thresholds_" + cond.name + ".csv", res.speakers);
    if (cfg.write_scores) {
      std::ofstream out(out_dir + "/scores_" + cond.name + ".csv");
      if (!out) throw InvalidInput("cannot open scores file for condition " + cond.name);
      out << "model_id,test_id,raw_score,norm_score\n";
      for (std::size_t k = 0; k < trials.size(); ++k) {
        out << cond.enrollments[trials[k].model_index].speaker_id << ","
            << cond.test_ids[trials[k].test_index] << "," << format_double(raw[k])
            << "," << format_double(norm[k]) << "\n";
      }
      if (!out) throw InvalidInput("write failed for scores of condition " + cond.name);
    }
  }

  if (cfg.keep_trial_data) {
    res.model_ids.reserve(n_models);
    for (const Enrollment &e : cond.enrollments) res.model_ids.push_back(e.speaker_id);
    res.test_ids = cond.test_ids;
    res.trials = std::move(trials);
    res.raw_scores = raw;
    res.norm_scores = std::move(norm);
    res.is_target = std::move(is_target);
  }
  return res;
}

json report_to_json(const ExperimentReport &rep) {
  json j;
  j["seed"] = rep.seed;
  j["dim"] = rep.dim;
  j["f"] = rep.f;
  j["g"] = rep.g;
  j["beta"] = rep.beta;
  j["n_train_speakers"] = rep.n_train_speakers;
  j["n_train_vectors"] = rep.n_train_vectors;
  j["n_model_speakers"] = rep.n_model_speakers;
  j["n_tests"] = rep.n_tests;
  j["train_ll"] = rep.train_ll;
  json conds = json::array();
  for (const ConditionResult &c : rep.conditions) {
    json jc;
    jc["name"] = c.name;
    jc["n_trials"] = c.n_trials;
    jc["n_targets"] = c.n_targets;
    jc["raw_min_dcf"] = c.raw_min_dcf;
    jc["raw_threshold"] = c.raw_threshold;
    jc["norm_min_dcf"] = c.norm_min_dcf;
    jc["norm_threshold"] = c.norm_threshold;
    jc["n_fallbacks"] = c.n_fallbacks;
    json thr;
    for (const auto &[L, v] : c.mean_threshold_by_L) thr[std::to_string(L)] = v;
    jc["mean_threshold_by_L"] = std::move(thr);
    conds.push_back(std::move(jc));
  }
  j["conditions"] = std::move(conds);
  return j;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig &cfg) {
  if (!(cfg.beta > 0.0)) throw InvalidInput("beta must be positive");
  if (cfg.num_threads < 1) throw InvalidInput("num_threads must be >= 1");
  if (cfg.uniform_L.empty() && !cfg.include_mixed)
    throw InvalidInput("no conditions configured");

  ExperimentReport rep;
  rep.seed = cfg.seed;
  rep.beta = cfg.beta;

  LabeledDataset train, eval;
  run_stage("data", [&] {
    if (cfg.train_csv.empty()) {
      const PldaParameters truth = make_truth_model(
          cfg.dim, cfg.truth_f, cfg.truth_g, derive_seed(cfg.seed, 1),
          cfg.truth_f_scale, cfg.truth_g_scale, cfg.truth_sigma_min,
          cfg.truth_sigma_max);
      SynthConfig sc;
      sc.truth = truth;
      sc.num_threads = cfg.num_threads;
      sc.n_speakers = cfg.n_train_speakers;
      sc.vpk_min = cfg.train_vpk_min;
      sc.vpk_max = cfg.train_vpk_max;
      sc.seed = derive_seed(cfg.seed, 2);
      sc.speaker_prefix = "trn";
      train = sample_dataset(sc);
      sc.n_speakers = cfg.n_eval_speakers;
      sc.vpk_min = cfg.eval_vpk_min;
      sc.vpk_max = cfg.eval_vpk_max;
      sc.seed = derive_seed(cfg.seed, 3);
      sc.speaker_prefix = "mdl";
      eval = sample_dataset(sc);
    } else {
      if (cfg.eval_csv.empty())
        throw InvalidInput("eval_csv is required when train_csv is set");
      train = read_ivector_csv(cfg.train_csv);
      eval = read_ivector_csv(cfg.eval_csv);
      if (train.speakers.empty() || eval.speakers.empty())
        throw InvalidInput("training and evaluation data must have speaker labels");
    }
  });

  run_stage("preprocess", [&] {
    if (cfg.whiten) {
      const WhiteningTransform wt = fit_whitening(train.X);
      train.X = apply_whitening(wt, train.X);
      eval.X = apply_whitening(wt, eval.X);
    }
    if (cfg.length_norm) {
      length_normalize_rows(train.X);
      length_normalize_rows(eval.X);
    }
  });

  EmResult em;
  run_stage("train", [&] {
    EmConfig ec;
    ec.iters = cfg.em_iters;
    ec.seed = derive_seed(cfg.seed, 4);
    ec.num_threads = cfg.num_threads;
    em = em_fit(train, cfg.f, cfg.g, ec);
  });
  rep.dim = em.params.d;
  rep.f = cfg.f;
  rep.g = cfg.g;
  rep.n_train_speakers = train.num_speakers();
  rep.n_train_vectors = train.num_vectors();
  rep.train_ll = em.log_likelihood_history;

  const DerivedOperators ops(em.params);
  // Scoring and calibration expect centered vectors.
  eval.X.rowwise() -= em.params.m.transpose();
  rep.n_model_speakers = eval.num_speakers();

  std::string out_dir = cfg.out_dir;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    while (out_dir.size() > 1 && out_dir.back() == '/') out_dir.pop_back();
  }

  int reserve = 0;
  for (int L : cfg.uniform_L) {
    if (L < 1) throw InvalidInput("uniform enrollment sizes must be >= 1");
    reserve = std::max(reserve, L);
  }
  if (cfg.include_mixed) reserve = std::max(reserve, 5);

  std::vector<EnrollmentConditionSpec> specs;
  for (int L : cfg.uniform_L)
    specs.push_back(uniform_condition(L, rep.n_model_speakers));
  if (cfg.include_mixed) specs.push_back(mixed_condition(rep.n_model_speakers));

  for (const EnrollmentConditionSpec &spec : specs) {
    const EnrollmentCondition cond = run_stage(
        "conditions", [&] { return build_conditions(eval, spec, cfg.seed, reserve); });
    rep.n_tests = static_cast<int>(cond.test_ids.size());
    rep.conditions.push_back(run_stage(
        "evaluate", [&] { return evaluate_condition(ops, cond, cfg, out_dir); }));
  }

  if (!out_dir.empty()) {
    run_stage("report", [&] {
      std::ofstream jout(out_dir + "/report.json");
      if (!jout) throw InvalidInput("cannot open report.json for writing");
      jout << report_to_json(rep).dump(2) << "\n";
      if (!jout) throw InvalidInput("write failed for report.json");
      std::ofstream tout(out_dir + "/table.csv");
      if (!tout) throw InvalidInput("cannot open table.csv for writing");
      tout << compare_table(rep).csv;
      if (!tout) throw InvalidInput("write failed for table.csv");
    });
  }
  return rep;
}

Histogram threshold_histogram(const ExperimentReport &report,
                              const std::string &condition, int bins) {
  if (bins < 1) throw InvalidInput("bins must be >= 1");
  const ConditionResult *cond = nullptr;
  for (const ConditionResult &c : report.conditions)
    if (c.name == condition) cond = &c;
  if (!cond) throw InvalidInput("unknown condition '" + condition + "'");
  if (cond->speakers.empty()) throw InvalidInput("condition has no speakers");

  double lo = cond->speakers.front().threshold, hi = lo;
  for (const SpeakerCalRow &s : cond->speakers) {
    lo = std::min(lo, s.threshold);
    hi = std::max(hi, s.threshold);
  }
  if (hi == lo) {
    // Degenerate range: one occupied bin centered on the common value.
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.edges = Vector(bins + 1);
  for (int i = 0; i <= bins; ++i)
    h.edges(i) = lo + (hi - lo) * static_cast<double>(i) / bins;
  h.counts.assign(bins, 0);
  for (const SpeakerCalRow &s : cond->speakers) {
    int b = static_cast<int>((s.threshold - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);  // the maximum lands in the last bin
    ++h.counts[b];
  }
  return h;
}

ComparisonTable compare_table(const ExperimentReport &report) {
  ComparisonTable t;
  std::ostringstream csv;
  csv << "method";
  for (const ConditionResult &c : report.conditions) csv << "," << c.name;
  csv << "\nraw";
  for (const ConditionResult &c : report.conditions)
    csv << "," << format_double(c.raw_min_dcf);
  csv << "\nnormalized";
  for (const ConditionResult &c : report.conditions)
    csv << "," << format_double(c.norm_min_dcf);
  csv << "\n";
  t.csv = csv.str();

  std::ostringstream text;
  const int name_w = 12;
  text << std::left << std::setw(name_w) << "method";
  for (const ConditionResult &c : report.conditions)
    text << std::right << std::setw(10) << c.name;
  text << "\n" << std::left << std::setw(name_w) << "raw";
  text << std::fixed << std::setprecision(4);
  for (const ConditionResult &c : report.conditions)
    text << std::right << std::setw(10) << c.raw_min_dcf;
  text << "\n" << std::left << std::setw(name_w) << "normalized";
  for (const ConditionResult &c : report.conditions)
    text << std::right << std::setw(10) << c.norm_min_dcf;
  text << "\n";
  t.text = text.str();
  return t;
}

}  // namespace pldanorm
