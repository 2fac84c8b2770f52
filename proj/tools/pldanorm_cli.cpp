// tools/pldanorm_cli.cpp

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

// Command-line front end; every subcommand is a thin shell over the library.
// Exit codes: 0 success, 1 data or compute errors, 2 usage errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pldanorm/calibration.hpp"
#include "pldanorm/harness.hpp"
#include "pldanorm/io.hpp"
#include "pldanorm/plda_model.hpp"
#include "pldanorm/preprocessing.hpp"
#include "pldanorm/score_stats.hpp"
#include "pldanorm/scoring.hpp"
#include "pldanorm/synthgen.hpp"
#include "pldanorm/training.hpp"

namespace {

using nlohmann::json;
using namespace pldanorm;

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool verbose = false;
};

void vlog(const GlobalOpts &g, const std::string &msg) {
  if (g.verbose) std::cerr << msg << "\n";
}

json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return j;
}

// Applies the container's whitening (when present) and centers by the model
// mean, in place.
void prepare_vectors(const ModelContainer &mc, Matrix &X) {
  if (mc.whitening) X = apply_whitening(*mc.whitening, X);
  X.rowwise() -= mc.plda->m.transpose();
}

std::vector<Enrollment> group_enrollments(const LabeledDataset &enroll) {
  if (enroll.speakers.empty())
    throw InvalidInput("enrollment file needs a speaker column");
  std::vector<Enrollment> out;
  std::unordered_map<std::string, int> index;
  for (int r = 0; r < enroll.num_vectors(); ++r) {
    auto [it, inserted] = index.emplace(enroll.speakers[r], static_cast<int>(out.size()));
    if (inserted) {
      Enrollment e;
      e.speaker_id = enroll.speakers[r];
      e.i_sum = Vector::Zero(enroll.X.cols());
      e.L = 0;
      out.push_back(std::move(e));
    }
    out[it->second].i_sum += enroll.X.row(r);
    out[it->second].L += 1;
  }
  return out;
}

int run_synth(const GlobalOpts &g, const std::string &config_path, const std::string &out_dir) {
  const json j = read_json_file(config_path);
  SynthConfig sc;
  sc.num_threads = g.threads;
  sc.seed = g.seed_given ? g.seed : j.value("seed", std::uint64_t{0});
  if (!j.contains("n_speakers")) throw InvalidInput(config_path + ": n_speakers is required");
  sc.n_speakers = j.at("n_speakers").get<int>();
  if (j.contains("vectors_per_speaker")) {
    const json &v = j["vectors_per_speaker"];
    if (v.is_number_integer()) {
      sc.vpk_min = sc.vpk_max = v.get<int>();
    } else if (v.is_object()) {
      sc.vpk_min = v.at("min").get<int>();
      sc.vpk_max = v.at("max").get<int>();
    } else {
      throw InvalidInput(config_path + ": vectors_per_speaker must be an int or {min,max}");
    }
  }
  sc.speaker_prefix = j.value("speaker_prefix", std::string("spk"));

  if (j.contains("model")) {
    const ModelContainer mc = load_model_container(j["model"].get<std::string>());
    if (!mc.plda) throw InvalidInput("container has no PLDA parameters");
    sc.truth = *mc.plda;
  } else {
    const json t = j.value("truth", json::object());
    sc.truth = make_truth_model(
        t.value("d", 100), t.value("f", 80), t.value("g", 10),
        t.value("seed", derive_seed(sc.seed, 1)), t.value("f_scale", 0.06),
        t.value("g_scale", 1.0), t.value("sigma_min", 0.2), t.value("sigma_max", 0.6));
  }

  vlog(g, "sampling " + std::to_string(sc.n_speakers) + " speakers");
  const LabeledDataset data = sample_dataset(sc);
  std::filesystem::create_directories(out_dir);
  write_ivector_csv(out_dir + "/vectors.csv", data);
  ModelContainer truth;
  truth.plda = sc.truth;
  truth.seed = sc.seed;
  save_model_container(out_dir + "/truth_model.json", truth);
  vlog(g, "wrote " + std::to_string(data.num_vectors()) + " vectors to " + out_dir);
  return 0;
}

int run_train(const GlobalOpts &g, const std::string &data_path, int f, int gdim,
              int iters, bool whiten, const std::string &out_path) {
  LabeledDataset data = read_ivector_csv(data_path);
  if (data.speakers.empty()) throw InvalidInput("training file needs a speaker column");

  ModelContainer mc;
  if (whiten) {
    const WhiteningTransform wt = fit_whitening(data.X);
    data.X = apply_whitening(wt, data.X);
    mc.whitening = wt;
  }
  EmConfig ec;
  ec.iters = iters;
  ec.seed = g.seed;
  ec.num_threads = g.threads;
  vlog(g, "fitting f=" + std::to_string(f) + " g=" + std::to_string(gdim) + " on " +
              std::to_string(data.num_vectors()) + " vectors");
  const EmResult em = em_fit(data, f, gdim, ec);
  vlog(g, "final log-likelihood " + format_double(em.log_likelihood_history.back()) +
              " after " + std::to_string(em.iters_run) + " iterations");
  mc.plda = em.params;
  mc.seed = g.seed;
  save_model_container(out_path, mc);
  return 0;
}

int run_score(const GlobalOpts &g, const std::string &model_path,
              const std::string &enroll_path, const std::string &tests_path,
              const std::string &trials_path, const std::string &normalize,
              double beta, const std::string &out_path) {
  if (normalize != "none" && normalize != "blind")
    throw InvalidInput("--normalize must be none or blind");
  const ModelContainer mc = load_model_container(model_path);
  if (!mc.plda) throw InvalidInput("container has no PLDA parameters");
  const DerivedOperators ops(*mc.plda);

  LabeledDataset enroll = read_ivector_csv(enroll_path);
  LabeledDataset tests = read_ivector_csv(tests_path);
  prepare_vectors(mc, enroll.X);
  prepare_vectors(mc, tests.X);
  const std::vector<Enrollment> enrollments = group_enrollments(enroll);

  std::unordered_map<std::string, int> model_index, test_index;
  for (std::size_t i = 0; i < enrollments.size(); ++i)
    model_index[enrollments[i].speaker_id] = static_cast<int>(i);
  for (int i = 0; i < tests.num_vectors(); ++i) test_index[tests.ids[i]] = i;
  std::vector<Vector> test_vecs(tests.num_vectors());
  for (int i = 0; i < tests.num_vectors(); ++i) test_vecs[i] = tests.X.row(i).transpose();

  const std::vector<TrialRecord> records = read_trials_csv(trials_path);
  std::vector<Trial> trials;
  trials.reserve(records.size());
  for (const TrialRecord &t : records) {
    auto mi = model_index.find(t.model_id);
    if (mi == model_index.end())
      throw InvalidInput("trial references unknown model '" + t.model_id + "'");
    auto ti = test_index.find(t.test_id);
    if (ti == test_index.end())
      throw InvalidInput("trial references unknown test '" + t.test_id + "'");
    trials.push_back({mi->second, ti->second});
  }

  vlog(g, "scoring " + std::to_string(trials.size()) + " trials");
  const std::vector<double> raw = batch_score(ops, enrollments, test_vecs, trials, g.threads);

  std::vector<ScoreRow> rows(trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    rows[k].model_id = records[k].model_id;
    rows[k].test_id = records[k].test_id;
    rows[k].raw = raw[k];
  }
  if (normalize == "blind") {
    const DcfConfig dcf{beta};
    std::vector<CalibratedSpeaker> cals(enrollments.size());
    int fallbacks = 0;
    for (std::size_t i = 0; i < enrollments.size(); ++i) {
      bool fell = false;
      cals[i] = calibrate_speaker(speaker_stats(ops, enrollments[i]), dcf,
                                  /*use_fallback=*/true, &fell);
      if (fell) ++fallbacks;
    }
    if (fallbacks > 0)
      vlog(g, std::to_string(fallbacks) + " speakers used the sweep fallback");
    for (std::size_t k = 0; k < trials.size(); ++k)
      rows[k].norm = normalize_score(raw[k], cals[trials[k].model_index]);
  }
  write_scores_csv(out_path, rows);
  return 0;
}

int run_calibrate(const GlobalOpts &g, const std::string &model_path,
                  const std::string &enroll_path, double beta,
                  const std::string &out_path) {
  const ModelContainer mc = load_model_container(model_path);
  if (!mc.plda) throw InvalidInput("container has no PLDA parameters");
  const DerivedOperators ops(*mc.plda);

  LabeledDataset enroll = read_ivector_csv(enroll_path);
  prepare_vectors(mc, enroll.X);
  const std::vector<Enrollment> enrollments = group_enrollments(enroll);

  const DcfConfig dcf{beta};
  std::vector<SpeakerCalRow> rows;
  int fallbacks = 0;
  for (const Enrollment &e : enrollments) {
    const SpeakerScoreStats stats = speaker_stats(ops, e);
    bool fell = false;
    const CalibratedSpeaker cal = calibrate_speaker(stats, dcf, /*use_fallback=*/true, &fell);
    if (fell) ++fallbacks;
    SpeakerCalRow row;
    row.speaker_id = e.speaker_id;
    row.L = e.L;
    row.mu1 = stats.mu1;
    row.var1 = stats.var1;
    row.mu2 = stats.mu2;
    row.var2 = stats.var2;
    row.threshold = cal.threshold;
    row.scale = cal.scale;
    rows.push_back(std::move(row));
  }
  if (fallbacks > 0)
    vlog(g, std::to_string(fallbacks) + " speakers used the sweep fallback");
  write_stats_csv(out_path, rows);
  return 0;
}

int run_eval(const std::string &scores_path, const std::string &trials_path, double beta) {
  const std::vector<ScoreRow> scores = read_scores_csv(scores_path);
  const std::vector<TrialRecord> records = read_trials_csv(trials_path);
  std::map<std::pair<std::string, std::string>, bool> key;
  for (const TrialRecord &t : records) {
    if (!t.target.has_value())
      throw InvalidInput("trial list needs target/nontarget keys for evaluation");
    key[{t.model_id, t.test_id}] = *t.target;
  }
  const bool with_norm = !scores.empty() && scores.front().norm.has_value();
  std::vector<double> tgt_raw, non_raw, tgt_norm, non_norm;
  for (const ScoreRow &r : scores) {
    auto it = key.find({r.model_id, r.test_id});
    if (it == key.end())
      throw InvalidInput("no trial key for (" + r.model_id + ", " + r.test_id + ")");
    (it->second ? tgt_raw : non_raw).push_back(r.raw);
    if (with_norm) (it->second ? tgt_norm : non_norm).push_back(*r.norm);
  }
  const DcfConfig dcf{beta};
  const auto [raw_dcf, raw_thr] = empirical_min_dcf(tgt_raw, non_raw, dcf);
  std::printf("raw minDCF %.6f (threshold %s)\n", raw_dcf, format_double(raw_thr).c_str());
  if (with_norm) {
    const auto [norm_dcf, norm_thr] = empirical_min_dcf(tgt_norm, non_norm, dcf);
    std::printf("norm minDCF %.6f (threshold %s)\n", norm_dcf, format_double(norm_thr).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Two-factor PLDA speaker verification with blind per-speaker score normalization"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Master seed for all randomized steps");
  app.add_option("--threads", g.threads, "Worker threads for batch stages")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", g.verbose, "Progress logging on stderr");

  auto *synth = app.add_subcommand("synth", "Sample a synthetic labeled i-vector set");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "JSON generation config")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->fallthrough();

  auto *train = app.add_subcommand("train", "Fit PLDA parameters by EM");
  std::string train_data, train_out;
  int train_f = 0, train_g = 0, train_iters = 50;
  bool train_whiten = false;
  train->add_option("--data", train_data, "Labeled i-vector CSV")->required();
  train->add_option("--f", train_f, "Speaker subspace dimension")->required();
  train->add_option("--g", train_g, "Channel subspace dimension")->required();
  train->add_option("--iters", train_iters, "Maximum EM iterations");
  train->add_flag("--whiten", train_whiten, "Fit whitening first and store it in the model");
  train->add_option("--out", train_out, "Output model container (.json or binary)")->required();
  train->fallthrough();

  auto *score = app.add_subcommand("score", "Score a trial list against enrolled speakers");
  std::string score_model, score_enroll, score_tests, score_trials, score_out;
  std::string score_normalize = "none";
  double score_beta = 100.0;
  score->add_option("--model", score_model, "Model container")->required();
  score->add_option("--enroll", score_enroll, "Labeled enrollment CSV")->required();
  score->add_option("--tests", score_tests, "Test i-vector CSV")->required();
  score->add_option("--trials", score_trials, "Trial list CSV")->required();
  score->add_option("--normalize", score_normalize, "none or blind");
  score->add_option("--beta", score_beta, "False-acceptance cost weight")
      ->check(CLI::PositiveNumber);
  score->add_option("--out", score_out, "Output scores CSV")->required();
  score->fallthrough();

  auto *calibrate = app.add_subcommand("calibrate", "Per-speaker analytic stats and thresholds");
  std::string cal_model, cal_enroll, cal_out;
  double cal_beta = 100.0;
  calibrate->add_option("--model", cal_model, "Model container")->required();
  calibrate->add_option("--enroll", cal_enroll, "Labeled enrollment CSV")->required();
  calibrate->add_option("--beta", cal_beta, "False-acceptance cost weight")
      ->check(CLI::PositiveNumber);
  calibrate->add_option("--out", cal_out, "Output stats CSV")->required();
  calibrate->fallthrough();

  auto *eval = app.add_subcommand("eval", "Pooled empirical minDCF of a scores file");
  std::string eval_scores, eval_trials;
  double eval_beta = 100.0;
  eval->add_option("--scores", eval_scores, "Scores CSV")->required();
  eval->add_option("--trials", eval_trials, "Keyed trial list CSV")->required();
  eval->add_option("--beta", eval_beta, "False-acceptance cost weight")
      ->check(CLI::PositiveNumber);
  eval->fallthrough();

  auto *experiment = app.add_subcommand(
      "experiment", "Synthetic end-to-end comparison of raw vs normalized scoring");
  ExperimentConfig xc;
  experiment->add_option("--out", xc.out_dir, "Report directory");
  experiment->add_option("--dim", xc.dim, "i-vector dimension");
  experiment->add_option("--truth-f", xc.truth_f, "Ground-truth speaker dimension");
  experiment->add_option("--truth-g", xc.truth_g, "Ground-truth channel dimension");
  experiment->add_option("--f", xc.f, "Fitted speaker dimension");
  experiment->add_option("--g", xc.g, "Fitted channel dimension");
  experiment->add_option("--train-speakers", xc.n_train_speakers, "Training speakers");
  experiment->add_option("--train-vpk", xc.train_vpk_min, "Training vectors per speaker");
  experiment->add_option("--eval-speakers", xc.n_eval_speakers, "Evaluation speakers");
  experiment->add_option("--eval-vpk", xc.eval_vpk_min, "Evaluation vectors per speaker");
  experiment->add_option("--em-iters", xc.em_iters, "EM iterations");
  experiment->add_option("--truth-f-scale", xc.truth_f_scale, "Speaker loading scale");
  experiment->add_option("--truth-g-scale", xc.truth_g_scale, "Channel loading scale");
  experiment->add_option("--truth-sigma-min", xc.truth_sigma_min, "Smallest residual deviation");
  experiment->add_option("--truth-sigma-max", xc.truth_sigma_max, "Largest residual deviation");
  experiment->add_option("--beta", xc.beta, "False-acceptance cost weight")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--uniform-L", xc.uniform_L, "Uniform enrollment sizes");
  bool no_mixed = false, no_whiten = false, length_norm = false, no_write_scores = false;
  experiment->add_flag("--no-mixed", no_mixed, "Skip the mixed condition");
  experiment->add_flag("--no-whiten", no_whiten, "Skip whitening");
  experiment->add_flag("--length-norm", length_norm, "Length-normalize after whitening");
  experiment->add_flag("--no-write-scores", no_write_scores, "Skip the per-trial score files");
  experiment->add_option("--train-csv", xc.train_csv, "Use this training CSV instead of synthesis");
  experiment->add_option("--eval-csv", xc.eval_csv, "Use this evaluation CSV instead of synthesis");
  experiment->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }
  g.seed_given = app.count("--seed") > 0;

  try {
    if (*synth) return run_synth(g, synth_config, synth_out);
    if (*train) return run_train(g, train_data, train_f, train_g, train_iters,
                                 train_whiten, train_out);
    if (*score) return run_score(g, score_model, score_enroll, score_tests,
                                 score_trials, score_normalize, score_beta, score_out);
    if (*calibrate) return run_calibrate(g, cal_model, cal_enroll, cal_beta, cal_out);
    if (*eval) return run_eval(eval_scores, eval_trials, eval_beta);
    if (*experiment) {
      xc.seed = g.seed;
      xc.num_threads = g.threads;
      xc.train_vpk_max = xc.train_vpk_min;
      xc.eval_vpk_max = xc.eval_vpk_min;
      xc.include_mixed = !no_mixed;
      xc.whiten = !no_whiten;
      xc.length_norm = length_norm;
      xc.write_scores = !no_write_scores;
      xc.keep_trial_data = false;
      const ExperimentReport rep = run_experiment(xc);
      std::cout << compare_table(rep).text;
      return 0;
    }
  } catch (const InvalidInput &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ComputeError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
