// bindings/py_module.cpp

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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pldanorm/calibration.hpp"
#include "pldanorm/harness.hpp"
#include "pldanorm/io.hpp"
#include "pldanorm/plda_model.hpp"
#include "pldanorm/preprocessing.hpp"
#include "pldanorm/score_stats.hpp"
#include "pldanorm/scoring.hpp"
#include "pldanorm/synthgen.hpp"
#include "pldanorm/training.hpp"

namespace py = pybind11;
using namespace pldanorm;

namespace {

std::vector<Trial> to_trials(const std::vector<std::pair<int, int>> &pairs) {
  std::vector<Trial> out;
  out.reserve(pairs.size());
  for (const auto &[m, t] : pairs) out.push_back({m, t});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-factor PLDA scoring with blind per-speaker score normalization";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ComputeError>(m, "ComputeError", PyExc_RuntimeError);

  py::class_<PldaParameters>(m, "PldaParameters")
      .def(py::init<>())
      .def_readwrite("d", &PldaParameters::d)
      .def_readwrite("f", &PldaParameters::f)
      .def_readwrite("g", &PldaParameters::g)
      .def_readwrite("m", &PldaParameters::m)
      .def_readwrite("F", &PldaParameters::F)
      .def_readwrite("G", &PldaParameters::G)
      .def_readwrite("Sigma", &PldaParameters::Sigma)
      .def("validate", &PldaParameters::validate);

  py::class_<ScoreOperators>(m, "ScoreOperators")
      .def_readonly("M", &ScoreOperators::M)
      .def_readonly("M_inv", &ScoreOperators::M_inv)
      .def_readonly("logdet_M", &ScoreOperators::logdet_M)
      .def_readonly("K", &ScoreOperators::K)
      .def_readonly("alpha", &ScoreOperators::alpha);

  py::class_<DerivedOperators>(m, "DerivedOperators")
      .def(py::init<const PldaParameters &>(), py::arg("params"))
      .def_property_readonly("U", &DerivedOperators::U)
      .def_property_readonly("Ubar", &DerivedOperators::Ubar)
      .def_property_readonly("V", &DerivedOperators::V)
      .def_property_readonly("R", &DerivedOperators::R)
      .def("operators_for", &DerivedOperators::operators_for, py::arg("L"),
           py::return_value_policy::reference_internal);

  py::class_<Enrollment>(m, "Enrollment")
      .def(py::init<>())
      .def(py::init([](std::string speaker_id, Vector i_sum, int L) {
             Enrollment e;
             e.speaker_id = std::move(speaker_id);
             e.i_sum = std::move(i_sum);
             e.L = L;
             return e;
           }),
           py::arg("speaker_id"), py::arg("i_sum"), py::arg("L"))
      .def_readwrite("speaker_id", &Enrollment::speaker_id)
      .def_readwrite("i_sum", &Enrollment::i_sum)
      .def_readwrite("L", &Enrollment::L);

  py::class_<QuadraticForm>(m, "QuadraticForm")
      .def_readonly("A", &QuadraticForm::A)
      .def_readonly("b", &QuadraticForm::b)
      .def_readonly("c", &QuadraticForm::c)
      .def_readonly("d_center", &QuadraticForm::d_center);

  m.def("score_trial", &score_trial, py::arg("ops"), py::arg("enrollment"), py::arg("test"));
  m.def("quadratic_form", &quadratic_form, py::arg("ops"), py::arg("enrollment"),
        py::arg("want_center") = true);
  m.def("evaluate_quadratic_form", &evaluate_quadratic_form, py::arg("qf"), py::arg("test"));
  m.def(
      "batch_score",
      [](const DerivedOperators &ops, const std::vector<Enrollment> &enrollments,
         const std::vector<Vector> &tests, const std::vector<std::pair<int, int>> &trials,
         int num_threads) {
        return batch_score(ops, enrollments, tests, to_trials(trials), num_threads);
      },
      py::arg("ops"), py::arg("enrollments"), py::arg("tests"), py::arg("trials"),
      py::arg("num_threads") = 1);

  py::class_<SpeakerScoreStats>(m, "SpeakerScoreStats")
      .def(py::init<>())
      .def_readwrite("speaker_id", &SpeakerScoreStats::speaker_id)
      .def_readwrite("L", &SpeakerScoreStats::L)
      .def_readwrite("mu1", &SpeakerScoreStats::mu1)
      .def_readwrite("var1", &SpeakerScoreStats::var1)
      .def_readwrite("mu2", &SpeakerScoreStats::mu2)
      .def_readwrite("var2", &SpeakerScoreStats::var2);

  py::class_<ConditionalTestDistribution>(m, "ConditionalTestDistribution")
      .def_readonly("mu_hat", &ConditionalTestDistribution::mu_hat)
      .def_readonly("R_hat", &ConditionalTestDistribution::R_hat);

  m.def("conditional_test_distribution", &conditional_test_distribution, py::arg("ops"),
        py::arg("enrollment"));
  m.def("speaker_stats", &speaker_stats, py::arg("ops"), py::arg("enrollment"));
  m.def(
      "quad_moments",
      [](const Matrix &Lambda, const Vector &mu, const Matrix &Sigma) {
        return quad_moments(Lambda, mu, Sigma);
      },
      py::arg("Lambda"), py::arg("mu"), py::arg("Sigma"));

  py::class_<CalibratedSpeaker>(m, "CalibratedSpeaker")
      .def_readonly("stats", &CalibratedSpeaker::stats)
      .def_readonly("threshold", &CalibratedSpeaker::threshold)
      .def_readonly("scale", &CalibratedSpeaker::scale);

  m.def(
      "analytic_dcf",
      [](double t, const SpeakerScoreStats &stats, double beta) {
        return analytic_dcf(t, stats, DcfConfig{beta});
      },
      py::arg("t"), py::arg("stats"), py::arg("beta") = 100.0);
  m.def(
      "optimal_threshold",
      [](const SpeakerScoreStats &stats, double beta) {
        return optimal_threshold(stats, DcfConfig{beta});
      },
      py::arg("stats"), py::arg("beta") = 100.0);
  m.def(
      "sweep_threshold",
      [](const SpeakerScoreStats &stats, double beta, int n_points) {
        return sweep_threshold(stats, DcfConfig{beta}, n_points);
      },
      py::arg("stats"), py::arg("beta") = 100.0, py::arg("n_points") = 10000);
  m.def(
      "calibrate_speaker",
      [](const SpeakerScoreStats &stats, double beta, bool use_fallback) {
        return calibrate_speaker(stats, DcfConfig{beta}, use_fallback);
      },
      py::arg("stats"), py::arg("beta") = 100.0, py::arg("use_fallback") = false);
  m.def("normalize_score", &normalize_score, py::arg("score"), py::arg("calibrated"));
  m.def(
      "empirical_min_dcf",
      [](const std::vector<double> &targets, const std::vector<double> &nontargets,
         double beta) { return empirical_min_dcf(targets, nontargets, DcfConfig{beta}); },
      py::arg("target_scores"), py::arg("nontarget_scores"), py::arg("beta") = 100.0);

  py::class_<WhiteningTransform>(m, "WhiteningTransform")
      .def(py::init<>())
      .def_readwrite("mean", &WhiteningTransform::mean)
      .def_readwrite("W", &WhiteningTransform::W);

  m.def(
      "fit_whitening",
      [](const Matrix &data, double ridge) {
        WhiteningConfig cfg;
        cfg.ridge = ridge;
        return fit_whitening(data, cfg);
      },
      py::arg("data"), py::arg("ridge") = 0.0);
  m.def("apply_whitening",
        py::overload_cast<const WhiteningTransform &, const Matrix &>(&apply_whitening),
        py::arg("transform"), py::arg("data"));
  m.def("length_normalize", &length_normalize, py::arg("v"));

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init<>())
      .def_readwrite("X", &LabeledDataset::X)
      .def_readwrite("speakers", &LabeledDataset::speakers)
      .def_readwrite("ids", &LabeledDataset::ids)
      .def("build_index", &LabeledDataset::build_index)
      .def_property_readonly("num_vectors", &LabeledDataset::num_vectors)
      .def_property_readonly("num_speakers", &LabeledDataset::num_speakers);

  py::class_<EmResult>(m, "EmResult")
      .def_readonly("params", &EmResult::params)
      .def_readonly("log_likelihood_history", &EmResult::log_likelihood_history)
      .def_readonly("iters_run", &EmResult::iters_run);

  m.def(
      "em_fit",
      [](const LabeledDataset &data, int f, int g, int iters, std::uint64_t seed,
         double rel_tol, int num_threads) {
        EmConfig cfg;
        cfg.iters = iters;
        cfg.seed = seed;
        cfg.rel_tol = rel_tol;
        cfg.num_threads = num_threads;
        return em_fit(data, f, g, cfg);
      },
      py::arg("data"), py::arg("f"), py::arg("g"), py::arg("iters") = 50,
      py::arg("seed") = 0, py::arg("rel_tol") = 1e-6, py::arg("num_threads") = 1);
  m.def("log_likelihood", &log_likelihood, py::arg("params"), py::arg("data"));

  m.def("make_truth_model", &make_truth_model, py::arg("d"), py::arg("f"), py::arg("g"),
        py::arg("seed"), py::arg("f_scale") = 0.12, py::arg("g_scale") = 0.2,
        py::arg("sigma_min") = 0.2, py::arg("sigma_max") = 0.6);
  m.def(
      "sample_dataset",
      [](const PldaParameters &truth, int n_speakers, int vpk_min, int vpk_max,
         std::uint64_t seed, const std::string &prefix, int num_threads) {
        SynthConfig cfg;
        cfg.truth = truth;
        cfg.n_speakers = n_speakers;
        cfg.vpk_min = vpk_min;
        cfg.vpk_max = vpk_max;
        cfg.seed = seed;
        cfg.speaker_prefix = prefix;
        cfg.num_threads = num_threads;
        return sample_dataset(cfg);
      },
      py::arg("truth"), py::arg("n_speakers"), py::arg("vpk_min") = 1,
      py::arg("vpk_max") = 1, py::arg("seed") = 0, py::arg("prefix") = "spk",
      py::arg("num_threads") = 1);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("dim", &ExperimentConfig::dim)
      .def_readwrite("truth_f", &ExperimentConfig::truth_f)
      .def_readwrite("truth_g", &ExperimentConfig::truth_g)
      .def_readwrite("n_train_speakers", &ExperimentConfig::n_train_speakers)
      .def_readwrite("train_vpk_min", &ExperimentConfig::train_vpk_min)
      .def_readwrite("train_vpk_max", &ExperimentConfig::train_vpk_max)
      .def_readwrite("n_eval_speakers", &ExperimentConfig::n_eval_speakers)
      .def_readwrite("eval_vpk_min", &ExperimentConfig::eval_vpk_min)
      .def_readwrite("eval_vpk_max", &ExperimentConfig::eval_vpk_max)
      .def_readwrite("truth_f_scale", &ExperimentConfig::truth_f_scale)
      .def_readwrite("truth_g_scale", &ExperimentConfig::truth_g_scale)
      .def_readwrite("truth_sigma_min", &ExperimentConfig::truth_sigma_min)
      .def_readwrite("truth_sigma_max", &ExperimentConfig::truth_sigma_max)
      .def_readwrite("train_csv", &ExperimentConfig::train_csv)
      .def_readwrite("eval_csv", &ExperimentConfig::eval_csv)
      .def_readwrite("f", &ExperimentConfig::f)
      .def_readwrite("g", &ExperimentConfig::g)
      .def_readwrite("em_iters", &ExperimentConfig::em_iters)
      .def_readwrite("whiten", &ExperimentConfig::whiten)
      .def_readwrite("length_norm", &ExperimentConfig::length_norm)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("uniform_L", &ExperimentConfig::uniform_L)
      .def_readwrite("include_mixed", &ExperimentConfig::include_mixed)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("write_scores", &ExperimentConfig::write_scores)
      .def_readwrite("keep_trial_data", &ExperimentConfig::keep_trial_data)
      .def_readwrite("num_threads", &ExperimentConfig::num_threads);

  py::class_<SpeakerCalRow>(m, "SpeakerCalRow")
      .def_readonly("speaker_id", &SpeakerCalRow::speaker_id)
      .def_readonly("L", &SpeakerCalRow::L)
      .def_readonly("mu1", &SpeakerCalRow::mu1)
      .def_readonly("var1", &SpeakerCalRow::var1)
      .def_readonly("mu2", &SpeakerCalRow::mu2)
      .def_readonly("var2", &SpeakerCalRow::var2)
      .def_readonly("threshold", &SpeakerCalRow::threshold)
      .def_readonly("scale", &SpeakerCalRow::scale);

  py::class_<ConditionResult>(m, "ConditionResult")
      .def_readonly("name", &ConditionResult::name)
      .def_readonly("n_trials", &ConditionResult::n_trials)
      .def_readonly("n_targets", &ConditionResult::n_targets)
      .def_readonly("raw_min_dcf", &ConditionResult::raw_min_dcf)
      .def_readonly("raw_threshold", &ConditionResult::raw_threshold)
      .def_readonly("norm_min_dcf", &ConditionResult::norm_min_dcf)
      .def_readonly("norm_threshold", &ConditionResult::norm_threshold)
      .def_readonly("n_fallbacks", &ConditionResult::n_fallbacks)
      .def_readonly("speakers", &ConditionResult::speakers)
      .def_readonly("mean_threshold_by_L", &ConditionResult::mean_threshold_by_L)
      .def_readonly("model_ids", &ConditionResult::model_ids)
      .def_readonly("test_ids", &ConditionResult::test_ids)
      .def_property_readonly("trials",
                             [](const ConditionResult &c) {
                               std::vector<std::pair<int, int>> out;
                               out.reserve(c.trials.size());
                               for (const Trial &t : c.trials)
                                 out.emplace_back(t.model_index, t.test_index);
                               return out;
                             })
      .def_readonly("raw_scores", &ConditionResult::raw_scores)
      .def_readonly("norm_scores", &ConditionResult::norm_scores)
      .def_readonly("is_target", &ConditionResult::is_target);

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("seed", &ExperimentReport::seed)
      .def_readonly("dim", &ExperimentReport::dim)
      .def_readonly("f", &ExperimentReport::f)
      .def_readonly("g", &ExperimentReport::g)
      .def_readonly("n_train_speakers", &ExperimentReport::n_train_speakers)
      .def_readonly("n_train_vectors", &ExperimentReport::n_train_vectors)
      .def_readonly("n_model_speakers", &ExperimentReport::n_model_speakers)
      .def_readonly("n_tests", &ExperimentReport::n_tests)
      .def_readonly("beta", &ExperimentReport::beta)
      .def_readonly("train_ll", &ExperimentReport::train_ll)
      .def_readonly("conditions", &ExperimentReport::conditions);

  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<Histogram>(m, "Histogram")
      .def_readonly("edges", &Histogram::edges)
      .def_readonly("counts", &Histogram::counts);

  m.def("threshold_histogram", &threshold_histogram, py::arg("report"),
        py::arg("condition"), py::arg("bins") = 30);

  py::class_<ComparisonTable>(m, "ComparisonTable")
      .def_readonly("csv", &ComparisonTable::csv)
      .def_readonly("text", &ComparisonTable::text);

  m.def("compare_table", &compare_table, py::arg("report"));

  m.def("read_ivector_csv", &read_ivector_csv, py::arg("path"));
  m.def(
      "write_ivector_csv",
      [](const std::string &path, const LabeledDataset &data) {
        write_ivector_csv(path, data);
      },
      py::arg("path"), py::arg("data"));
}
