// pldanorm/io.hpp

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

// File formats (details in docs/formats.md):
//   i-vectors  CSV header id,speaker,dim_0..dim_{d-1}; the speaker column is
//              optional for unlabeled test sets.
//   trials     CSV header model_id,test_id[,key], key in {target, nontarget}.
//   scores     CSV header model_id,test_id,raw_score[,norm_score].
//   stats      CSV header speaker,L,mu1,var1,mu2,var2,threshold,scale.
//   model      container holding PLDA parameters and an optional whitening
//              transform; JSON when the path ends in .json, binary otherwise.

#ifndef PLDANORM_IO_HPP_
#define PLDANORM_IO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pldanorm/common.hpp"
#include "pldanorm/plda_model.hpp"
#include "pldanorm/preprocessing.hpp"
#include "pldanorm/training.hpp"

namespace pldanorm {

void write_ivector_csv(const std::string &path, const LabeledDataset &data);

/// Reads an i-vector CSV.  Without a speaker column the returned dataset has
/// an empty speakers vector and cannot be used for training.
LabeledDataset read_ivector_csv(const std::string &path);

struct TrialRecord {
  std::string model_id;
  std::string test_id;
  std::optional<bool> target;  // empty when the trial list is unlabeled
};

std::vector<TrialRecord> read_trials_csv(const std::string &path);
void write_trials_csv(const std::string &path, const std::vector<TrialRecord> &rows);

struct ScoreRow {
  std::string model_id;
  std::string test_id;
  double raw = 0.0;
  std::optional<double> norm;
};

void write_scores_csv(const std::string &path, const std::vector<ScoreRow> &rows);
std::vector<ScoreRow> read_scores_csv(const std::string &path);

struct SpeakerCalRow {
  std::string speaker_id;
  int L = 0;
  double mu1 = 0.0, var1 = 0.0, mu2 = 0.0, var2 = 0.0;
  double threshold = 0.0, scale = 0.0;
};

void write_stats_csv(const std::string &path, const std::vector<SpeakerCalRow> &rows);
std::vector<SpeakerCalRow> read_stats_csv(const std::string &path);

/// Everything a scoring run needs from disk in one file.
struct ModelContainer {
  std::optional<PldaParameters> plda;
  std::optional<WhiteningTransform> whitening;
  std::optional<std::uint64_t> seed;
};

void save_model_container(const std::string &path, const ModelContainer &c);
ModelContainer load_model_container(const std::string &path);

}  // namespace pldanorm

#endif  // PLDANORM_IO_HPP_
