// tests/unit/test_synthgen.cpp

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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pldanorm/synthgen.hpp"

using namespace pldanorm;

namespace {

Matrix sample_covariance(const Matrix &data) {
  Matrix centered = data.rowwise() - data.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

}  // namespace

TEST_SUITE("synthgen") {

TEST_CASE("pure-noise truth yields near-identity pooled covariance") {
  PldaParameters truth;
  truth.d = 4;
  truth.f = 1;
  truth.g = 0;
  truth.m = Vector::Zero(4);
  truth.F = Matrix::Zero(4, 1);
  truth.G = Matrix(4, 0);
  truth.Sigma = Vector::Ones(4);

  SynthConfig cfg;
  cfg.truth = truth;
  cfg.n_speakers = 2500;
  cfg.vpk_min = cfg.vpk_max = 4;
  cfg.seed = 61;
  const LabeledDataset data = sample_dataset(cfg);
  REQUIRE(data.num_vectors() == 10000);
  CHECK(Vector(data.X.colwise().mean()).cwiseAbs().maxCoeff() < 0.05);
  CHECK((sample_covariance(data.X) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("pooled covariance approaches F F^T + G G^T + Sigma") {
  std::mt19937_64 rng(62);
  const PldaParameters truth = test_oracles::random_params(rng, 4, 2, 1);
  SynthConfig cfg;
  cfg.truth = truth;
  cfg.n_speakers = 20000;
  cfg.vpk_min = cfg.vpk_max = 5;
  cfg.seed = 62;
  const LabeledDataset data = sample_dataset(cfg);
  REQUIRE(data.num_vectors() == 100000);

  const Matrix want = truth.F * truth.F.transpose() + truth.G * truth.G.transpose() +
                      Matrix(truth.Sigma.asDiagonal());
  CHECK((sample_covariance(data.X) - want).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("sampling is reproducible and thread-count independent") {
  std::mt19937_64 rng(63);
  SynthConfig cfg;
  cfg.truth = test_oracles::random_params(rng, 5, 2, 1);
  cfg.n_speakers = 40;
  cfg.vpk_min = 2;
  cfg.vpk_max = 6;
  cfg.seed = 99;

  const LabeledDataset a = sample_dataset(cfg);
  const LabeledDataset b = sample_dataset(cfg);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.ids == b.ids);
  CHECK(a.speakers == b.speakers);

  cfg.num_threads = 3;
  const LabeledDataset c = sample_dataset(cfg);
  CHECK((a.X - c.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.ids == c.ids);

  // Per-speaker counts respect the configured range.
  for (const auto &rows : a.speaker_rows) {
    CHECK(rows.size() >= 2);
    CHECK(rows.size() <= 6);
  }
  CHECK(a.num_speakers() == 40);
  CHECK(a.ids[0] == "spk_00000_v000");
}

TEST_CASE("mixed condition reproduces the reference bucket sizes") {
  SUBCASE("exact at 683 speakers") {
    const EnrollmentConditionSpec spec = mixed_condition(683);
    REQUIRE(spec.buckets.size() == 5);
    const int want[5] = {94, 93, 194, 189, 113};
    for (int i = 0; i < 5; ++i) {
      CHECK(spec.buckets[i].L == i + 1);
      CHECK(spec.buckets[i].n_speakers == want[i]);
    }
  }
  SUBCASE("largest-remainder rounding at 100 speakers") {
    const EnrollmentConditionSpec spec = mixed_condition(100);
    const int want[5] = {14, 14, 28, 28, 16};
    for (int i = 0; i < 5; ++i) CHECK(spec.buckets[i].n_speakers == want[i]);
  }
  SUBCASE("sizes always sum to the speaker count") {
    std::mt19937_64 rng(64);
    for (int rep = 0; rep < 100; ++rep) {
      const int n = 5 + static_cast<int>(rng() % 1000);
      const EnrollmentConditionSpec spec = mixed_condition(n);
      int total = 0;
      for (const auto &b : spec.buckets) {
        total += b.n_speakers;
        CHECK(b.n_speakers >= 0);
      }
      CHECK(total == n);
    }
  }
}

TEST_CASE("uniform condition is a single bucket with a stable name") {
  const EnrollmentConditionSpec spec = uniform_condition(3, 120);
  CHECK(spec.name == "L3");
  REQUIRE(spec.buckets.size() == 1);
  CHECK(spec.buckets[0].L == 3);
  CHECK(spec.buckets[0].n_speakers == 120);
  CHECK_THROWS_AS(uniform_condition(0, 10), InvalidInput);
}

TEST_CASE("build_conditions partitions enrollment pool and tests") {
  std::mt19937_64 rng(65);
  SynthConfig cfg;
  cfg.truth = test_oracles::random_params(rng, 4, 2, 1);
  cfg.n_speakers = 30;
  cfg.vpk_min = cfg.vpk_max = 8;
  cfg.seed = 7;
  const LabeledDataset data = sample_dataset(cfg);

  EnrollmentConditionSpec spec;
  spec.name = "mixed_small";
  spec.buckets = {{1, 10}, {3, 12}, {5, 8}};
  const EnrollmentCondition cond = build_conditions(data, spec, 123, 5);

  REQUIRE(cond.enrollments.size() == 30);
  // Bucket membership in spec order.
  for (int k = 0; k < 10; ++k) CHECK(cond.enrollments[k].L == 1);
  for (int k = 10; k < 22; ++k) CHECK(cond.enrollments[k].L == 3);
  for (int k = 22; k < 30; ++k) CHECK(cond.enrollments[k].L == 5);

  // No speaker enrolled twice.
  std::set<std::string> enrolled;
  for (const auto &e : cond.enrollments) CHECK(enrolled.insert(e.speaker_id).second);

  // With reserve 5 and 8 vectors per speaker, 3 tests per speaker remain and
  // they are exactly the vectors indexed v005 and later.
  REQUIRE(cond.test_ids.size() == 90);
  for (std::size_t k = 0; k < cond.test_ids.size(); ++k) {
    const std::string &id = cond.test_ids[k];
    const int v = std::stoi(id.substr(id.size() - 3));
    CHECK(v >= 5);
    CHECK(cond.test_speakers[k] == id.substr(0, id.find("_v")));
  }

  // Each enrollment sum is the sum of the speaker's first L vectors.
  for (const auto &e : cond.enrollments) {
    const auto it = std::find(data.speaker_ids.begin(), data.speaker_ids.end(),
                              e.speaker_id);
    REQUIRE(it != data.speaker_ids.end());
    const auto &rows = data.speaker_rows[it - data.speaker_ids.begin()];
    Vector want = Vector::Zero(4);
    for (int j = 0; j < e.L; ++j) want += data.X.row(rows[j]);
    CHECK((e.i_sum - want).cwiseAbs().maxCoeff() < 1e-14);
  }

  // Same seed, same assignment; the test block never depends on the seed.
  const EnrollmentCondition again = build_conditions(data, spec, 123, 5);
  for (std::size_t k = 0; k < cond.enrollments.size(); ++k)
    CHECK(again.enrollments[k].speaker_id == cond.enrollments[k].speaker_id);
  const EnrollmentCondition other = build_conditions(data, spec, 124, 5);
  CHECK(other.test_ids == cond.test_ids);
  CHECK((other.test_vectors - cond.test_vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conditions sharing a reserve share the test set") {
  std::mt19937_64 rng(66);
  SynthConfig cfg;
  cfg.truth = test_oracles::random_params(rng, 3, 1, 1);
  cfg.n_speakers = 12;
  cfg.vpk_min = cfg.vpk_max = 7;
  cfg.seed = 8;
  const LabeledDataset data = sample_dataset(cfg);

  const EnrollmentCondition c1 = build_conditions(data, uniform_condition(1, 12), 5, 5);
  const EnrollmentCondition c5 = build_conditions(data, uniform_condition(5, 12), 5, 5);
  CHECK(c1.test_ids == c5.test_ids);
  CHECK((c1.test_vectors - c5.test_vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_conditions rejects impossible requests") {
  std::mt19937_64 rng(67);
  SynthConfig cfg;
  cfg.truth = test_oracles::random_params(rng, 3, 1, 0);
  cfg.n_speakers = 6;
  cfg.vpk_min = cfg.vpk_max = 3;
  cfg.seed = 9;
  const LabeledDataset data = sample_dataset(cfg);

  // reserve defaults to L = 3, and 3 + 1 vectors are not available.
  CHECK_THROWS_WITH_AS(build_conditions(data, uniform_condition(3, 6), 1),
                       doctest::Contains("spk_00000"), InvalidInput);
  CHECK_THROWS_WITH_AS(build_conditions(data, uniform_condition(2, 9), 1),
                       doctest::Contains("the model set has 6"), InvalidInput);
  CHECK_THROWS_WITH_AS(build_conditions(data, uniform_condition(4, 6), 1, 2),
                       doctest::Contains("exceeds the reserved pool"), InvalidInput);

  EnrollmentConditionSpec empty;
  empty.name = "none";
  CHECK_THROWS_WITH_AS(build_conditions(data, empty, 1),
                       doctest::Contains("no buckets"), InvalidInput);
}

TEST_CASE("make_truth_model honors its ranges and is seeded") {
  const PldaParameters a = make_truth_model(10, 3, 2, 5, 0.4, 0.3, 0.2, 0.6);
  const PldaParameters b = make_truth_model(10, 3, 2, 5, 0.4, 0.3, 0.2, 0.6);
  CHECK((a.F - b.F).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.Sigma - b.Sigma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.Sigma.minCoeff() >= 0.2);
  CHECK(a.Sigma.maxCoeff() <= 0.6);
  const PldaParameters c = make_truth_model(10, 3, 2, 6, 0.4, 0.3, 0.2, 0.6);
  CHECK((a.F - c.F).cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(make_truth_model(4, 5, 0, 1), InvalidInput);
  CHECK_THROWS_AS(make_truth_model(4, 2, 0, 1, 0.1, 0.1, 0.0, 0.5), InvalidInput);
}

}  // TEST_SUITE
