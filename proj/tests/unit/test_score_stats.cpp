// tests/unit/test_score_stats.cpp

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

#include <Eigen/Eigenvalues>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pldanorm/score_stats.hpp"

using namespace pldanorm;

namespace {

Vector random_vec(std::mt19937_64 &rng, int d, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = gauss(rng);
  return v;
}

Enrollment enrollment_of(std::mt19937_64 &rng, int d, int L, double scale = 1.5) {
  Enrollment e;
  e.speaker_id = "s";
  e.L = L;
  e.i_sum = random_vec(rng, d, scale);
  return e;
}

std::vector<Vector> split_enrollment(std::mt19937_64 &rng, const Enrollment &e) {
  // Any decomposition of i_sum into L vectors; the last one closes the sum.
  std::vector<Vector> out;
  Vector rest = e.i_sum;
  for (int k = 0; k + 1 < e.L; ++k) {
    Vector v = random_vec(rng, static_cast<int>(e.i_sum.size()));
    out.push_back(v);
    rest -= v;
  }
  out.push_back(rest);
  return out;
}

}  // namespace

TEST_SUITE("score_stats") {

TEST_CASE("quad_moments on frozen inputs") {
  SUBCASE("identity form, centered standard Gaussian") {
    const Matrix I2 = Matrix::Identity(2, 2);
    auto [mean, var] = quad_moments(I2, Vector::Zero(2), I2);
    CHECK(mean == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(var == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("zero form") {
    auto [mean, var] = quad_moments(Matrix::Zero(3, 3), Vector::Ones(3),
                                    Matrix::Identity(3, 3));
    CHECK(mean == 0.0);
    CHECK(var == 0.0);
  }
  SUBCASE("diagonal form with offset mean") {
    // Lambda = diag(2, 3), mu = (1, 0), Sigma = I:
    //   E = tr(Lambda) + 2 = 7,  Var = 2 (4 + 9) + 4 * 4 = 42.
    Matrix L = Matrix::Zero(2, 2);
    L(0, 0) = 2.0;
    L(1, 1) = 3.0;
    Vector mu(2);
    mu << 1.0, 0.0;
    auto [mean, var] = quad_moments(L, mu, Matrix::Identity(2, 2));
    CHECK(mean == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(var == doctest::Approx(42.0).epsilon(1e-14));
  }
}

TEST_CASE("quad_moments agrees with Monte Carlo") {
  std::mt19937_64 rng(21);
  const int d = 4;
  Matrix B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = random_vec(rng, 1)(0);
  const Matrix Lambda = 0.5 * (B + B.transpose());
  const Matrix C = B * B.transpose() + Matrix::Identity(d, d);
  const Vector mu = random_vec(rng, d);

  auto [mean, var] = quad_moments(Lambda, mu, C);
  const int n = 40000;
  std::vector<double> zs;
  zs.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Vector q = test_oracles::mvn_sample(rng, mu, C);
    zs.push_back(q.dot(Lambda * q));
  }
  const auto est = test_oracles::empirical_moments(zs);
  CHECK(std::abs(est.mean - mean) < 5.0 * est.se_mean);
  CHECK(std::abs(est.var - var) < 5.0 * est.se_var);
}

TEST_CASE("zero speaker loading collapses the non-target moments") {
  PldaParameters p;
  p.d = 3;
  p.f = 1;
  p.g = 1;
  p.m = Vector::Zero(3);
  p.F = Matrix::Zero(3, 1);
  p.G = Matrix::Ones(3, 1) * 0.4;
  p.Sigma = Vector::Constant(3, 0.8);
  DerivedOperators ops = derive_operators(p);
  std::mt19937_64 rng(22);
  const Enrollment e = enrollment_of(rng, 3, 2);
  const QuadraticForm qf = quadratic_form(ops, e, false);
  auto [mu2, var2] = nontarget_stats(ops, qf);
  CHECK(mu2 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(var2 == doctest::Approx(0.0).epsilon(1e-14));

  // The conditional test distribution degenerates to the marginal.
  const ConditionalTestDistribution cond = conditional_test_distribution(ops, e);
  CHECK(cond.mu_hat.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((cond.R_hat - ops.R()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conditional distribution matches blockwise conditioning") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 4 + static_cast<int>(rng() % 3);
    PldaParameters p = test_oracles::random_params(rng, d, 2, 2);
    DerivedOperators ops = derive_operators(p);
    for (int L = 1; L <= 4; ++L) {
      Enrollment e = enrollment_of(rng, d, L);
      const std::vector<Vector> parts = split_enrollment(rng, e);
      const ConditionalTestDistribution got = conditional_test_distribution(ops, e);
      const test_oracles::CondOracle want = test_oracles::conditional_oracle(p, parts);
      CHECK((got.mu_hat - want.mu).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((got.R_hat - want.cov).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("conditional covariance stays symmetric PSD over random models") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 6);
    const int f = 1 + static_cast<int>(rng() % d);
    const int g = static_cast<int>(rng() % (d + 1));
    PldaParameters p = test_oracles::random_params(rng, d, std::min(f, d), g);
    DerivedOperators ops = derive_operators(p);
    const int L = 1 + static_cast<int>(rng() % 5);
    const ConditionalTestDistribution cond =
        conditional_test_distribution(ops, enrollment_of(rng, d, L));
    CHECK((cond.R_hat - cond.R_hat.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cond.R_hat);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("non-target moments match Monte Carlo impostor scores") {
  std::mt19937_64 rng(25);
  PldaParameters p = test_oracles::random_params(rng, 5, 2, 2);
  DerivedOperators ops = derive_operators(p);
  const Enrollment e = enrollment_of(rng, 5, 3);
  const QuadraticForm qf = quadratic_form(ops, e, false);
  auto [mu2, var2] = nontarget_stats(ops, qf);

  const int n = 30000;
  std::vector<double> scores;
  scores.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Vector t = test_oracles::mvn_sample(rng, Vector::Zero(5), ops.R());
    scores.push_back(evaluate_quadratic_form(qf, t));
  }
  const auto est = test_oracles::empirical_moments(scores);
  CHECK(std::abs(est.mean - mu2) < 5.0 * est.se_mean);
  CHECK(std::abs(est.var - var2) < 5.0 * est.se_var);
}

TEST_CASE("target moments match Monte Carlo same-speaker scores") {
  std::mt19937_64 rng(26);
  PldaParameters p = test_oracles::random_params(rng, 5, 2, 2);
  DerivedOperators ops = derive_operators(p);
  const Enrollment e = enrollment_of(rng, 5, 2);
  const QuadraticForm qf = quadratic_form(ops, e, false);
  const ConditionalTestDistribution cond = conditional_test_distribution(ops, e);
  auto [mu1, var1] = target_stats(ops, e, qf, cond);

  // Same-speaker tests are drawn from the independently derived conditional
  // (blockwise oracle), not from the operators under test.
  const std::vector<Vector> parts = split_enrollment(rng, e);
  const test_oracles::CondOracle oracle = test_oracles::conditional_oracle(p, parts);
  const int n = 30000;
  std::vector<double> scores;
  scores.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Vector t = test_oracles::mvn_sample(rng, oracle.mu, oracle.cov);
    scores.push_back(evaluate_quadratic_form(qf, t));
  }
  const auto est = test_oracles::empirical_moments(scores);
  CHECK(std::abs(est.mean - mu1) < 5.0 * est.se_mean);
  CHECK(std::abs(est.var - var1) < 5.0 * est.se_var);
}

TEST_CASE("speaker_stats composes the pieces and keeps variances non-negative") {
  std::mt19937_64 rng(27);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 2 + static_cast<int>(rng() % 6);
    const int f = 1 + static_cast<int>(rng() % d);
    const int g = static_cast<int>(rng() % (d + 1));
    PldaParameters p = test_oracles::random_params(rng, d, f, g);
    DerivedOperators ops = derive_operators(p);
    Enrollment e = enrollment_of(rng, d, 1 + static_cast<int>(rng() % 4));
    e.speaker_id = "spk_x";
    const SpeakerScoreStats st = speaker_stats(ops, e);
    CHECK(st.speaker_id == "spk_x");
    CHECK(st.L == e.L);
    CHECK(st.var1 >= 0.0);
    CHECK(st.var2 >= 0.0);

    const QuadraticForm qf = quadratic_form(ops, e, false);
    auto [mu2, var2] = nontarget_stats(ops, qf);
    auto [mu1, var1] =
        target_stats(ops, e, qf, conditional_test_distribution(ops, e));
    CHECK(st.mu1 == mu1);
    CHECK(st.var1 == var1);
    CHECK(st.mu2 == mu2);
    CHECK(st.var2 == var2);
  }
}

TEST_CASE("stats depend on the enrollment only through the sum and count") {
  std::mt19937_64 rng(28);
  PldaParameters p = test_oracles::random_params(rng, 6, 3, 1);
  DerivedOperators ops = derive_operators(p);
  Enrollment e1 = enrollment_of(rng, 6, 3);
  Enrollment e2 = e1;
  e2.speaker_id = "other";
  const SpeakerScoreStats s1 = speaker_stats(ops, e1);
  const SpeakerScoreStats s2 = speaker_stats(ops, e2);
  CHECK(s1.mu1 == s2.mu1);
  CHECK(s1.var1 == s2.var1);
  CHECK(s1.mu2 == s2.mu2);
  CHECK(s1.var2 == s2.var2);
}

TEST_CASE("dimension mismatches are rejected") {
  std::mt19937_64 rng(29);
  PldaParameters p = test_oracles::random_params(rng, 4, 2, 1);
  DerivedOperators ops = derive_operators(p);
  Enrollment e;
  e.L = 1;
  e.i_sum = Vector::Zero(3);
  CHECK_THROWS_AS(speaker_stats(ops, e), InvalidInput);
  CHECK_THROWS_AS(conditional_test_distribution(ops, e), InvalidInput);
  CHECK_THROWS_AS(quad_moments(Matrix::Identity(2, 2), Vector::Zero(3),
                               Matrix::Identity(2, 2)),
                  InvalidInput);
}

}  // TEST_SUITE
