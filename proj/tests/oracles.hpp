// tests/oracles.hpp

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

// Independent reference implementations used only by tests.  Everything here
// works from explicit dense joint covariances and brute-force enumeration,
// never from the factored operators under test.

#ifndef PLDANORM_TESTS_ORACLES_HPP_
#define PLDANORM_TESTS_ORACLES_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pldanorm/plda_model.hpp"

namespace test_oracles {

using pldanorm::Matrix;
using pldanorm::PldaParameters;
using pldanorm::Vector;

inline double gauss_logpdf(const Vector &x, const Matrix &C) {
  Eigen::LLT<Matrix> llt(C);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double quad = x.dot(llt.solve(x));
  return -0.5 * (x.size() * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

// Joint covariance of n same-speaker vectors: block (i,j) is V + [i==j] U
// with U = G G^T + diag(Sigma), V = F F^T.
inline Matrix same_speaker_cov(const PldaParameters &p, int n) {
  const Matrix U =
      (p.g > 0 ? Matrix(p.G * p.G.transpose()) : Matrix(Matrix::Zero(p.d, p.d))) +
      Matrix(p.Sigma.asDiagonal());
  const Matrix V = p.F * p.F.transpose();
  Matrix C(n * p.d, n * p.d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      C.block(i * p.d, j * p.d, p.d, p.d) = (i == j) ? Matrix(U + V) : V;
  return C;
}

inline Vector stack(const std::vector<Vector> &vs) {
  Eigen::Index n = 0;
  for (const Vector &v : vs) n += v.size();
  Vector out(n);
  Eigen::Index at = 0;
  for (const Vector &v : vs) {
    out.segment(at, v.size()) = v;
    at += v.size();
  }
  return out;
}

// Brute-force same/different-speaker log-likelihood ratio from explicit block
// covariances: log p(enroll, test | same) - log p(enroll) - log p(test).
// Vectors must already be centered (zero model mean).
inline double joint_llr(const PldaParameters &p, const std::vector<Vector> &enroll,
                        const Vector &test) {
  const int L = static_cast<int>(enroll.size());
  std::vector<Vector> joint = enroll;
  joint.push_back(test);
  return gauss_logpdf(stack(joint), same_speaker_cov(p, L + 1)) -
         gauss_logpdf(stack(enroll), same_speaker_cov(p, L)) -
         gauss_logpdf(test, same_speaker_cov(p, 1));
}

struct CondOracle {
  Vector mu;
  Matrix cov;
};

// Distribution of the test vector given the enrollment under the same-speaker
// hypothesis, by generic blockwise conditioning of the (L+1)-block joint.
inline CondOracle conditional_oracle(const PldaParameters &p,
                                     const std::vector<Vector> &enroll) {
  const int L = static_cast<int>(enroll.size());
  const Matrix C = same_speaker_cov(p, L + 1);
  const int d = p.d;
  const Matrix C_bb = C.topLeftCorner(L * d, L * d);
  const Matrix C_tb = C.bottomLeftCorner(d, L * d);
  const Matrix C_tt = C.bottomRightCorner(d, d);
  Eigen::LLT<Matrix> llt(C_bb);
  const Vector iv = stack(enroll);
  CondOracle out;
  out.mu = C_tb * llt.solve(iv);
  out.cov = C_tt - C_tb * llt.solve(C_tb.transpose());
  return out;
}

inline PldaParameters random_params(std::mt19937_64 &rng, int d, int f, int g,
                                    double f_scale = 0.8, double g_scale = 0.5) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.4, 1.2);
  PldaParameters p;
  p.d = d;
  p.f = f;
  p.g = g;
  p.m = Vector::Zero(d);
  p.F = Matrix(d, f);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < f; ++j) p.F(i, j) = f_scale * gauss(rng);
  p.G = Matrix(d, g);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < g; ++j) p.G(i, j) = g_scale * gauss(rng);
  p.Sigma = Vector(d);
  for (int i = 0; i < d; ++i) p.Sigma(i) = unif(rng);
  p.validate();
  return p;
}

// Sampling through the eigendecomposition tolerates semidefinite covariances
// (conditional covariances can be numerically singular).
inline Vector mvn_sample(std::mt19937_64 &rng, const Vector &mu, const Matrix &cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
  const Vector scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mu + es.eigenvectors() * scale.cwiseProduct(z).matrix();
}

// O(n^2) reference for the empirical minimum detection cost.  A trial is
// accepted when score >= t.
inline std::pair<double, double> brute_min_dcf(const std::vector<double> &targets,
                                               const std::vector<double> &nontargets,
                                               double beta) {
  std::vector<double> all = targets;
  all.insert(all.end(), nontargets.begin(), nontargets.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<double> candidates;
  candidates.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    candidates.push_back(0.5 * (all[i] + all[i + 1]));
  candidates.push_back(all.back() + 1.0);

  double best = std::numeric_limits<double>::infinity();
  double best_t = candidates.front();
  for (double t : candidates) {
    long fr = 0, fa = 0;
    for (double s : targets)
      if (s < t) ++fr;
    for (double s : nontargets)
      if (s >= t) ++fa;
    const double dcf = static_cast<double>(fr) / targets.size() +
                       beta * static_cast<double>(fa) / nontargets.size();
    if (dcf < best) {
      best = dcf;
      best_t = t;
    }
  }
  return {best, best_t};
}

struct MomentEstimate {
  double mean = 0.0, var = 0.0;
  double se_mean = 0.0, se_var = 0.0;
};

inline MomentEstimate empirical_moments(const std::vector<double> &xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  MomentEstimate out;
  out.mean = mean;
  out.var = m2 * n / (n - 1.0);
  out.se_mean = std::sqrt(m2 / n);
  out.se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return out;
}

}  // namespace test_oracles

#endif  // PLDANORM_TESTS_ORACLES_HPP_
