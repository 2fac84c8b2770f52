// src/score_stats.cpp

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

#include "pldanorm/score_stats.hpp"

namespace pldanorm {

// tr(X Y) for symmetric Y without forming the product.
static double trace_prod_sym(const Matrix &X, const Matrix &Y) {
  return X.cwiseProduct(Y).sum();
}

// tr((X Y)^2); forms one product.
static double trace_prod_sq(const Matrix &X, const Matrix &Y) {
  Matrix XY = X * Y;
  return XY.cwiseProduct(XY.transpose()).sum();
}

std::pair<double, double> quad_moments(const Matrix &Lambda, const Vector &mu_q,
                                       const Matrix &Sigma_q) {
  const auto n = Lambda.rows();
  if (Lambda.cols() != n || mu_q.size() != n || Sigma_q.rows() != n || Sigma_q.cols() != n)
    throw InvalidInput("quad_moments: dimension mismatch");
  Matrix LS = Lambda * Sigma_q;
  double mean = LS.trace() + mu_q.dot(Lambda * mu_q);
  Vector LSLmu = LS * (Lambda * mu_q);
  double variance = 2.0 * LS.cwiseProduct(LS.transpose()).sum() + 4.0 * mu_q.dot(LSLmu);
  return {mean, variance};
}

std::pair<double, double> nontarget_stats(const DerivedOperators &ops,
                                          const QuadraticForm &qf) {
  const Matrix &R = ops.R();
  if (qf.A.rows() != R.rows()) throw InvalidInput("nontarget_stats: dimension mismatch");
  double mu2 = 0.5 * trace_prod_sym(qf.A, R) + qf.c;
  double var2 = 0.5 * trace_prod_sq(qf.A, R) + qf.b.dot(R * qf.b);
  return {mu2, var2};
}

ConditionalTestDistribution conditional_test_distribution(const DerivedOperators &ops,
                                                          const Enrollment &e) {
  if (e.L < 1) throw InvalidInput("enrollment count L must be >= 1");
  if (e.i_sum.size() != ops.d()) throw InvalidInput("enrollment vector dimension mismatch");
  const auto &cond_ops = ops.conditional_for(e.L);
  ConditionalTestDistribution cond;
  cond.mu_hat = cond_ops.H * e.i_sum;
  cond.R_hat = cond_ops.Rhat;
  return cond;
}

std::pair<double, double> target_stats(const DerivedOperators &ops, const Enrollment &e,
                                       const QuadraticForm &qf,
                                       const ConditionalTestDistribution &cond) {
  (void)ops;
  (void)e;
  const Vector &mu = cond.mu_hat;
  const Matrix &Rh = cond.R_hat;
  if (qf.A.rows() != Rh.rows() || mu.size() != Rh.rows())
    throw InvalidInput("target_stats: dimension mismatch");
  // mu1 = 1/2 tr(A Rhat) - mu_hat^T A d + 1/2 mu_hat^T A mu_hat + c, with
  // A d = -b so the center never needs to be formed.
  Vector Amu = qf.A * mu;
  double mu1 = 0.5 * trace_prod_sym(qf.A, Rh) + qf.b.dot(mu) + 0.5 * mu.dot(Amu) + qf.c;
  // var1 = 1/2 tr((A Rhat)^2) + (d - mu_hat)^T A Rhat A (d - mu_hat); the
  // outer term is w^T Rhat w with w = A mu_hat + b.
  Vector w = Amu + qf.b;
  double var1 = 0.5 * trace_prod_sq(qf.A, Rh) + w.dot(Rh * w);
  return {mu1, var1};
}

SpeakerScoreStats speaker_stats(const DerivedOperators &ops, const Enrollment &e) {
  QuadraticForm qf = quadratic_form(ops, e, /*want_center=*/false);
  ConditionalTestDistribution cond = conditional_test_distribution(ops, e);
  auto [mu2, var2] = nontarget_stats(ops, qf);
  auto [mu1, var1] = target_stats(ops, e, qf, cond);
  SpeakerScoreStats stats;
  stats.speaker_id = e.speaker_id;
  stats.L = e.L;
  stats.mu1 = mu1;
  stats.var1 = var1;
  stats.mu2 = mu2;
  stats.var2 = var2;
  return stats;
}

}  // namespace pldanorm
