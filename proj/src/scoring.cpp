// src/scoring.cpp

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

#include "pldanorm/scoring.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pldanorm {

static void check_trial_inputs(const DerivedOperators &ops, const Enrollment &e,
                               const Vector &test) {
  if (e.L < 1) throw InvalidInput("enrollment count L must be >= 1");
  if (e.i_sum.size() != ops.d())
    throw InvalidInput("enrollment vector dimension mismatch (got " +
                       std::to_string(e.i_sum.size()) + ", model d=" +
                       std::to_string(ops.d()) + ")");
  if (test.size() != ops.d())
    throw InvalidInput("test vector dimension mismatch (got " +
                       std::to_string(test.size()) + ", model d=" +
                       std::to_string(ops.d()) + ")");
}

double score_trial(const DerivedOperators &ops, const Enrollment &e, const Vector &test) {
  check_trial_inputs(ops, e, test);
  const auto &op_L = ops.operators_for(e.L);
  const auto &op_L1 = ops.operators_for(e.L + 1);
  const auto &op_1 = ops.operators_for(1);
  Vector joint = e.i_sum + test;
  double s = 0.5 * (joint.dot(op_L1.K * joint) - e.i_sum.dot(op_L.K * e.i_sum) -
                    test.dot(op_1.K * test)) +
             op_L.alpha;
  return s;
}

QuadraticForm quadratic_form(const DerivedOperators &ops, const Enrollment &e,
                             bool want_center) {
  if (e.L < 1) throw InvalidInput("enrollment count L must be >= 1");
  if (e.i_sum.size() != ops.d())
    throw InvalidInput("enrollment vector dimension mismatch");
  const auto &op_L = ops.operators_for(e.L);
  const auto &op_L1 = ops.operators_for(e.L + 1);
  const auto &op_1 = ops.operators_for(1);

  QuadraticForm qf;
  qf.A = op_L1.K - op_1.K;
  qf.b = op_L1.K * e.i_sum;
  qf.c = 0.5 * e.i_sum.dot((op_L1.K - op_L.K) * e.i_sum) + op_L.alpha;

  // A = Ubar F (M_{L+1}^{-1} - M_1^{-1}) F^T Ubar has rank <= f, so the
  // center -A^{-1} b exists only when f = d and F is full rank.
  if (want_center) {
    Eigen::FullPivLU<Matrix> lu(qf.A);
    if (lu.isInvertible()) qf.d_center = -lu.solve(qf.b);
  }
  return qf;
}

double evaluate_quadratic_form(const QuadraticForm &qf, const Vector &test) {
  if (test.size() != qf.b.size()) throw InvalidInput("test vector dimension mismatch");
  return 0.5 * test.dot(qf.A * test) + qf.b.dot(test) + qf.c;
}

std::vector<double> batch_score(const DerivedOperators &ops,
                                const std::vector<Enrollment> &enrollments,
                                const std::vector<Vector> &tests,
                                const std::vector<Trial> &trials,
                                int num_threads) {
  const int d = ops.d(), f = ops.f();
  for (const auto &t : trials) {
    if (t.model_index < 0 || t.model_index >= static_cast<int>(enrollments.size()))
      throw InvalidInput("trial refers to unknown model index " + std::to_string(t.model_index));
    if (t.test_index < 0 || t.test_index >= static_cast<int>(tests.size()))
      throw InvalidInput("trial refers to unknown test index " + std::to_string(t.test_index));
  }

  // Project everything into factor space once: z = F^T Ubar v.
  const Matrix &P = ops.UbarF();  // d x f
  Matrix Zm(enrollments.size(), f);
  for (std::size_t r = 0; r < enrollments.size(); ++r) {
    if (enrollments[r].i_sum.size() != d) throw InvalidInput("enrollment vector dimension mismatch");
    Zm.row(r) = (P.transpose() * enrollments[r].i_sum).transpose();
  }
  Matrix Zt(tests.size(), f);
  for (std::size_t j = 0; j < tests.size(); ++j) {
    if (tests[j].size() != d) throw InvalidInput("test vector dimension mismatch");
    Zt.row(j) = (P.transpose() * tests[j]).transpose();
  }

  // With z in factor space the score decomposes as
  //   s = const_r + w_r^T z_t + q_{t,L_r},
  // const_r = 1/2 z_r^T Minv_{L+1} z_r - 1/2 z_r^T Minv_L z_r + alpha(L),
  // w_r = Minv_{L+1} z_r,  q_{t,L} = 1/2 z_t^T (Minv_{L+1} - Minv_1) z_t.
  std::set<int> L_values;
  for (const auto &e : enrollments) {
    if (e.L < 1) throw InvalidInput("enrollment count L must be >= 1");
    L_values.insert(e.L);
  }
  const Matrix &Minv1 = ops.operators_for(1).M_inv;
  std::map<int, Matrix> q_by_L;  // per distinct L: column of q values per test
  for (int L : L_values) {
    Matrix N = ops.operators_for(L + 1).M_inv - Minv1;
    q_by_L[L] = 0.5 * ((Zt * N).cwiseProduct(Zt)).rowwise().sum();
  }

  std::vector<double> const_r(enrollments.size());
  Matrix W(enrollments.size(), f);
  for (std::size_t r = 0; r < enrollments.size(); ++r) {
    int L = enrollments[r].L;
    const auto &op_L = ops.operators_for(L);
    const auto &op_L1 = ops.operators_for(L + 1);
    Vector z = Zm.row(r).transpose();
    Vector w = op_L1.M_inv * z;
    W.row(r) = w.transpose();
    const_r[r] = 0.5 * z.dot(w) - 0.5 * z.dot(op_L.M_inv * z) + op_L.alpha;
  }

  std::vector<double> scores(trials.size());
  parallel_chunks(trials.size(), num_threads,
                  [&](std::size_t /*chunk*/, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Trial &t = trials[k];
      const Enrollment &e = enrollments[t.model_index];
      scores[k] = const_r[t.model_index] +
                  W.row(t.model_index).dot(Zt.row(t.test_index)) +
                  q_by_L.at(e.L)(t.test_index, 0);
    }
  });
  return scores;
}

}  // namespace pldanorm
