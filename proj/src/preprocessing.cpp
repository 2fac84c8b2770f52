// src/preprocessing.cpp

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

#include "pldanorm/preprocessing.hpp"

#include <cmath>

namespace pldanorm {

WhiteningTransform fit_whitening(const Matrix &data, const WhiteningConfig &cfg) {
  const auto n = data.rows();
  const auto d = data.cols();
  if (n < d + 1)
    throw InvalidInput("whitening needs at least d+1 = " + std::to_string(d + 1) +
                       " vectors, got " + std::to_string(n));

  WhiteningTransform t;
  t.mean = data.colwise().mean();
  Matrix centered = data.rowwise() - t.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  if (cfg.ridge > 0.0) {
    double mean_var = cov.diagonal().mean();
    cov.diagonal().array() += cfg.ridge * mean_var;
  }

  // Symmetric (ZCA) inverse square root via eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw ComputeError("covariance eigendecomposition failed");
  const Vector &evals = eig.eigenvalues();
  double tol = 1e-12 * std::max(1.0, evals.cwiseAbs().maxCoeff());
  if (evals.minCoeff() <= tol)
    throw InvalidInput(
        "sample covariance is rank deficient; enable the ridge regularization option");
  Vector inv_sqrt = evals.array().rsqrt();
  t.W = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  return t;
}

Vector apply_whitening(const WhiteningTransform &t, const Vector &v) {
  if (v.size() != t.mean.size()) throw InvalidInput("whitening dimension mismatch");
  return t.W * (v - t.mean);
}

Matrix apply_whitening(const WhiteningTransform &t, const Matrix &data) {
  if (data.cols() != t.mean.size()) throw InvalidInput("whitening dimension mismatch");
  return (data.rowwise() - t.mean.transpose()) * t.W.transpose();
}

Vector length_normalize(const Vector &v) {
  double norm = v.norm();
  if (!(norm > 0.0)) throw InvalidInput("cannot length-normalize a zero vector");
  return v / norm;
}

}  // namespace pldanorm
