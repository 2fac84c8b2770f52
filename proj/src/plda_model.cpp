// src/plda_model.cpp

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

#include "pldanorm/plda_model.hpp"

#include <cmath>

namespace pldanorm {

void PldaParameters::validate() const {
  if (d <= 0) throw InvalidInput("d must be positive");
  if (f < 1 || f > d) throw InvalidInput("f must satisfy 1 <= f <= d");
  if (g < 0 || g > d) throw InvalidInput("g must satisfy 0 <= g <= d");
  if (m.size() != d) throw InvalidInput("m has wrong length");
  if (F.rows() != d || F.cols() != f)
    throw InvalidInput("F has wrong shape (expected " + std::to_string(d) + "x" +
                       std::to_string(f) + ", got " + std::to_string(F.rows()) + "x" +
                       std::to_string(F.cols()) + ")");
  if (G.rows() != d || G.cols() != g)
    throw InvalidInput("G has wrong shape (expected " + std::to_string(d) + "x" +
                       std::to_string(g) + ", got " + std::to_string(G.rows()) + "x" +
                       std::to_string(G.cols()) + ")");
  if (Sigma.size() != d) throw InvalidInput("Sigma has wrong length");
  for (int i = 0; i < d; ++i) {
    if (!(Sigma(i) > 0.0))
      throw InvalidInput("non-positive noise variance (Sigma[" + std::to_string(i) + "])");
  }
  if (!m.allFinite() || !F.allFinite() || !G.allFinite() || !Sigma.allFinite())
    throw InvalidInput("parameters contain non-finite values");
}

DerivedOperators::DerivedOperators(const PldaParameters &params) : params_(params) {
  params_.validate();
  const int d = params_.d;
  U_ = Matrix::Zero(d, d);
  if (params_.g > 0) U_ = params_.G * params_.G.transpose();
  U_.diagonal() += params_.Sigma;

  Eigen::LLT<Matrix> llt(U_);
  if (llt.info() != Eigen::Success)
    throw ComputeError("U = G G^T + Sigma is not positive definite");
  Ubar_ = llt.solve(Matrix::Identity(d, d));
  // llt.solve of the identity is symmetric only up to roundoff.
  Ubar_ = ((Ubar_ + Ubar_.transpose()) * 0.5).eval();

  V_ = params_.F * params_.F.transpose();
  R_ = V_ + U_;
  UbarF_ = Ubar_ * params_.F;
  FtUbarF_ = params_.F.transpose() * UbarF_;
  FtUbarF_ = ((FtUbarF_ + FtUbarF_.transpose()) * 0.5).eval();
}

const ScoreOperators &DerivedOperators::operators_for(int L) const {
  if (L < 1) throw InvalidInput("enrollment size L must be >= 1");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = score_cache_.find(L);
  if (it != score_cache_.end()) return *it->second;

  const int f = params_.f;
  auto ops = std::make_unique<ScoreOperators>();
  ops->M = static_cast<double>(L) * FtUbarF_ + Matrix::Identity(f, f);
  Eigen::LLT<Matrix> llt(ops->M);
  if (llt.info() != Eigen::Success)
    throw ComputeError("M_L is not positive definite");
  ops->M_inv = llt.solve(Matrix::Identity(f, f));
  ops->M_inv = ((ops->M_inv + ops->M_inv.transpose()) * 0.5).eval();
  ops->logdet_M = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  ops->K = UbarF_ * ops->M_inv * UbarF_.transpose();
  ops->K = ((ops->K + ops->K.transpose()) * 0.5).eval();

  // alpha(L) needs M_1 and M_{L+1}; compute their log-determinants in place
  // rather than recursing into the cache under the lock.
  auto logdet_M_of = [&](int n) {
    Matrix M = static_cast<double>(n) * FtUbarF_ + Matrix::Identity(f, f);
    Eigen::LLT<Matrix> l(M);
    return 2.0 * l.matrixLLT().diagonal().array().log().sum();
  };
  // The half factor makes the score equal to the joint-Gaussian
  // log-likelihood ratio; see scoring tests for the cross-check.
  ops->alpha = 0.5 * (ops->logdet_M + logdet_M_of(1) - logdet_M_of(L + 1));

  auto &ref = *ops;
  score_cache_.emplace(L, std::move(ops));
  return ref;
}

const ConditionalOperators &DerivedOperators::conditional_for(int L) const {
  if (L < 1) throw InvalidInput("enrollment size L must be >= 1");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cond_cache_.find(L);
  if (it != cond_cache_.end()) return *it->second;

  auto ops = std::make_unique<ConditionalOperators>();
  // Q = -(L V + U)^{-1} V Ubar;  H = V Ubar + L V Q.
  Matrix VUbar = V_ * Ubar_;
  Eigen::LLT<Matrix> llt(static_cast<double>(L) * V_ + U_);
  if (llt.info() != Eigen::Success)
    throw ComputeError("L V + U is not positive definite");
  Matrix Q = -llt.solve(VUbar);
  ops->H = VUbar + static_cast<double>(L) * V_ * Q;
  Matrix Rhat = R_ - static_cast<double>(L) * ops->H * V_;
  // Rhat is symmetric in exact arithmetic; the factored form above only
  // loses symmetry to roundoff.  Guard, then symmetrize.
  double asym = (Rhat - Rhat.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, Rhat.cwiseAbs().maxCoeff());
  if (asym > 1e-8 * scale)
    throw ComputeError("conditional covariance asymmetry exceeds tolerance");
  ops->Rhat = ((Rhat + Rhat.transpose()) * 0.5).eval();

  auto &ref = *ops;
  cond_cache_.emplace(L, std::move(ops));
  return ref;
}

DerivedOperators derive_operators(const PldaParameters &params) {
  return DerivedOperators(params);
}

}  // namespace pldanorm
