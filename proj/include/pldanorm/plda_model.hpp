// pldanorm/plda_model.hpp

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

#ifndef PLDANORM_PLDA_MODEL_HPP
#define PLDANORM_PLDA_MODEL_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "pldanorm/common.hpp"

namespace pldanorm {

/// Two-factor PLDA generative model.  An i-vector of speaker x is
///   i_n = m + F x + G y_n + e_n,
/// with x ~ N(0, I_f) shared across the speaker's vectors, per-vector channel
/// factor y_n ~ N(0, I_g) and residual e_n ~ N(0, Sigma), Sigma diagonal.
struct PldaParameters {
  int d = 0;  // i-vector dimension
  int f = 0;  // speaker factor dimension (columns of F)
  int g = 0;  // channel factor dimension (columns of G; may be 0)
  Vector m;       // d
  Matrix F;       // d x f
  Matrix G;       // d x g
  Vector Sigma;   // d, diagonal of the noise covariance, strictly positive

  /// Throws InvalidInput naming the offending field if shapes are
  /// inconsistent, Sigma has a non-positive entry, or anything is non-finite.
  void validate() const;
};

/// Per-enrollment-size operators entering the verification score:
///   M_L = L F^T Ubar F + I_f,   K_L = Ubar F M_L^{-1} F^T Ubar,
/// and the score offset alpha(L).
struct ScoreOperators {
  Matrix M;        // f x f
  Matrix M_inv;    // f x f
  double logdet_M = 0.0;
  Matrix K;        // d x d
  double alpha = 0.0;  // alpha(L); see DerivedOperators::operators_for
};

/// Operators of the conditional test distribution under the target
/// hypothesis, reused by score statistics.  H_L = V Ubar + L V Q with
/// Q = -(L V + U)^{-1} V Ubar, so that mu_hat = H_L i, and
/// Rhat_L = R - L H_L V (symmetrized).
struct ConditionalOperators {
  Matrix H;      // d x d
  Matrix Rhat;   // d x d, symmetric PSD
};

/// Caches everything derived from the parameters that scoring and score
/// statistics need: U = G G^T + Sigma, Ubar = U^{-1}, V = F F^T, and the
/// per-L operator families.  Immutable after construction except for the
/// internal caches, which are populated on demand under a lock (idempotent
/// compute, so concurrent readers are fine).
class DerivedOperators {
 public:
  explicit DerivedOperators(const PldaParameters &params);

  const PldaParameters &params() const { return params_; }
  const Matrix &U() const { return U_; }
  const Matrix &Ubar() const { return Ubar_; }
  const Matrix &V() const { return V_; }
  /// R = V + U, the marginal i-vector covariance.
  const Matrix &R() const { return R_; }
  /// Ubar F, the d x f projection shared by every K_L.
  const Matrix &UbarF() const { return UbarF_; }
  /// F^T Ubar F, the f x f Gram matrix that builds every M_L.
  const Matrix &FtUbarF() const { return FtUbarF_; }

  int d() const { return params_.d; }
  int f() const { return params_.f; }
  int g() const { return params_.g; }

  /// Operators for enrollment size L >= 1 (use L+1 for the joint side of the
  /// score).  alpha(L) is the log-determinant ratio
  ///   alpha(L) = 1/2 log[ det M_L det M_1 / det M_{L+1} ],
  /// the constant that makes the score an exact log-likelihood ratio.
  const ScoreOperators &operators_for(int L) const;

  /// Conditional-distribution operators for enrollment size L >= 1.
  const ConditionalOperators &conditional_for(int L) const;

  double alpha(int L) const { return operators_for(L).alpha; }

 private:
  PldaParameters params_;
  Matrix U_, Ubar_, V_, R_, UbarF_, FtUbarF_;

  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<ScoreOperators>> score_cache_;
  mutable std::map<int, std::unique_ptr<ConditionalOperators>> cond_cache_;
};

/// Validates and wraps parameters.  U must be invertible, which holds for any
/// Sigma with positive entries.
DerivedOperators derive_operators(const PldaParameters &params);

}  // namespace pldanorm

#endif  // PLDANORM_PLDA_MODEL_HPP
