// pldanorm/preprocessing.hpp

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

#ifndef PLDANORM_PREPROCESSING_HPP
#define PLDANORM_PREPROCESSING_HPP

#include <vector>

#include "pldanorm/common.hpp"

namespace pldanorm {

/// Whitening fitted on a training set: v -> W (v - mean) with W the inverse
/// symmetric square root of the sample covariance, so the whitened training
/// data has identity covariance.
struct WhiteningTransform {
  Vector mean;  // d
  Matrix W;     // d x d
};

struct WhiteningConfig {
  /// Adds ridge * mean_variance * I to the covariance before inversion;
  /// for near-rank-deficient training sets.  0 disables.
  double ridge = 0.0;
};

/// Fits on the rows of data (n x d).  Requires n >= d + 1 and a full-rank
/// sample covariance; rank deficiency raises InvalidInput suggesting the
/// ridge option.
WhiteningTransform fit_whitening(const Matrix &data, const WhiteningConfig &cfg = {});

Vector apply_whitening(const WhiteningTransform &t, const Vector &v);

/// Rows transformed in one pass.
Matrix apply_whitening(const WhiteningTransform &t, const Matrix &data);

/// v / ||v||; throws on the zero vector.
Vector length_normalize(const Vector &v);

}  // namespace pldanorm

#endif  // PLDANORM_PREPROCESSING_HPP
