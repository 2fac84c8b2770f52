// src/training.cpp

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

#include "pldanorm/training.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>

namespace pldanorm {

namespace {

std::vector<std::vector<int>> group_rows(const std::vector<std::string> &speakers,
                                         std::vector<std::string> *ids_out) {
  std::unordered_map<std::string, int> index;
  std::vector<std::vector<int>> groups;
  for (int r = 0; r < static_cast<int>(speakers.size()); ++r) {
    auto [it, inserted] = index.emplace(speakers[r], static_cast<int>(groups.size()));
    if (inserted) {
      groups.emplace_back();
      if (ids_out) ids_out->push_back(speakers[r]);
    }
    groups[it->second].push_back(r);
  }
  return groups;
}

void check_dataset(const LabeledDataset &data) {
  if (data.X.rows() == 0) throw InvalidInput("dataset is empty");
  if (static_cast<Eigen::Index>(data.speakers.size()) != data.X.rows())
    throw InvalidInput("speaker label count does not match the number of vectors");
  if (!data.ids.empty() && static_cast<Eigen::Index>(data.ids.size()) != data.X.rows())
    throw InvalidInput("vector id count does not match the number of vectors");
}

// Sums along with the accumulated sufficient statistics of one E-step chunk.
struct EmAccum {
  Matrix Suu;  // (f+g) x (f+g), sum over vectors of E[u u^T], u = [x; y_k]
  Matrix Sfu;  // d x (f+g), sum over vectors of phi_k E[u_k]^T
  void init(int d, int fg) {
    Suu = Matrix::Zero(fg, fg);
    Sfu = Matrix::Zero(d, fg);
  }
};

}  // namespace

void LabeledDataset::build_index() {
  check_dataset(*this);
  speaker_ids.clear();
  speaker_rows = group_rows(speakers, &speaker_ids);
}

double log_likelihood(const PldaParameters &p, const LabeledDataset &data) {
  check_dataset(data);
  if (data.dim() != p.d)
    throw InvalidInput("dataset dimension does not match the model");
  const std::vector<std::vector<int>> groups = group_rows(data.speakers, nullptr);

  DerivedOperators ops(p);
  const Matrix Phi = data.X.rowwise() - p.m.transpose();

  Eigen::LLT<Matrix> llt_U(ops.U());
  if (llt_U.info() != Eigen::Success)
    throw ComputeError("within-speaker covariance U is not positive definite");
  const double logdet_U = 2.0 * llt_U.matrixLLT().diagonal().array().log().sum();

  // Mahalanobis part that does not depend on the grouping.
  const Matrix UbarPhiT = ops.Ubar() * Phi.transpose();        // d x n
  const double quad_all = (Phi.transpose().cwiseProduct(UbarPhiT)).sum();

  // z_k = F^T Ubar phi_k for every vector; grouped sums reuse these columns.
  const Matrix Z = p.F.transpose() * UbarPhiT;  // f x n

  const double log2pi = std::log(2.0 * std::numbers::pi);
  double ll = -0.5 * data.num_vectors() * (p.d * log2pi + logdet_U) - 0.5 * quad_all;

  std::map<int, std::pair<double, Eigen::LLT<Matrix>>> by_n;  // logdet M_n, chol M_n
  for (const auto &rows : groups) {
    const int n = static_cast<int>(rows.size());
    auto it = by_n.find(n);
    if (it == by_n.end()) {
      Matrix M = static_cast<double>(n) * ops.FtUbarF() + Matrix::Identity(p.f, p.f);
      Eigen::LLT<Matrix> llt(M);
      if (llt.info() != Eigen::Success)
        throw ComputeError("posterior precision M is not positive definite");
      const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      it = by_n.emplace(n, std::make_pair(logdet, std::move(llt))).first;
    }
    Vector z_sum = Vector::Zero(p.f);
    for (int r : rows) z_sum += Z.col(r);
    ll += -0.5 * it->second.first + 0.5 * z_sum.dot(it->second.second.solve(z_sum));
  }
  return ll;
}

EmResult em_fit(const LabeledDataset &data, int f, int g, const EmConfig &cfg) {
  check_dataset(data);
  const int d = data.dim();
  const int n_total = data.num_vectors();
  if (f < 1 || f > d) throw InvalidInput("f must satisfy 1 <= f <= dim");
  if (g < 0 || g > d) throw InvalidInput("g must satisfy 0 <= g <= dim");
  if (cfg.iters < 1) throw InvalidInput("iters must be >= 1");

  const std::vector<std::vector<int>> groups = group_rows(data.speakers, nullptr);
  if (groups.size() < 2)
    throw InvalidInput("training needs at least two distinct speakers");

  const int fg = f + g;
  PldaParameters p;
  p.d = d;
  p.f = f;
  p.g = g;
  p.m = data.X.colwise().mean();

  const Matrix Phi = data.X.rowwise() - p.m.transpose();  // n x d, centered
  const Vector sq_sum = Phi.cwiseProduct(Phi).colwise().sum();
  const Vector var = sq_sum / static_cast<double>(n_total);
  const double avg_var = var.mean();
  const double sigma_floor = 1e-8 * std::max(avg_var, 1e-8);

  // Moment-matched initialization: the between-speaker scatter seeds F and
  // the within-speaker scatter seeds G and Sigma, so the iteration budget is
  // spent refining factor directions instead of finding them from noise.
  const int n_speakers = static_cast<int>(groups.size());
  Matrix between = Matrix::Zero(d, d);
  Matrix within = Matrix::Zero(d, d);
  double inv_n_mean = 0.0;
  for (const auto &rows : groups) {
    const int n = static_cast<int>(rows.size());
    Vector mu = Vector::Zero(d);
    for (int r : rows) mu += Phi.row(r).transpose();
    mu /= static_cast<double>(n);
    between += mu * mu.transpose();
    for (int r : rows) {
      const Vector dev = Phi.row(r).transpose() - mu;
      within += dev * dev.transpose();
    }
    inv_n_mean += 1.0 / n;
  }
  inv_n_mean /= n_speakers;
  between /= static_cast<double>(std::max(n_speakers - 1, 1));
  if (n_total > n_speakers)
    within /= static_cast<double>(n_total - n_speakers);
  else
    within = avg_var * Matrix::Identity(d, d);  // every speaker is a singleton
  // Speaker means carry within-speaker noise attenuated by 1/n.
  between -= inv_n_mean * within;

  const double eig_floor = 1e-3 * std::max(avg_var, 1e-8);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_b(0.5 * (between + between.transpose()));
  if (eig_b.info() != Eigen::Success)
    throw ComputeError("between-speaker scatter decomposition failed");
  p.F = Matrix(d, f);
  for (int j = 0; j < f; ++j) {
    const double lam = std::max(eig_b.eigenvalues()(d - 1 - j), eig_floor);
    p.F.col(j) = eig_b.eigenvectors().col(d - 1 - j) * std::sqrt(lam);
  }
  p.G = Matrix(d, g);
  if (g > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig_w(within);
    if (eig_w.info() != Eigen::Success)
      throw ComputeError("within-speaker scatter decomposition failed");
    double tail = 0.0;
    for (int i = 0; i < d - g; ++i) tail += eig_w.eigenvalues()(i);
    if (d > g) tail /= static_cast<double>(d - g);
    for (int j = 0; j < g; ++j) {
      const double lam = std::max(eig_w.eigenvalues()(d - 1 - j) - tail, eig_floor);
      p.G.col(j) = eig_w.eigenvectors().col(d - 1 - j) * std::sqrt(lam);
    }
    p.Sigma = (within.diagonal() - (p.G * p.G.transpose()).diagonal())
                  .cwiseMax(sigma_floor);
  } else {
    p.Sigma = within.diagonal().cwiseMax(sigma_floor);
  }
  p.validate();

  EmResult result;
  bool converged = false;
  for (int iter = 0; iter < cfg.iters; ++iter) {
    const double ll = log_likelihood(p, data);
    result.log_likelihood_history.push_back(ll);
    if (iter > 0) {
      const double prev = result.log_likelihood_history[iter - 1];
      if (ll - prev < cfg.rel_tol * std::abs(prev)) {
        converged = true;
        break;
      }
    }

    // E-step operators shared by all speakers this iteration.
    const Vector Si = p.Sigma.cwiseInverse();
    const Matrix FtSi = p.F.transpose() * Si.asDiagonal();  // f x d
    const Matrix GtSi = p.G.transpose() * Si.asDiagonal();  // g x d
    const Matrix B = FtSi * p.G;                            // f x g
    Matrix D = Matrix::Identity(g, g) + GtSi * p.G;
    D = 0.5 * (D + D.transpose()).eval();
    Eigen::LLT<Matrix> llt_D(D);
    if (g > 0 && llt_D.info() != Eigen::Success)
      throw ComputeError("channel posterior precision is not positive definite");
    const Matrix Dinv = g > 0 ? Matrix(llt_D.solve(Matrix::Identity(g, g))) : Matrix(0, 0);
    const Matrix BDi = B * Dinv;                // f x g
    const Matrix DiGtSi = Dinv * GtSi;          // g x d
    const Matrix Proj = FtSi - BDi * GtSi;      // f x d, gives E[x] from phi_sum
    Matrix W = FtSi * p.F - BDi * B.transpose();
    W = 0.5 * (W + W.transpose()).eval();

    // Posterior covariance blocks depend only on the group size n.
    struct PerN {
      Matrix Cx, Cxy, Cyy;
    };
    std::map<int, PerN> per_n;
    for (const auto &rows : groups) {
      const int n = static_cast<int>(rows.size());
      if (per_n.count(n)) continue;
      Matrix S = Matrix::Identity(f, f) + static_cast<double>(n) * W;
      Eigen::LLT<Matrix> llt_S(S);
      if (llt_S.info() != Eigen::Success)
        throw ComputeError("speaker posterior precision is not positive definite");
      PerN pn;
      pn.Cx = llt_S.solve(Matrix::Identity(f, f));
      pn.Cxy = -pn.Cx * BDi;
      pn.Cyy = Dinv + BDi.transpose() * pn.Cx * BDi;
      per_n.emplace(n, std::move(pn));
    }

    // Accumulate sufficient statistics; one accumulator per chunk, merged in
    // chunk order so sums do not depend on the thread count.
    std::vector<EmAccum> accums(num_chunks(groups.size()));
    parallel_chunks(groups.size(), cfg.num_threads,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      EmAccum &acc = accums[chunk];
      acc.init(d, fg);
      for (std::size_t s = begin; s < end; ++s) {
        const auto &rows = groups[s];
        const int n = static_cast<int>(rows.size());
        const PerN &pn = per_n.at(n);
        Matrix Pg(n, d);
        for (int i = 0; i < n; ++i) Pg.row(i) = Phi.row(rows[i]);
        const Vector phi_sum = Pg.colwise().sum();
        const Vector xh = pn.Cx * (Proj * phi_sum);
        Matrix Yh(n, g);
        if (g > 0) {
          Yh = Pg * DiGtSi.transpose();
          Yh.rowwise() -= (BDi.transpose() * xh).transpose();
        }
        acc.Suu.topLeftCorner(f, f) += n * (pn.Cx + xh * xh.transpose());
        if (g > 0) {
          const Vector y_sum = Yh.colwise().sum();
          acc.Suu.topRightCorner(f, g) += n * pn.Cxy + xh * y_sum.transpose();
          acc.Suu.bottomRightCorner(g, g) += n * pn.Cyy + Yh.transpose() * Yh;
          acc.Sfu.rightCols(g) += Pg.transpose() * Yh;
        }
        acc.Sfu.leftCols(f) += phi_sum * xh.transpose();
      }
    });
    Matrix Suu = Matrix::Zero(fg, fg);
    Matrix Sfu = Matrix::Zero(d, fg);
    for (const EmAccum &acc : accums) {
      Suu += acc.Suu;
      Sfu += acc.Sfu;
    }
    Suu.bottomLeftCorner(g, f) = Suu.topRightCorner(f, g).transpose();
    Suu = 0.5 * (Suu + Suu.transpose()).eval();

    // M-step: T solves T Suu = Sfu; Sigma keeps only the diagonal residual.
    Eigen::LDLT<Matrix> ldlt_Suu(Suu);
    if (ldlt_Suu.info() != Eigen::Success)
      throw ComputeError("factor moment matrix is singular in the M-step");
    const Matrix T = ldlt_Suu.solve(Sfu.transpose()).transpose();  // d x (f+g)
    p.F = T.leftCols(f);
    p.G = T.rightCols(g);
    p.Sigma = ((sq_sum - T.cwiseProduct(Sfu).rowwise().sum()) /
               static_cast<double>(n_total)).cwiseMax(sigma_floor);
    ++result.iters_run;
  }
  if (!converged)
    result.log_likelihood_history.push_back(log_likelihood(p, data));

  result.params = std::move(p);
  return result;
}

}  // namespace pldanorm
