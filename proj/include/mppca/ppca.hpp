// Copyright 2026 The mppca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPPCA_PPCA_HPP
#define MPPCA_PPCA_HPP

/*!@file
 * Single probabilistic PCA model t = W x + mu + e, with x ~ N(0, I) and
 * e ~ N(0, sigma2 I). The marginal of t is N(mu, C) with
 * C = sigma2 I + W W^T, and the latent posterior is
 * N(M^-1 W^T (t - mu), sigma2 M^-1) with M = sigma2 I + W^T W.
 *
 * Nothing here forms or inverts the d x d matrix C. Quadratic forms use
 * C^-1 = (I - W M^-1 W^T) / sigma2 and determinants use
 * ln|C| = (d - q) ln sigma2 + ln|M|, both through a Cholesky factor of M.
 */

#include <mppca/core.hpp>

#include <string>
#include <utility>

namespace mppca {

/// Default relative noise floor: sigma2 >= kDefaultNoiseFloor * trace(S) / d.
inline constexpr double kDefaultNoiseFloor = 1e-10;

struct PpcaParams {
  Matrix W;        // d x q loading matrix
  Vector mu;       // length d
  double sigma2 = 1.0;

  Index dim() const { return W.rows(); }
  Index latent_dim() const { return W.cols(); }

  /// Throws ShapeError / DataError if the parameter invariants are violated.
  void validate() const {
    detail::require_shape(W.cols() >= 1 && W.cols() < W.rows(),
                          "PPCA latent dimension must satisfy 1 <= q < d");
    detail::require_shape(mu.size() == W.rows(),
                          "PPCA mean length does not match loading rows");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
      throw DataError("PPCA noise variance must be positive and finite");
    }
    if (!W.allFinite() || !mu.allFinite()) {
      throw DataError("PPCA parameters contain non-finite values");
    }
  }
};

struct PosteriorMoments {
  Vector mean;            // <x>
  Matrix second_moment;   // <x x^T>
};

/// M = sigma2 I + W^T W (q x q).
inline Matrix inner_matrix(const PpcaParams& p) {
  Matrix m = p.W.transpose() * p.W;
  m.diagonal().array() += p.sigma2;
  return m;
}

/// C = sigma2 I + W W^T (d x d).
inline Matrix model_covariance(const PpcaParams& p) {
  p.validate();
  Matrix c = p.W * p.W.transpose();
  c.diagonal().array() += p.sigma2;
  return 0.5 * (c + c.transpose());
}

/// Precomputed factorization of one PPCA model.
///
/// Holds the Cholesky factor of M, ln|C| and M^-1. Cheap to build
/// (O(d q^2)); build once per model and reuse across samples.
class PpcaFactor {
 public:
  explicit PpcaFactor(PpcaParams p) : params_(std::move(p)) {
    params_.validate();
    const Matrix m = inner_matrix(params_);
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) {
      throw DataError("M = sigma2 I + W^T W is not positive definite");
    }
    const auto d = static_cast<double>(params_.dim());
    const auto q = static_cast<double>(params_.latent_dim());
    const double log_det_m =
        2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_det_c_ = (d - q) * std::log(params_.sigma2) + log_det_m;
    m_inv_ = llt_.solve(Matrix::Identity(params_.latent_dim(), params_.latent_dim()));
    m_inv_ = 0.5 * (m_inv_ + m_inv_.transpose());
  }

  const PpcaParams& params() const { return params_; }
  const Matrix& m_inverse() const { return m_inv_; }
  double log_det_covariance() const { return log_det_c_; }

  /// M^-1 W^T z for a centered vector z.
  Vector latent_mean(const VectorRef& z) const {
    return llt_.solve(params_.W.transpose() * z);
  }

  /// z^T C^-1 z for a centered vector z.
  double mahalanobis(const VectorRef& z) const {
    const Vector a = params_.W.transpose() * z;
    const Vector b = llt_.solve(a);
    return (z.squaredNorm() - a.dot(b)) / params_.sigma2;
  }

  double log_density(const VectorRef& t) const {
    check_dim(t);
    const Vector z = t - params_.mu;
    return -0.5 * (static_cast<double>(params_.dim()) * kLog2Pi + log_det_c_ +
                   mahalanobis(z));
  }

  /// C^-1 via the Woodbury identity.
  Matrix inverse_covariance() const {
    const Matrix& w = params_.W;
    Matrix inv = -w * m_inv_ * w.transpose();
    inv.diagonal().array() += 1.0;
    inv /= params_.sigma2;
    return 0.5 * (inv + inv.transpose());
  }

  void check_dim(const VectorRef& t) const {
    detail::require_shape(t.size() == params_.dim(),
                          "sample length " + std::to_string(t.size()) +
                              " does not match model dimension " +
                              std::to_string(params_.dim()));
  }

 private:
  PpcaParams params_;
  Eigen::LLT<Matrix> llt_;
  Matrix m_inv_;
  double log_det_c_ = 0.0;
};

inline double log_density(const PpcaParams& p, const VectorRef& t) {
  return PpcaFactor(p).log_density(t);
}

inline PosteriorMoments posterior_moments(const PpcaParams& p,
                                          const VectorRef& t) {
  const PpcaFactor f(p);
  f.check_dim(t);
  PosteriorMoments out;
  out.mean = f.latent_mean(t - p.mu);
  out.second_moment = p.sigma2 * f.m_inverse() + out.mean * out.mean.transpose();
  return out;
}

/// Sum of per-sample log densities over the rows of `data`.
inline double log_likelihood(const PpcaParams& p, DataRef data) {
  if (data.rows() == 0) throw DataError("log-likelihood of empty data");
  const PpcaFactor f(p);
  double total = 0.0;
  for (Index n = 0; n < data.rows(); ++n) total += f.log_density(data.row(n).transpose());
  return total;
}

/// Maximum-likelihood PPCA from a mean and covariance.
///
/// W = U_q (L_q - sigma2 I)^{1/2}, sigma2 = mean of the d - q smallest
/// eigenvalues, clamped below at noise_floor * trace(S) / d.
inline PpcaParams ppca_from_moments(const Vector& mean, const Matrix& cov,
                                    Index q,
                                    double noise_floor = kDefaultNoiseFloor,
                                    double absolute_floor = 0.0) {
  const Index d = cov.rows();
  detail::require_shape(q >= 1 && q < d,
                        "latent dimension must satisfy 1 <= q < d (q=" +
                            std::to_string(q) + ", d=" + std::to_string(d) + ")");
  const SymmetricEigen eig = sorted_eigen(cov);
  const double floor =
      std::max(noise_floor * cov.trace() / static_cast<double>(d), absolute_floor);
  double sigma2 = eig.values.tail(d - q).mean();
  sigma2 = std::max(sigma2, floor);
  if (!(sigma2 > 0.0)) {
    throw DataError("data has zero variance; PPCA noise variance undefined");
  }
  PpcaParams p;
  p.mu = mean;
  p.sigma2 = sigma2;
  p.W = eig.vectors.leftCols(q);
  for (Index j = 0; j < q; ++j) {
    p.W.col(j) *= std::sqrt(std::max(eig.values(j) - sigma2, 0.0));
  }
  return p;
}

inline PpcaParams fit_ppca_closed_form(DataRef data, Index q,
                                       double noise_floor = kDefaultNoiseFloor) {
  const Vector mean = column_mean(data);
  return ppca_from_moments(mean, sample_covariance(data, mean), q, noise_floor);
}

}  // namespace mppca

#endif  // MPPCA_PPCA_HPP
