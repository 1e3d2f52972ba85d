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

#ifndef MPPCA_CORE_HPP
#define MPPCA_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mppca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Data matrices are N x d: one sample per row.
using DataRef = Eigen::Ref<const Matrix>;
using VectorRef = Eigen::Ref<const Vector>;

/// Inputs whose dimensions disagree with the model or with each other.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Data that cannot support the requested computation (empty, degenerate).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed files or violated schema invariants on read.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

// log(sum(exp(v))) with max subtraction; -inf for an all -inf input.
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const double peak = v.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((v.array() - peak).exp().sum());
}

}  // namespace detail

/// Symmetric eigendecomposition with deterministic ordering.
///
/// Eigenvalues are sorted descending. Each eigenvector is sign-normalized so
/// that its largest-magnitude component is positive. Exactly equal
/// eigenvalues are ordered by ascending index of their first nonzero
/// eigenvector component.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;  // columns
};

inline SymmetricEigen sorted_eigen(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw DataError("symmetric eigendecomposition failed");
  }
  const Index n = symmetric.rows();
  Matrix vecs = solver.eigenvectors();
  const Vector& vals = solver.eigenvalues();

  std::vector<Index> first_nonzero(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    auto col = vecs.col(j);
    Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
    const double tiny = 1e-12 * col.cwiseAbs().maxCoeff();
    Index first = 0;
    while (first < n && std::abs(col(first)) <= tiny) ++first;
    first_nonzero[static_cast<std::size_t>(j)] = first;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (vals(a) != vals(b)) return vals(a) > vals(b);
    return first_nonzero[static_cast<std::size_t>(a)] <
           first_nonzero[static_cast<std::size_t>(b)];
  });

  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Index j = 0; j < n; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    out.values(j) = vals(src);
    out.vectors.col(j) = vecs.col(src);
  }
  return out;
}

/// Column means of an N x d data matrix.
inline Vector column_mean(DataRef data) {
  if (data.rows() == 0) throw DataError("empty data");
  return data.colwise().mean().transpose();
}

/// Sample covariance about the column mean, normalized by N.
inline Matrix sample_covariance(DataRef data, const Vector& mean) {
  const Matrix centered = data.rowwise() - mean.transpose();
  Matrix s = (centered.transpose() * centered) / static_cast<double>(data.rows());
  return 0.5 * (s + s.transpose());
}

}  // namespace mppca

#endif  // MPPCA_CORE_HPP
