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

#ifndef MPPCA_DATASET_HPP
#define MPPCA_DATASET_HPP

#include <mppca/core.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mppca {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, 1>;
using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Quiet NaN stored in unobserved slots. Never read by the math: every
/// consumer consults the mask first.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// One sample with an observation mask (true = observed).
struct MaskedSample {
  Vector values;
  Mask observed;

  Index dim() const { return values.size(); }
  Index observed_count() const { return observed.count(); }
  bool complete() const { return observed.all(); }

  void validate() const {
    detail::require_shape(observed.size() == values.size(),
                          "mask length does not match sample length");
    if (observed_count() == 0) throw DataError("sample has no observed coordinates");
  }

  static MaskedSample complete_sample(const VectorRef& v) {
    return {v, Mask::Constant(v.size(), true)};
  }
};

/// N x d samples with per-entry mask and optional fault labels.
struct Dataset {
  Matrix values;     // N x d; kMissing where unobserved
  MaskMatrix observed;
  std::vector<std::string> column_names;
  std::optional<std::vector<bool>> fault_labels;
  std::string source;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  bool complete() const { return observed.all(); }

  MaskedSample sample(Index n) const {
    return {values.row(n).transpose(), observed.row(n).transpose()};
  }

  std::vector<MaskedSample> samples() const {
    std::vector<MaskedSample> out;
    out.reserve(static_cast<std::size_t>(rows()));
    for (Index n = 0; n < rows(); ++n) out.push_back(sample(n));
    return out;
  }

  void validate() const {
    detail::require_shape(observed.rows() == values.rows() && observed.cols() == values.cols(),
                          "mask shape does not match data shape");
    if (fault_labels) {
      detail::require_shape(static_cast<Index>(fault_labels->size()) == rows(),
                            "label count does not match row count");
    }
    if (!column_names.empty()) {
      detail::require_shape(static_cast<Index>(column_names.size()) == cols(),
                            "column name count does not match column count");
    }
  }

  static Dataset from_matrix(Matrix values) {
    Dataset ds;
    ds.observed = MaskMatrix::Constant(values.rows(), values.cols(), true);
    ds.values = std::move(values);
    return ds;
  }
};

}  // namespace mppca

#endif  // MPPCA_DATASET_HPP
