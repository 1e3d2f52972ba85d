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

#ifndef MPPCA_PIPELINE_HPP
#define MPPCA_PIPELINE_HPP

/*!@file
 * Offline learning and online monitoring end to end on Dataset values:
 * fit (fixed K or selected K), control limits on the training statistics,
 * then per-sample statistics and alarms for a test stream.
 */

#include <mppca/data_io.hpp>
#include <mppca/incomplete.hpp>
#include <mppca/mixture.hpp>
#include <mppca/monitoring.hpp>

#include <optional>
#include <vector>

namespace mppca {

struct TrainOptions {
  TrainingConfig config;
  bool select = false;  // choose K over config.k_range instead of using config.k
  double alpha = 0.99;
  StatisticForm form = StatisticForm::kPosteriorNormalized;
  bool standardize = false;
  bool allow_missing = true;
};

struct TrainOutcome {
  ModelArtifact artifact;
  TrainingReport report;
  std::optional<KSelection> selection;
};

namespace detail {

inline void require_missing_allowed(const Dataset& ds, bool allow) {
  if (!allow && !ds.complete()) {
    throw DataError(ds.source + ": data contains missing values and missing-data handling is off");
  }
}

inline Dataset prepared(const Dataset& ds, const std::optional<Standardization>& s) {
  Dataset out = ds;
  if (s) s->apply(out);
  return out;
}

}  // namespace detail

/// Global statistics of every row. Partially observed rows are completed by
/// conditional-mean imputation first.
inline std::vector<GlobalStatistics> score_dataset(const MixtureParams& m, const Dataset& ds,
                                                   StatisticForm form) {
  ds.validate();
  detail::require_shape(ds.cols() == m.dim(), "data has " + std::to_string(ds.cols()) +
                                                  " columns but the model expects " +
                                                  std::to_string(m.dim()));
  const MixtureFactor factor(m);
  std::vector<GlobalStatistics> out;
  out.reserve(static_cast<std::size_t>(ds.rows()));
  for (Index n = 0; n < ds.rows(); ++n) {
    const MaskedSample s = ds.sample(n);
    if (s.complete()) {
      out.push_back(global_statistics(factor, s.values, form));
    } else {
      out.push_back(global_statistics(factor, conditional_impute(m, s), form));
    }
  }
  return out;
}

/// Control limits from the statistics of (already standardized) normal data.
inline ThresholdSet thresholds_for(const ModelArtifact& a, const Dataset& normal, double alpha) {
  const Dataset ds = detail::prepared(normal, a.standardization);
  return fit_thresholds(score_dataset(a.params, ds, a.form), alpha);
}

inline TrainOutcome train(const Dataset& data, const TrainOptions& options) {
  data.validate();
  detail::require_missing_allowed(data, options.allow_missing);
  if (data.rows() < 2) throw DataError(data.source + ": training needs at least two samples");

  TrainOutcome out;
  ModelArtifact& a = out.artifact;
  if (options.standardize) a.standardization = fit_standardization(data);
  const Dataset ds = detail::prepared(data, a.standardization);
  const bool complete = ds.complete();
  const std::vector<MaskedSample> samples = complete ? std::vector<MaskedSample>{} : ds.samples();

  TrainingConfig config = options.config;
  config.q = complete ? resolve_latent_dim(ds.values, config) : resolve_latent_dim(mean_fill(samples), config);
  if (options.select) {
    out.selection = complete ? select_k(ds.values, config) : select_k_missing(samples, config);
    for (auto& c : out.selection->candidates) {
      HEntry e{c.k, std::nullopt};
      if (c.report) e.h = c.report->h_value;
      a.training.h_table.push_back(e);
      if (c.k == out.selection->best_k) out.report = *c.report;
    }
    config.k = out.selection->best_k;
  } else {
    out.report = complete ? em_fit(ds.values, config) : em_fit_missing(samples, config);
  }

  a.params = out.report.params;
  a.form = options.form;
  a.column_names = ds.column_names;
  a.training.config = config;
  a.training.log_likelihood = out.report.log_likelihood_trace.back();
  a.training.iterations = out.report.iterations_used;
  a.training.converged = out.report.converged;
  a.training.h_value = out.report.h_value;
  a.thresholds = fit_thresholds(score_dataset(a.params, ds, a.form), options.alpha);
  return out;
}

/// Per-sample statistics, limits and alarms, in input order.
inline StatisticsTable monitor(const ModelArtifact& a, const Dataset& data,
                               DetectionMode mode = DetectionMode::kCombined,
                               bool allow_missing = true) {
  if (!a.thresholds) throw DataError("model has no control limits; run threshold first");
  detail::require_missing_allowed(data, allow_missing);
  const Dataset ds = detail::prepared(data, a.standardization);
  const auto stats = score_dataset(a.params, ds, a.form);
  const ThresholdSet& th = *a.thresholds;
  StatisticsTable t;
  for (std::size_t n = 0; n < stats.size(); ++n) {
    const GlobalStatistics& g = stats[n];
    t.index.push_back(static_cast<std::int64_t>(n));
    t.t2.push_back(g.t2);
    t.spe.push_back(g.spe);
    t.tc2.push_back(g.tc2);
    t.j_t2.push_back(th.j_t2);
    t.j_spe.push_back(th.j_spe);
    t.j_tc2.push_back(th.j_tc2);
    t.alarm.push_back(detect(g, th, mode).alarm);
  }
  return t;
}

}  // namespace mppca

#endif  // MPPCA_PIPELINE_HPP
