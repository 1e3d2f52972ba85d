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

#ifndef MPPCA_INCOMPLETE_HPP
#define MPPCA_INCOMPLETE_HPP

/*!@file
 * Training and monitoring with missing sensor values, assuming values are
 * missing completely at random.
 *
 * For a sample with observed block o and unobserved block u, each local
 * model's marginal is N(mu_o, C_oo) with C_oo = sigma2 I + W_o W_o^T, and the
 * conditional mean of the unobserved block is
 *   mu_u + W_u W_o^T C_oo^-1 (t_o - mu_o).
 * C_oo is handled through M_o = sigma2 I + W_o^T W_o, as in ppca.hpp.
 *
 * Monitoring imputes first and then scores the completed vector, so one
 * ThresholdSet fitted on complete data stays valid for every mask.
 */

#include <mppca/core.hpp>
#include <mppca/dataset.hpp>
#include <mppca/mixture.hpp>
#include <mppca/monitoring.hpp>
#include <mppca/ppca.hpp>

#include <string>
#include <utility>
#include <vector>

namespace mppca {

namespace detail {

inline std::vector<Index> observed_indices(const Mask& mask) {
  std::vector<Index> idx;
  for (Index j = 0; j < mask.size(); ++j) {
    if (mask(j)) idx.push_back(j);
  }
  return idx;
}

/// One local model restricted to an observation pattern.
class MarginalModel {
 public:
  MarginalModel(const PpcaParams& p, const MaskedSample& s) : params_(&p) {
    s.validate();
    require_shape(s.dim() == p.dim(), "sample length does not match model dimension");
    obs_ = observed_indices(s.observed);
    const auto n_obs = static_cast<Index>(obs_.size());
    const Index q = p.latent_dim();
    w_obs_ = Matrix(n_obs, q);
    resid_ = Vector(n_obs);
    for (Index r = 0; r < n_obs; ++r) {
      const Index j = obs_[static_cast<std::size_t>(r)];
      w_obs_.row(r) = p.W.row(j);
      resid_(r) = s.values(j) - p.mu(j);
    }
    Matrix m = w_obs_.transpose() * w_obs_;
    m.diagonal().array() += p.sigma2;
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) throw DataError("observed-block M is not positive definite");
  }

  double log_density() const {
    const auto n_obs = static_cast<double>(obs_.size());
    const auto q = static_cast<double>(params_->latent_dim());
    const double log_det_m =
        2.0 * llt_.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double log_det = (n_obs - q) * std::log(params_->sigma2) + log_det_m;
    const Vector a = w_obs_.transpose() * resid_;
    const double quad = (resid_.squaredNorm() - a.dot(llt_.solve(a))) / params_->sigma2;
    return -0.5 * (n_obs * kLog2Pi + log_det + quad);
  }

  /// Full-length vector: observed entries copied, unobserved entries set to
  /// the conditional mean mu_u + W_u M_o^-1 W_o^T (t_o - mu_o).
  Vector conditional_fill(const MaskedSample& s) const {
    const PpcaParams& p = *params_;
    const Vector latent = llt_.solve(w_obs_.transpose() * resid_);
    Vector out = s.values;
    for (Index j = 0; j < s.dim(); ++j) {
      if (!s.observed(j)) out(j) = p.mu(j) + p.W.row(j).dot(latent);
    }
    return out;
  }

  /// Adds weight * Cov(t_u | t_o) = weight * sigma2 (I + W_u M_o^-1 W_u^T)
  /// into the unobserved block of the d x d matrix `scatter`.
  void add_conditional_covariance(const MaskedSample& s, double weight, Matrix& scatter) const {
    const PpcaParams& p = *params_;
    std::vector<Index> unobs;
    for (Index j = 0; j < s.dim(); ++j) {
      if (!s.observed(j)) unobs.push_back(j);
    }
    const auto n_unobs = static_cast<Index>(unobs.size());
    Matrix w_u(n_unobs, p.latent_dim());
    for (Index r = 0; r < n_unobs; ++r) w_u.row(r) = p.W.row(unobs[static_cast<std::size_t>(r)]);
    Matrix cov = w_u * llt_.solve(w_u.transpose());
    cov.diagonal().array() += 1.0;
    cov *= p.sigma2 * weight;
    for (Index a = 0; a < n_unobs; ++a) {
      for (Index b = 0; b < n_unobs; ++b) {
        scatter(unobs[static_cast<std::size_t>(a)], unobs[static_cast<std::size_t>(b)]) += cov(a, b);
      }
    }
  }

 private:
  const PpcaParams* params_;
  std::vector<Index> obs_;
  Matrix w_obs_;
  Vector resid_;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace detail

/// Gaussian log-density of the observed sub-vector.
inline double marginal_log_density(const PpcaParams& p, const MaskedSample& s) {
  s.validate();
  if (s.complete()) return log_density(p, s.values);
  p.validate();
  return detail::MarginalModel(p, s).log_density();
}

/// Mixture marginal log-density ln sum_i pi_i p(t_o | i), and optionally the
/// per-component responsibilities given the observed block.
inline double mixture_marginal_log_density(const MixtureParams& m, const MaskedSample& s,
                                           Vector* weights = nullptr) {
  Vector joint(m.num_components());
  for (Index i = 0; i < m.num_components(); ++i) {
    joint(i) = std::log(m.pi(i)) + marginal_log_density(m.locals[static_cast<std::size_t>(i)], s);
  }
  Vector r(m.num_components());
  const double total = normalize_log_row(joint, Vector(m.pi.array().log()), r);
  if (weights) *weights = std::move(r);
  return total;
}

/// Responsibility-weighted conditional-mean imputation. Observed entries
/// are returned unchanged.
inline Vector conditional_impute(const MixtureParams& m, const MaskedSample& s) {
  s.validate();
  detail::require_shape(s.dim() == m.dim(), "sample length does not match model dimension");
  if (s.complete()) return s.values;
  Vector weights;
  mixture_marginal_log_density(m, s, &weights);
  Vector out = s.values;
  for (Index j = 0; j < s.dim(); ++j) {
    if (!s.observed(j)) out(j) = 0.0;
  }
  for (Index i = 0; i < m.num_components(); ++i) {
    if (weights(i) == 0.0) continue;
    const detail::MarginalModel local(m.locals[static_cast<std::size_t>(i)], s);
    const Vector filled = local.conditional_fill(s);
    for (Index j = 0; j < s.dim(); ++j) {
      if (!s.observed(j)) out(j) += weights(i) * filled(j);
    }
  }
  return out;
}

/// Observed-data log-likelihood sum_n ln p(t_n,o).
inline double observed_log_likelihood(const MixtureParams& m,
                                      const std::vector<MaskedSample>& samples) {
  double total = 0.0;
  for (const auto& s : samples) total += mixture_marginal_log_density(m, s);
  return total;
}

/// Complete matrix with every unobserved entry replaced by its column mean
/// over observed entries. Throws if a column is never observed.
inline Matrix mean_fill(const std::vector<MaskedSample>& samples) {
  if (samples.empty()) throw DataError("no samples");
  const Index d = samples.front().dim();
  Vector sum = Vector::Zero(d);
  Vector count = Vector::Zero(d);
  for (const auto& s : samples) {
    detail::require_shape(s.dim() == d, "samples have inconsistent lengths");
    for (Index j = 0; j < d; ++j) {
      if (s.observed(j)) {
        sum(j) += s.values(j);
        count(j) += 1.0;
      }
    }
  }
  for (Index j = 0; j < d; ++j) {
    if (count(j) == 0.0) {
      throw DataError("coordinate " + std::to_string(j) + " is never observed; it is unidentifiable");
    }
  }
  const Vector mean = sum.cwiseQuotient(count);
  Matrix out(static_cast<Index>(samples.size()), d);
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto& s = samples[n];
    for (Index j = 0; j < d; ++j) out(static_cast<Index>(n), j) = s.observed(j) ? s.values(j) : mean(j);
  }
  return out;
}

/// EM with missing values.
///
/// Each iteration treats the unobserved entries as latent alongside the
/// component labels: responsibilities come from the observed-block
/// marginals, each component imputes the missing entries with its own
/// conditional mean, and its scatter matrix S_i also receives the
/// conditional covariance of the missing block. The two-stage update then
/// runs on those completed statistics. The trace holds the observed-data
/// log-likelihood, which does not decrease. Fully observed input is handed
/// to em_fit unchanged.
inline TrainingReport em_fit_missing(const std::vector<MaskedSample>& samples,
                                     const TrainingConfig& config) {
  config.validate();
  const Matrix mean_filled = mean_fill(samples);
  bool complete = true;
  for (const auto& s : samples) {
    s.validate();
    complete = complete && s.complete();
  }
  if (complete) return em_fit(mean_filled, config);

  const Index n_samples = mean_filled.rows();
  const Index d = mean_filled.cols();
  const Index q = resolve_latent_dim(mean_filled, config);
  const double floor_abs = detail::noise_floor_for(mean_filled, config.sigma2_floor);

  TrainingReport report;
  report.params = initialize(mean_filled, config.k, q, config.seed, config.sigma2_floor, config.init, 10,
                             config.kmeans_restarts);
  const Index k = report.params.num_components();
  for (int iteration = 0;; ++iteration) {
    MixtureParams& m = report.params;
    Matrix resp(n_samples, k);
    Vector log_marginal(n_samples);
    std::vector<Matrix> filled(static_cast<std::size_t>(k), mean_filled);
    std::vector<Matrix> extra(static_cast<std::size_t>(k), Matrix::Zero(d, d));
    const Vector log_pi = m.pi.array().log();
    const MixtureFactor factor(m);

    for (Index n = 0; n < n_samples; ++n) {
      const MaskedSample& s = samples[static_cast<std::size_t>(n)];
      Vector joint(k);
      if (s.complete()) {
        joint = factor.component_log_densities(s.values) + log_pi;
        log_marginal(n) = normalize_log_row(joint, log_pi, resp.row(n));
        continue;
      }
      std::vector<detail::MarginalModel> locals;
      locals.reserve(static_cast<std::size_t>(k));
      for (Index i = 0; i < k; ++i) {
        locals.emplace_back(m.locals[static_cast<std::size_t>(i)], s);
        joint(i) = log_pi(i) + locals.back().log_density();
      }
      log_marginal(n) = normalize_log_row(joint, log_pi, resp.row(n));
      for (Index i = 0; i < k; ++i) {
        const auto& local = locals[static_cast<std::size_t>(i)];
        filled[static_cast<std::size_t>(i)].row(n) = local.conditional_fill(s).transpose();
        if (resp(n, i) > 0.0) {
          local.add_conditional_covariance(s, resp(n, i), extra[static_cast<std::size_t>(i)]);
        }
      }
    }

    const double ll = log_marginal.sum();
    report.log_likelihood_trace.push_back(ll);
    if (iteration > 0) {
      const double prev = report.log_likelihood_trace[report.log_likelihood_trace.size() - 2];
      if (std::abs(ll - prev) / std::max(std::abs(prev), 1e-300) < config.tolerance) {
        report.converged = true;
        break;
      }
    }
    if (iteration == config.max_iterations) break;

    for (Index i = 0; i < k; ++i) {
      const auto r = resp.col(i);
      PpcaParams& local = m.locals[static_cast<std::size_t>(i)];
      const auto& rows = filled[static_cast<std::size_t>(i)];
      if (detail::is_empty_component(r.sum(), n_samples)) {
        Index worst = 0;
        log_marginal.minCoeff(&worst);
        local.mu = rows.row(worst).transpose();
        m.pi(i) = 1.0 / static_cast<double>(n_samples);
        report.reseeds.push_back({iteration, i, worst});
        continue;
      }
      detail::update_component(local, m.pi(i), rows, r, &extra[static_cast<std::size_t>(i)],
                               floor_abs);
    }
    m.pi /= m.pi.sum();
    report.iterations_used = iteration + 1;
  }

  Matrix imputed = mean_filled;
  for (Index n = 0; n < n_samples; ++n) {
    const MaskedSample& s = samples[static_cast<std::size_t>(n)];
    if (!s.complete()) imputed.row(n) = conditional_impute(report.params, s).transpose();
  }
  report.h_value = entropy_criterion(report.params, imputed);
  return report;
}

/// select_k for partially observed data. The latent dimension is resolved
/// on the column-mean-filled matrix.
inline KSelection select_k_missing(const std::vector<MaskedSample>& samples,
                                   const TrainingConfig& config) {
  config.validate();
  const Index q = resolve_latent_dim(mean_fill(samples), config);
  return select_k_with(config, q,
                       [&](const TrainingConfig& c) { return em_fit_missing(samples, c); });
}

struct MonitorOutcome {
  GlobalStatistics statistics;
  AlarmDecision decision;
  Vector completed;
};

/// Imputes a partially observed sample, then scores it as a complete one.
inline MonitorOutcome monitor_missing(const MixtureParams& m, const ThresholdSet& th,
                                      const MaskedSample& s,
                                      DetectionMode mode = DetectionMode::kCombined,
                                      StatisticForm form = StatisticForm::kPosteriorNormalized) {
  MonitorOutcome out;
  out.completed = conditional_impute(m, s);
  out.statistics = global_statistics(m, out.completed, form);
  out.decision = detect(out.statistics, th, mode);
  return out;
}

}  // namespace mppca

#endif  // MPPCA_INCOMPLETE_HPP
