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

#ifndef MPPCA_MONITORING_HPP
#define MPPCA_MONITORING_HPP

/*!@file
 * Monitoring statistics for a fitted mixture, KDE control limits, alarm
 * logic and alarm-rate evaluation.
 *
 * For local model i and z = t - mu_i, with P_i = W_i M_i^-1 W_i^T:
 *   T_i^2    = z^T P_i z / sigma_i^2        (principal subspace)
 *   SPE_i    = |(I - P_i) z|^2 / sigma_i^2   (residual subspace)
 *   T_c,i^2  = z^T C_i^-1 z                  (composite)
 * The global statistics are responsibility-weighted means of the locals.
 *
 * StatisticForm::kLiteral replaces M_i^-1 by M_i inside T_i^2 and SPE_i.
 */

#include <mppca/core.hpp>
#include <mppca/mixture.hpp>
#include <mppca/ppca.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mppca {

enum class StatisticForm { kPosteriorNormalized, kLiteral };
enum class DetectionMode { kDual, kCombined };

struct LocalStatistics {
  double t2 = 0.0;
  double spe = 0.0;
  double tc2 = 0.0;
  Index model_index = 0;
};

struct GlobalStatistics {
  double t2 = 0.0;
  double spe = 0.0;
  double tc2 = 0.0;
  Vector weights;  // responsibilities used, length K
};

inline LocalStatistics local_statistics(const MixtureFactor& f, Index i, const VectorRef& t,
                                        StatisticForm form = StatisticForm::kPosteriorNormalized) {
  if (i < 0 || i >= f.num_components()) {
    throw std::out_of_range("local model index " + std::to_string(i) + " out of range");
  }
  const PpcaFactor& c = f.component(i);
  c.check_dim(t);
  const PpcaParams& p = c.params();
  const Vector z = t - p.mu;
  const Vector a = p.W.transpose() * z;

  LocalStatistics out;
  out.model_index = i;
  out.tc2 = std::max(c.mahalanobis(z), 0.0);
  if (form == StatisticForm::kPosteriorNormalized) {
    const Vector b = c.m_inverse() * a;
    out.t2 = std::max(a.dot(b), 0.0) / p.sigma2;
    out.spe = (z - p.W * b).squaredNorm() / p.sigma2;
  } else {
    const Vector b = inner_matrix(p) * a;
    out.t2 = b.squaredNorm();
    out.spe = (z - p.W * b).squaredNorm() / p.sigma2;
  }
  return out;
}

inline LocalStatistics local_statistics(const MixtureParams& m, Index i, const VectorRef& t,
                                        StatisticForm form = StatisticForm::kPosteriorNormalized) {
  return local_statistics(MixtureFactor(m), i, t, form);
}

/// Responsibilities of a single sample.
inline Vector sample_responsibilities(const MixtureFactor& f, const VectorRef& t) {
  const Vector joint = f.component_log_densities(t) + f.log_pi();
  Vector r(f.num_components());
  normalize_log_row(joint, f.log_pi(), r);
  return r;
}

inline GlobalStatistics global_statistics(const MixtureFactor& f, const VectorRef& t,
                                          StatisticForm form = StatisticForm::kPosteriorNormalized) {
  GlobalStatistics g;
  g.weights = sample_responsibilities(f, t);
  for (Index i = 0; i < f.num_components(); ++i) {
    const double r = g.weights(i);
    if (r == 0.0) continue;
    const LocalStatistics l = local_statistics(f, i, t, form);
    g.t2 += r * l.t2;
    g.spe += r * l.spe;
    g.tc2 += r * l.tc2;
  }
  return g;
}

inline GlobalStatistics global_statistics(const MixtureParams& m, const VectorRef& t,
                                          StatisticForm form = StatisticForm::kPosteriorNormalized) {
  return global_statistics(MixtureFactor(m), t, form);
}

/// Global statistics for every row of `data`.
inline std::vector<GlobalStatistics> global_statistics_all(
    const MixtureParams& m, DataRef data, StatisticForm form = StatisticForm::kPosteriorNormalized) {
  const MixtureFactor f(m);
  detail::require_shape(data.cols() == f.dim(), "data dimension does not match the model");
  std::vector<GlobalStatistics> out;
  out.reserve(static_cast<std::size_t>(data.rows()));
  for (Index n = 0; n < data.rows(); ++n) out.push_back(global_statistics(f, data.row(n).transpose(), form));
  return out;
}

// ---------------------------------------------------------------------------
// Kernel density estimate with a Gaussian kernel.

inline double standard_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double kde_density(std::span<const double> samples, double h, double z) {
  if (!(h > 0.0)) throw std::invalid_argument("KDE bandwidth must be positive");
  if (samples.empty()) throw DataError("KDE needs at least one sample");
  double sum = 0.0;
  for (double s : samples) sum += standard_normal_pdf((z - s) / h);
  return sum / (static_cast<double>(samples.size()) * h);
}

inline double kde_cdf(std::span<const double> samples, double h, double z) {
  if (!(h > 0.0)) throw std::invalid_argument("KDE bandwidth must be positive");
  if (samples.empty()) throw DataError("KDE needs at least one sample");
  double sum = 0.0;
  for (double s : samples) sum += standard_normal_cdf((z - s) / h);
  return sum / static_cast<double>(samples.size());
}

/// Sample standard deviation with the N - 1 denominator.
inline double sample_stddev(std::span<const double> samples) {
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / (n - 1.0));
}

/// Rule-of-thumb bandwidth h = 1.06 s N^(-1/5).
inline double optimal_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DataError("bandwidth needs at least two samples");
  const double s = sample_stddev(samples);
  if (!(s > 0.0)) throw DataError("bandwidth undefined: samples have zero spread");
  return 1.06 * s * std::pow(static_cast<double>(samples.size()), -0.2);
}

/// Solves KDE-CDF(J) = alpha by bisection on [min - 10h, max + 10h].
inline double kde_quantile(std::span<const double> samples, double h, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *min_it - 10.0 * h;
  double hi = *max_it + 10.0 * h;
  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double value = kde_cdf(samples, h, mid);
    if (std::abs(value - alpha) < 1e-8) return mid;
    if (value < alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw std::logic_error("KDE quantile bisection did not converge");
}

inline double threshold(std::span<const double> samples, double alpha) {
  return kde_quantile(samples, optimal_bandwidth(samples), alpha);
}

struct ThresholdSet {
  double j_t2 = 0.0;
  double j_spe = 0.0;
  double j_tc2 = 0.0;
  double alpha = 0.99;
  double h_t2 = 0.0;
  double h_spe = 0.0;
  double h_tc2 = 0.0;
  std::int64_t sample_count = 0;
};

/// Per-statistic KDE limits from statistics of normal-operation data.
inline ThresholdSet fit_thresholds(const std::vector<GlobalStatistics>& stats, double alpha) {
  if (stats.size() < 2) throw DataError("thresholds need at least two training statistics");
  std::vector<double> t2;
  std::vector<double> spe;
  std::vector<double> tc2;
  for (const auto& g : stats) {
    t2.push_back(g.t2);
    spe.push_back(g.spe);
    tc2.push_back(g.tc2);
  }
  ThresholdSet th;
  th.alpha = alpha;
  th.sample_count = static_cast<std::int64_t>(stats.size());
  th.h_t2 = optimal_bandwidth(t2);
  th.h_spe = optimal_bandwidth(spe);
  th.h_tc2 = optimal_bandwidth(tc2);
  th.j_t2 = kde_quantile(t2, th.h_t2, alpha);
  th.j_spe = kde_quantile(spe, th.h_spe, alpha);
  th.j_tc2 = kde_quantile(tc2, th.h_tc2, alpha);
  return th;
}

struct AlarmDecision {
  bool alarm = false;
  DetectionMode mode = DetectionMode::kCombined;
};

/// Dual: alarm unless T^2 and SPE are both within limits. Combined: alarm iff
/// T_c^2 exceeds its limit. A value equal to its limit is not an alarm.
inline AlarmDecision detect(const GlobalStatistics& g, const ThresholdSet& th,
                            DetectionMode mode = DetectionMode::kCombined) {
  if (mode == DetectionMode::kCombined) return {g.tc2 > th.j_tc2, mode};
  return {g.t2 > th.j_t2 || g.spe > th.j_spe, mode};
}

struct EvaluationReport {
  std::optional<double> mar;  // percent; empty when no faulty samples
  std::optional<double> far;  // percent; empty when no normal samples
  std::int64_t detected = 0;      // alarm, fault
  std::int64_t missed = 0;        // no alarm, fault
  std::int64_t false_alarms = 0;  // alarm, normal
  std::int64_t quiet = 0;         // no alarm, normal
};

inline EvaluationReport evaluate(const std::vector<bool>& alarms,
                                 const std::vector<bool>& fault_labels) {
  if (alarms.size() != fault_labels.size()) {
    throw ShapeError("alarm series has " + std::to_string(alarms.size()) +
                     " entries but label series has " + std::to_string(fault_labels.size()));
  }
  EvaluationReport r;
  for (std::size_t n = 0; n < alarms.size(); ++n) {
    if (fault_labels[n]) {
      (alarms[n] ? r.detected : r.missed) += 1;
    } else {
      (alarms[n] ? r.false_alarms : r.quiet) += 1;
    }
  }
  const std::int64_t faulty = r.detected + r.missed;
  const std::int64_t normal = r.false_alarms + r.quiet;
  if (faulty > 0) r.mar = 100.0 * static_cast<double>(r.missed) / static_cast<double>(faulty);
  if (normal > 0) r.far = 100.0 * static_cast<double>(r.false_alarms) / static_cast<double>(normal);
  return r;
}

inline std::string to_string(StatisticForm form) {
  return form == StatisticForm::kLiteral ? "literal" : "posterior-normalized";
}

inline std::string to_string(DetectionMode mode) {
  return mode == DetectionMode::kDual ? "dual" : "combined";
}

inline StatisticForm parse_statistic_form(const std::string& s) {
  if (s == "literal") return StatisticForm::kLiteral;
  if (s == "posterior-normalized") return StatisticForm::kPosteriorNormalized;
  throw std::invalid_argument("unknown statistic form '" + s + "'");
}

inline DetectionMode parse_detection_mode(const std::string& s) {
  if (s == "dual") return DetectionMode::kDual;
  if (s == "combined") return DetectionMode::kCombined;
  throw std::invalid_argument("unknown detection mode '" + s + "'");
}

}  // namespace mppca

#endif  // MPPCA_MONITORING_HPP
