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

#ifndef MPPCA_MIXTURE_HPP
#define MPPCA_MIXTURE_HPP

/*!@file
 * Mixture of PPCA models trained by a two-stage EM schedule.
 *
 * One iteration:
 *  - E-step: responsibilities R_ni in log space.
 *  - Stage 1: pi_i = mean_n R_ni and mu_i = responsibility-weighted mean.
 *  - Stage 2 (one GEM cycle per component, using the new mu_i):
 *      S_i     = sum_n R_ni (t_n - mu_i)(t_n - mu_i)^T / sum_n R_ni
 *      W_i'    = S_i W_i (sigma_i^2 I + M_i^-1 W_i^T S_i W_i)^-1
 *      sigma_i'^2 = tr(S_i - S_i W_i M_i^-1 W_i'^T) / d
 *
 * Both stages increase the free-energy bound at fixed R, so the mixture
 * log-likelihood never decreases, apart from iterations in which an empty
 * component is re-seeded (those are listed in TrainingReport::reseeds).
 */

#include <mppca/core.hpp>
#include <mppca/ppca.hpp>
#include <mppca/random.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mppca {

struct MixtureParams {
  std::vector<PpcaParams> locals;
  Vector pi;

  Index num_components() const { return static_cast<Index>(locals.size()); }
  Index dim() const { return locals.empty() ? 0 : locals.front().dim(); }
  Index latent_dim() const { return locals.empty() ? 0 : locals.front().latent_dim(); }

  void validate(double weight_tolerance = 1e-12) const {
    if (locals.empty()) throw DataError("mixture has no components");
    detail::require_shape(pi.size() == num_components(),
                          "mixing weight count does not match component count");
    for (const auto& local : locals) {
      local.validate();
      detail::require_shape(local.dim() == dim() && local.latent_dim() == latent_dim(),
                            "mixture components must share d and q");
    }
    if ((pi.array() < 0.0).any() || !pi.allFinite()) {
      throw DataError("mixing weights must be finite and nonnegative");
    }
    if (std::abs(pi.sum() - 1.0) > weight_tolerance) {
      throw DataError("mixing weights must sum to 1");
    }
  }
};

struct ResponsibilityMatrix {
  Matrix values;  // N x K, rows sum to 1
};

/// Factorized mixture, reused across samples.
class MixtureFactor {
 public:
  explicit MixtureFactor(const MixtureParams& m) {
    m.validate();
    factors_.reserve(m.locals.size());
    for (const auto& local : m.locals) factors_.emplace_back(local);
    log_pi_ = m.pi.array().log();
  }

  Index num_components() const { return static_cast<Index>(factors_.size()); }
  Index dim() const { return factors_.front().params().dim(); }
  const PpcaFactor& component(Index i) const { return factors_[static_cast<std::size_t>(i)]; }
  const Vector& log_pi() const { return log_pi_; }

  /// ln p(t | i) for every component.
  Vector component_log_densities(const VectorRef& t) const {
    Vector out(num_components());
    for (Index i = 0; i < num_components(); ++i) out(i) = component(i).log_density(t);
    return out;
  }

 private:
  std::vector<PpcaFactor> factors_;
  Vector log_pi_;
};

/// Normalizes one row of ln(pi_i p(t|i)) into responsibilities; returns
/// ln p(t). A row whose every entry is -inf gets uniform weight over the
/// components with pi_i > 0, so the result never contains NaN.
template <typename RowIn, typename RowOut>
double normalize_log_row(const RowIn& log_joint, const Vector& log_pi, RowOut&& out) {
  const double log_total = detail::log_sum_exp(log_joint);
  if (std::isfinite(log_total)) {
    out = (log_joint.array() - log_total).exp().matrix();
  } else {
    const auto live = static_cast<double>((log_pi.array() > -std::numeric_limits<double>::infinity()).count());
    for (Index i = 0; i < log_pi.size(); ++i) {
      out(i) = std::isfinite(log_pi(i)) ? 1.0 / live : 0.0;
    }
  }
  return log_total;
}

/// Result of one E-step over a data set.
struct EStep {
  Matrix log_component;   // N x K, ln p(t_n | i)
  Matrix responsibilities;  // N x K
  Vector log_mixture;     // N, ln p(t_n)
  double log_likelihood = 0.0;
};

inline EStep e_step(const MixtureFactor& f, DataRef data) {
  detail::require_shape(data.cols() == f.dim(),
                        "data has " + std::to_string(data.cols()) +
                            " columns but the model dimension is " +
                            std::to_string(f.dim()));
  const Index n_samples = data.rows();
  const Index k = f.num_components();
  EStep out{Matrix(n_samples, k), Matrix(n_samples, k), Vector(n_samples), 0.0};
  for (Index n = 0; n < n_samples; ++n) {
    out.log_component.row(n) = f.component_log_densities(data.row(n).transpose()).transpose();
    const Vector joint = out.log_component.row(n).transpose() + f.log_pi();
    out.log_mixture(n) = normalize_log_row(joint, f.log_pi(), out.responsibilities.row(n));
  }
  out.log_likelihood = out.log_mixture.sum();
  return out;
}

inline ResponsibilityMatrix responsibilities(const MixtureParams& m, DataRef data) {
  return {e_step(MixtureFactor(m), data).responsibilities};
}

/// Mixture log-likelihood sum_n ln sum_i pi_i p(t_n | i).
inline double mixture_log_likelihood(const MixtureParams& m, DataRef data) {
  return e_step(MixtureFactor(m), data).log_likelihood;
}

/// H = -(1/N) sum_n sum_i R_ni ln p(t_n|i) - sum_i pi_i ln pi_i, with 0 ln 0 = 0.
inline double entropy_criterion(const MixtureParams& m, DataRef data) {
  const EStep e = e_step(MixtureFactor(m), data);
  double weighted = 0.0;
  for (Index n = 0; n < data.rows(); ++n) {
    for (Index i = 0; i < m.num_components(); ++i) {
      const double r = e.responsibilities(n, i);
      if (r > 0.0) weighted += r * e.log_component(n, i);
    }
  }
  double mixing_entropy = 0.0;
  for (Index i = 0; i < m.pi.size(); ++i) {
    if (m.pi(i) > 0.0) mixing_entropy -= m.pi(i) * std::log(m.pi(i));
  }
  return -weighted / static_cast<double>(data.rows()) + mixing_entropy;
}

/// Smallest q whose leading eigenvalues of the sample covariance reach
/// `rate` of the total. Clamped to [1, d - 1].
inline Index choose_q(DataRef data, double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("contribution rate must lie in (0, 1]");
  }
  const Vector mean = column_mean(data);
  const SymmetricEigen eig = sorted_eigen(sample_covariance(data, mean));
  const Vector lambda = eig.values.cwiseMax(0.0);
  const double total = lambda.sum();
  const Index d = lambda.size();
  if (d < 2) throw ShapeError("choose_q needs at least two columns");
  if (!(total > 0.0)) return 1;
  double cumulative = 0.0;
  for (Index q = 1; q <= d; ++q) {
    cumulative += lambda(q - 1);
    if (cumulative / total >= rate - 1e-12) return std::clamp<Index>(q, 1, d - 1);
  }
  return d - 1;
}

struct KRange {
  Index min = 1;
  Index max = 10;
};

enum class SelectionRule {
  kMinEntropy,   // argmin_K H(K)
  kDeltaChange,  // smallest K with |H(K) - H(K+1)| <= delta
};

enum class InitStrategy {
  kKMeans,          // k-means++ seeding refined by Lloyd iterations
  kRandomPartition, // shuffled rows cut into K near-equal groups
};

struct TrainingConfig {
  Index k = 1;
  std::optional<KRange> k_range;
  Index q = 0;  // 0: derive from contribution_rate
  std::optional<double> contribution_rate;
  int max_iterations = 500;
  double tolerance = 1e-6;  // relative log-likelihood change
  std::uint64_t seed = 0;
  double sigma2_floor = kDefaultNoiseFloor;  // relative to trace(S) / d
  InitStrategy init = InitStrategy::kKMeans;
  int kmeans_restarts = 10;  // seedings tried; lowest inertia wins
  SelectionRule rule = SelectionRule::kMinEntropy;
  std::optional<double> delta;  // default 0.05 |H(K_min)|

  void validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
    if (k < 1) throw std::invalid_argument("K must be >= 1");
    if (k_range && (k_range->min < 1 || k_range->max < k_range->min)) {
      throw std::invalid_argument("K range must satisfy 1 <= min <= max");
    }
    if (q < 0) throw std::invalid_argument("q must be >= 1");
    if (q == 0 && !contribution_rate) {
      throw std::invalid_argument("either q or a contribution rate is required");
    }
    if (!(sigma2_floor >= 0.0)) throw std::invalid_argument("sigma2_floor must be >= 0");
    if (kmeans_restarts < 1) throw std::invalid_argument("kmeans_restarts must be >= 1");
  }
};

struct ReseedEvent {
  int iteration = 0;
  Index component = 0;
  Index sample = 0;
};

struct TrainingReport {
  MixtureParams params;
  std::vector<double> log_likelihood_trace;
  int iterations_used = 0;
  bool converged = false;
  double h_value = 0.0;
  std::vector<ReseedEvent> reseeds;
};

inline Index resolve_latent_dim(DataRef data, const TrainingConfig& config) {
  if (config.q > 0) return config.q;
  return choose_q(data, *config.contribution_rate);
}

namespace detail {

inline constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

inline double noise_floor_for(DataRef data, double relative) {
  const Vector mean = column_mean(data);
  const Matrix centered = data.rowwise() - mean.transpose();
  return relative * centered.squaredNorm() /
         (static_cast<double>(data.rows()) * static_cast<double>(data.cols()));
}

}  // namespace detail

namespace detail {

struct KMeansResult {
  std::vector<Index> labels;
  double inertia = 0.0;
};

// One k-means++ seeding followed by Lloyd refinement.
inline KMeansResult kmeans_once(DataRef data, Index k, Rng& rng, int lloyd_iterations) {
  const Index n_samples = data.rows();
  Matrix centers(k, data.cols());
  centers.row(0) = data.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_samples))));
  std::vector<double> dist2(static_cast<std::size_t>(n_samples));
  for (Index n = 0; n < n_samples; ++n) {
    dist2[static_cast<std::size_t>(n)] = (data.row(n) - centers.row(0)).squaredNorm();
  }
  for (Index c = 1; c < k; ++c) {
    const auto pick = static_cast<Index>(rng.categorical(dist2));
    centers.row(c) = data.row(pick);
    for (Index n = 0; n < n_samples; ++n) {
      auto& d2 = dist2[static_cast<std::size_t>(n)];
      d2 = std::min(d2, (data.row(n) - centers.row(c)).squaredNorm());
    }
  }

  std::vector<Index> labels(static_cast<std::size_t>(n_samples), -1);
  for (int it = 0; it <= lloyd_iterations; ++it) {
    bool changed = false;
    for (Index n = 0; n < n_samples; ++n) {
      Index best = 0;
      (centers.rowwise() - data.row(n)).rowwise().squaredNorm().minCoeff(&best);
      auto& label = labels[static_cast<std::size_t>(n)];
      changed = changed || label != best;
      label = best;
    }
    if (!changed || it == lloyd_iterations) break;
    Matrix sums = Matrix::Zero(k, data.cols());
    Vector counts = Vector::Zero(k);
    for (Index n = 0; n < n_samples; ++n) {
      const Index label = labels[static_cast<std::size_t>(n)];
      sums.row(label) += data.row(n);
      counts(label) += 1.0;
    }
    for (Index c = 0; c < k; ++c) {
      if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }
  }
  double inertia = 0.0;
  for (Index n = 0; n < n_samples; ++n) {
    inertia += (data.row(n) - centers.row(labels[static_cast<std::size_t>(n)])).squaredNorm();
  }
  return {std::move(labels), inertia};
}

// Lowest-inertia labels over `restarts` independent seedings.
inline std::vector<Index> kmeans_labels(DataRef data, Index k, Rng& rng, int lloyd_iterations,
                                        int restarts = 1) {
  KMeansResult best = kmeans_once(data, k, rng, lloyd_iterations);
  for (int r = 1; r < restarts; ++r) {
    KMeansResult next = kmeans_once(data, k, rng, lloyd_iterations);
    if (next.inertia < best.inertia) best = std::move(next);
  }
  return std::move(best.labels);
}

inline std::vector<Index> random_partition_labels(Index n_samples, Index k, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(n_samples));
  for (Index n = 0; n < n_samples; ++n) order[static_cast<std::size_t>(n)] = n;
  rng.shuffle(order);
  std::vector<Index> labels(static_cast<std::size_t>(n_samples));
  for (Index g = 0; g < k; ++g) {
    for (Index pos = g * n_samples / k; pos < (g + 1) * n_samples / k; ++pos) {
      labels[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = g;
    }
  }
  return labels;
}

}  // namespace detail

/// Initial mixture from a hard partition of the rows: each group gets a
/// local closed-form PPCA and pi_i proportional to its size. A group with
/// fewer than q + 1 rows falls back to the global PPCA with its mean
/// jittered by 0.1 of the global per-coordinate scale.
///
/// K = 1 returns fit_ppca_closed_form(data, q). Deterministic given seed.
inline MixtureParams initialize(DataRef data, Index k, Index q, std::uint64_t seed,
                                double noise_floor = kDefaultNoiseFloor,
                                InitStrategy strategy = InitStrategy::kKMeans,
                                int lloyd_iterations = 10, int kmeans_restarts = 10) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (kmeans_restarts < 1) throw std::invalid_argument("k-means restarts must be >= 1");
  const Index n_samples = data.rows();
  if (n_samples == 0) throw DataError("cannot initialize from empty data");
  const double floor_abs = detail::noise_floor_for(data, noise_floor);

  MixtureParams m;
  if (k == 1) {
    m.pi = Vector::Ones(1);
    m.locals.push_back(fit_ppca_closed_form(data, q, noise_floor));
    return m;
  }

  Rng rng(seed, detail::kInitStream);
  const std::vector<Index> labels = strategy == InitStrategy::kKMeans
                                        ? detail::kmeans_labels(data, k, rng, lloyd_iterations, kmeans_restarts)
                                        : detail::random_partition_labels(n_samples, k, rng);

  m.pi = Vector(k);
  std::optional<PpcaParams> global;
  for (Index g = 0; g < k; ++g) {
    std::vector<Index> rows;
    for (Index n = 0; n < n_samples; ++n) {
      if (labels[static_cast<std::size_t>(n)] == g) rows.push_back(n);
    }
    const auto size = static_cast<Index>(rows.size());
    m.pi(g) = static_cast<double>(std::max<Index>(size, 1));
    if (size < q + 1) {
      if (!global) global = fit_ppca_closed_form(data, q, noise_floor);
      PpcaParams local = *global;
      const double scale = std::sqrt(floor_abs / noise_floor);
      for (Index j = 0; j < local.mu.size(); ++j) local.mu(j) += 0.1 * scale * rng.normal();
      m.locals.push_back(std::move(local));
      continue;
    }
    Matrix group(size, data.cols());
    for (Index r = 0; r < size; ++r) group.row(r) = data.row(rows[static_cast<std::size_t>(r)]);
    const Vector mean = column_mean(group);
    m.locals.push_back(
        ppca_from_moments(mean, sample_covariance(group, mean), q, noise_floor, floor_abs));
  }
  m.pi /= m.pi.sum();
  return m;
}

namespace detail {

// Stage 1 and stage 2 for one component. `rows` holds the (completed)
// samples as seen by this component; `extra_scatter`, when given, is added
// to the responsibility-weighted scatter before normalization.
inline void update_component(PpcaParams& local, double& weight, DataRef rows,
                             const Eigen::Ref<const Vector>& r, const Matrix* extra_scatter,
                             double floor_abs) {
  const double mass = r.sum();
  const auto d = static_cast<double>(rows.cols());

  // stage 1
  weight = mass / static_cast<double>(rows.rows());
  local.mu = (rows.transpose() * r) / mass;

  // stage 2
  const Matrix centered = rows.rowwise() - local.mu.transpose();
  Matrix s = (centered.array().colwise() * r.array()).matrix().transpose() * centered;
  if (extra_scatter) s += *extra_scatter;
  s /= mass;
  s = 0.5 * (s + s.transpose());

  const PpcaFactor f(local);
  const Matrix sw = s * local.W;
  Matrix inner = f.m_inverse() * (local.W.transpose() * sw);
  inner.diagonal().array() += local.sigma2;
  const Matrix w_new = inner.transpose().partialPivLu().solve(sw.transpose()).transpose();
  const double trace_term = (sw * f.m_inverse() * w_new.transpose()).trace();

  local.W = w_new;
  local.sigma2 = std::max((s.trace() - trace_term) / d, floor_abs);
}

inline bool is_empty_component(double mass, Index n_samples) {
  return mass < 1e-6 * static_cast<double>(n_samples);
}

}  // namespace detail

/// One two-stage EM update in place, given the E-step at the current params.
///
/// A component whose responsibility mass falls below 1e-6 N is re-seeded at
/// the sample with the lowest mixture density, with pi_i = 1/N before the
/// weights are renormalized.
inline void m_step(MixtureParams& m, DataRef data, const EStep& e, double floor_abs,
                   int iteration, std::vector<ReseedEvent>* reseeds) {
  for (Index i = 0; i < m.num_components(); ++i) {
    const auto r = e.responsibilities.col(i);
    PpcaParams& local = m.locals[static_cast<std::size_t>(i)];
    if (detail::is_empty_component(r.sum(), data.rows())) {
      Index worst = 0;
      e.log_mixture.minCoeff(&worst);
      local.mu = data.row(worst).transpose();
      m.pi(i) = 1.0 / static_cast<double>(data.rows());
      if (reseeds) reseeds->push_back({iteration, i, worst});
      continue;
    }
    detail::update_component(local, m.pi(i), data, r, nullptr, floor_abs);
  }
  m.pi /= m.pi.sum();
}

/// Two-stage EM from a given starting mixture.
inline TrainingReport em_fit_from(DataRef data, MixtureParams start,
                                  const TrainingConfig& config) {
  config.validate();
  const double floor_abs = detail::noise_floor_for(data, config.sigma2_floor);
  TrainingReport report;
  report.params = std::move(start);
  for (int iteration = 0;; ++iteration) {
    const EStep e = e_step(MixtureFactor(report.params), data);
    report.log_likelihood_trace.push_back(e.log_likelihood);
    if (iteration > 0) {
      const double prev = report.log_likelihood_trace[report.log_likelihood_trace.size() - 2];
      const double change = std::abs(e.log_likelihood - prev) / std::max(std::abs(prev), 1e-300);
      if (change < config.tolerance) {
        report.converged = true;
        break;
      }
    }
    if (iteration == config.max_iterations) break;
    m_step(report.params, data, e, floor_abs, iteration, &report.reseeds);
    report.iterations_used = iteration + 1;
  }
  report.h_value = entropy_criterion(report.params, data);
  return report;
}

/// Fits a mixture with config.k components.
inline TrainingReport em_fit(DataRef data, const TrainingConfig& config) {
  config.validate();
  const Index q = resolve_latent_dim(data, config);
  return em_fit_from(
      data, initialize(data, config.k, q, config.seed, config.sigma2_floor, config.init, 10,
                           config.kmeans_restarts), config);
}

struct KCandidate {
  Index k = 0;
  std::optional<TrainingReport> report;
  std::string error;  // non-empty when the fit failed
};

struct KSelection {
  Index best_k = 0;
  std::vector<KCandidate> candidates;
  std::vector<double> h_values;  // aligned with candidates; NaN for failures
};

/// Applies the selection rule to already-computed H values.
inline Index pick_k(const std::vector<KCandidate>& candidates, const std::vector<double>& h,
                    SelectionRule rule, std::optional<double> delta) {
  Index best = 0;
  double best_h = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (candidates[j].report && h[j] < best_h) {
      best_h = h[j];
      best = candidates[j].k;
    }
  }
  if (rule == SelectionRule::kDeltaChange && !candidates.empty()) {
    double first_h = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (candidates[j].report) {
        first_h = h[j];
        break;
      }
    }
    const double threshold = delta.value_or(0.05 * std::abs(first_h));
    for (std::size_t j = 0; j + 1 < candidates.size(); ++j) {
      if (!candidates[j].report || !candidates[j + 1].report) continue;
      if (std::abs(h[j] - h[j + 1]) <= threshold) return candidates[j].k;
    }
  }
  if (best == 0) throw DataError("no K in the requested range could be fitted");
  return best;
}

/// Runs `fit(config_for_k)` for every K in config.k_range (default 1..10)
/// with the latent dimension fixed to q, then picks K by the configured
/// rule. Fits that throw are recorded and skipped.
template <typename Fit>
KSelection select_k_with(const TrainingConfig& config, Index q, Fit&& fit) {
  config.validate();
  const KRange range = config.k_range.value_or(KRange{});
  KSelection out;
  for (Index k = range.min; k <= range.max; ++k) {
    KCandidate candidate;
    candidate.k = k;
    TrainingConfig single = config;
    single.k = k;
    single.q = q;
    try {
      candidate.report = fit(single);
      out.h_values.push_back(candidate.report->h_value);
    } catch (const std::exception& ex) {
      candidate.error = ex.what();
      out.h_values.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    out.candidates.push_back(std::move(candidate));
  }
  out.best_k = pick_k(out.candidates, out.h_values, config.rule, config.delta);
  return out;
}

inline KSelection select_k(DataRef data, const TrainingConfig& config) {
  config.validate();
  return select_k_with(config, resolve_latent_dim(data, config),
                       [&](const TrainingConfig& c) { return em_fit(data, c); });
}

}  // namespace mppca

#endif  // MPPCA_MIXTURE_HPP
