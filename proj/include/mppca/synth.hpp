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

#ifndef MPPCA_SYNTH_HPP
#define MPPCA_SYNTH_HPP

/*!@file
 * Synthetic multimode process data: samples drawn from a known mixture of
 * PPCA models, with an injected fault in the test stream and optional
 * missing-completely-at-random masking.
 *
 * Random streams (all from ScenarioSpec::seed, see Rng):
 *   1 training samples, 2 test samples, 3 fault noise,
 *   4 training mask, 5 test mask.
 */

#include <mppca/core.hpp>
#include <mppca/dataset.hpp>
#include <mppca/mixture.hpp>
#include <mppca/random.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mppca {

enum class FaultType { kStepBias, kRampDrift, kGainChange, kNoiseIncrease };

inline std::string to_string(FaultType t) {
  switch (t) {
    case FaultType::kStepBias: return "step-bias";
    case FaultType::kRampDrift: return "ramp-drift";
    case FaultType::kGainChange: return "gain-change";
    case FaultType::kNoiseIncrease: return "noise-increase";
  }
  return "step-bias";
}

inline FaultType parse_fault_type(const std::string& s) {
  if (s == "step-bias") return FaultType::kStepBias;
  if (s == "ramp-drift") return FaultType::kRampDrift;
  if (s == "gain-change") return FaultType::kGainChange;
  if (s == "noise-increase") return FaultType::kNoiseIncrease;
  throw std::invalid_argument("unknown fault type '" + s + "'");
}

/// Fault applied to test samples with index >= onset (0-based).
///
/// The unit sigma is per variable, see fault_scale.
///  - step-bias:      x_j += magnitude * sigma
///  - ramp-drift:     x_j += magnitude * sigma * (n - onset + 1) / (N_test - onset)
///  - gain-change:    x_j  = mu_j + (1 + magnitude) (x_j - mu_j), mu of the
///                    generating component
///  - noise-increase: x_j += magnitude * sigma * N(0, 1)
struct FaultSpec {
  FaultType type = FaultType::kStepBias;
  double magnitude = 0.0;
  Index onset = 0;
  std::vector<Index> variables;
};

struct ScenarioSpec {
  MixtureParams clusters;
  Index n_normal = 1000;
  Index n_test = 1000;
  FaultSpec fault;
  double missing_rate = 0.0;        // test stream
  double train_missing_rate = 0.0;  // training stream
  std::uint64_t seed = 0;

  void validate() const {
    clusters.validate(1e-9);
    if (n_normal < 1 || n_test < 1) throw std::invalid_argument("sample counts must be >= 1");
    if (fault.onset < 0 || fault.onset > n_test) {
      throw std::invalid_argument("fault onset must lie within the test range");
    }
    if (!(fault.magnitude >= 0.0)) throw std::invalid_argument("fault magnitude must be >= 0");
    for (Index v : fault.variables) {
      if (v < 0 || v >= clusters.dim()) throw std::invalid_argument("fault variable out of range");
    }
    for (double rate : {missing_rate, train_missing_rate}) {
      if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("missing rate must lie in [0, 1)");
    }
  }
};

/// Parameters for a random well-separated scenario.
struct ScenarioShape {
  Index dim = 10;
  Index latent_dim = 3;
  Index clusters = 3;
  double separation = 10.0;    // minimum distance between means, in units of sigma
  double noise_variance = 1.0;  // sigma^2 of every cluster
  double loading_scale = 1.0;   // W entries ~ N(0, loading_scale^2)
  std::uint64_t seed = 0;
};

/// Random mixture with equal weights and pairwise mean distance >= separation * sigma.
inline MixtureParams make_clusters(const ScenarioShape& shape) {
  if (shape.clusters < 1 || shape.latent_dim < 1 || shape.latent_dim >= shape.dim) {
    throw std::invalid_argument("scenario shape needs K >= 1 and 1 <= q < d");
  }
  Rng rng(shape.seed, 0);
  const double sigma = std::sqrt(shape.noise_variance);
  const double min_distance = shape.separation * sigma;
  MixtureParams m;
  m.pi = Vector::Constant(shape.clusters, 1.0 / static_cast<double>(shape.clusters));
  std::vector<Vector> means;
  // Means on a sphere of radius r; enlarge r until the spacing holds.
  double radius = min_distance;
  while (static_cast<Index>(means.size()) < shape.clusters) {
    Vector candidate(shape.dim);
    for (Index j = 0; j < shape.dim; ++j) candidate(j) = rng.normal();
    candidate *= radius / candidate.norm();
    bool ok = true;
    for (const auto& other : means) ok = ok && (candidate - other).norm() >= min_distance;
    if (ok) {
      means.push_back(candidate);
    } else {
      radius *= 1.05;
    }
  }
  for (Index i = 0; i < shape.clusters; ++i) {
    PpcaParams p;
    p.W = Matrix(shape.dim, shape.latent_dim);
    for (Index r = 0; r < shape.dim; ++r) {
      for (Index c = 0; c < shape.latent_dim; ++c) p.W(r, c) = shape.loading_scale * rng.normal();
    }
    p.mu = means[static_cast<std::size_t>(i)];
    p.sigma2 = shape.noise_variance;
    m.locals.push_back(std::move(p));
  }
  return m;
}

/// Draws `count` samples from the mixture; `components` receives the
/// generating component of each row.
inline Matrix sample_mixture(const MixtureParams& m, Index count, Rng& rng,
                             std::vector<Index>* components = nullptr) {
  const Index d = m.dim();
  const Index q = m.latent_dim();
  std::vector<double> weights(m.pi.data(), m.pi.data() + m.pi.size());
  Matrix out(count, d);
  Vector x(q);
  Vector e(d);
  for (Index n = 0; n < count; ++n) {
    const auto c = rng.categorical(weights);
    const PpcaParams& p = m.locals[c];
    for (Index j = 0; j < q; ++j) x(j) = rng.normal();
    for (Index j = 0; j < d; ++j) e(j) = rng.normal();
    out.row(n) = (p.W * x + p.mu + std::sqrt(p.sigma2) * e).transpose();
    if (components) components->push_back(static_cast<Index>(c));
  }
  return out;
}

/// Masks each entry independently with probability `rate`; every row keeps
/// at least one observed entry.
inline void apply_mcar(Dataset& ds, double rate, Rng& rng) {
  ds.observed = MaskMatrix::Constant(ds.rows(), ds.cols(), true);
  if (rate <= 0.0) return;
  for (Index n = 0; n < ds.rows(); ++n) {
    for (Index j = 0; j < ds.cols(); ++j) ds.observed(n, j) = rng.uniform() >= rate;
    if (!ds.observed.row(n).any()) {
      ds.observed(n, static_cast<Index>(rng.below(static_cast<std::uint64_t>(ds.cols())))) = true;
    }
    for (Index j = 0; j < ds.cols(); ++j) {
      if (!ds.observed(n, j)) ds.values(n, j) = kMissing;
    }
  }
}

inline std::vector<std::string> default_column_names(Index d) {
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

/// Unit of fault magnitude for variable j: its in-control standard deviation
/// within a mode, sqrt(sum_i pi_i C_i[j, j]) with C_i = sigma_i^2 I + W_i W_i^T.
inline double fault_scale(const MixtureParams& m, Index j) {
  double var = 0.0;
  for (Index i = 0; i < m.num_components(); ++i) {
    const PpcaParams& p = m.locals[static_cast<std::size_t>(i)];
    var += m.pi(i) * (p.sigma2 + p.W.row(j).squaredNorm());
  }
  return std::sqrt(var);
}

struct ScenarioData {
  Dataset train;
  Dataset test;
};

inline ScenarioData generate(const ScenarioSpec& spec) {
  spec.validate();
  const MixtureParams& m = spec.clusters;
  const Index d = m.dim();

  Rng train_rng(spec.seed, 1);
  Rng test_rng(spec.seed, 2);
  Rng fault_rng(spec.seed, 3);
  Rng train_mask_rng(spec.seed, 4);
  Rng test_mask_rng(spec.seed, 5);

  ScenarioData out;
  out.train = Dataset::from_matrix(sample_mixture(m, spec.n_normal, train_rng));
  std::vector<Index> components;
  out.test = Dataset::from_matrix(sample_mixture(m, spec.n_test, test_rng, &components));

  const FaultSpec& f = spec.fault;
  const double span = static_cast<double>(std::max<Index>(spec.n_test - f.onset, 1));
  for (Index n = f.onset; n < spec.n_test; ++n) {
    const Vector& mu = m.locals[static_cast<std::size_t>(components[static_cast<std::size_t>(n)])].mu;
    for (Index j : f.variables) {
      const double sigma = fault_scale(m, j);
      double& x = out.test.values(n, j);
      switch (f.type) {
        case FaultType::kStepBias:
          x += f.magnitude * sigma;
          break;
        case FaultType::kRampDrift:
          x += f.magnitude * sigma * static_cast<double>(n - f.onset + 1) / span;
          break;
        case FaultType::kGainChange:
          x = mu(j) + (1.0 + f.magnitude) * (x - mu(j));
          break;
        case FaultType::kNoiseIncrease:
          x += f.magnitude * sigma * fault_rng.normal();
          break;
      }
    }
  }

  std::vector<bool> labels(static_cast<std::size_t>(spec.n_test));
  for (Index n = 0; n < spec.n_test; ++n) labels[static_cast<std::size_t>(n)] = n >= f.onset;
  out.test.fault_labels = std::move(labels);

  apply_mcar(out.train, spec.train_missing_rate, train_mask_rng);
  apply_mcar(out.test, spec.missing_rate, test_mask_rng);
  out.train.column_names = default_column_names(d);
  out.test.column_names = default_column_names(d);
  out.train.source = "synthetic:train";
  out.test.source = "synthetic:test";
  return out;
}

}  // namespace mppca

#endif  // MPPCA_SYNTH_HPP
