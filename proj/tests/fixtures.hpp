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

#ifndef MPPCA_TESTS_FIXTURES_HPP
#define MPPCA_TESTS_FIXTURES_HPP

#include <mppca/data_io.hpp>

#include "oracles.hpp"

#include <string>

namespace fixture {

/// A model artifact with every optional part randomly present or absent.
inline mppca::ModelArtifact random_artifact(oracle::Gen& gen) {
  using namespace mppca;
  const Index d = gen.integer(2, 8);
  const Index q = gen.integer(1, d - 1);
  const Index k = gen.integer(1, 4);
  ModelArtifact a;
  a.params = gen.mixture(k, d, q);
  // Values spanning many magnitudes exercise the shortest round-trip printer.
  a.params.locals[0].W(0, 0) *= std::pow(10.0, static_cast<double>(gen.integer(-12, 12)));
  a.form = gen.integer(0, 1) == 0 ? StatisticForm::kPosteriorNormalized : StatisticForm::kLiteral;
  if (gen.integer(0, 1) == 1) {
    for (Index j = 0; j < d; ++j) a.column_names.push_back("v" + std::to_string(j));
  }
  if (gen.integer(0, 1) == 1) {
    ThresholdSet t;
    t.alpha = gen.uniform(0.9, 0.999);
    t.j_t2 = gen.uniform(1.0, 30.0);
    t.j_spe = gen.uniform(1.0, 30.0);
    t.j_tc2 = gen.uniform(1.0, 40.0);
    t.h_t2 = gen.uniform(0.01, 1.0);
    t.h_spe = gen.uniform(0.01, 1.0);
    t.h_tc2 = gen.uniform(0.01, 1.0);
    t.sample_count = gen.integer(2, 5000);
    a.thresholds = t;
  }
  if (gen.integer(0, 1) == 1) {
    Standardization s;
    s.mean = gen.vector(d, 3.0);
    s.scale = gen.vector(d).cwiseAbs().array() + 0.1;
    a.standardization = s;
  }
  TrainingConfig& c = a.training.config;
  c.k = k;
  c.q = q;
  if (gen.integer(0, 1) == 1) c.contribution_rate = gen.uniform(0.5, 0.99);
  if (gen.integer(0, 1) == 1) c.k_range = KRange{1, gen.integer(1, 10)};
  c.seed = static_cast<std::uint64_t>(gen.integer(0, 1 << 30));
  c.init = gen.integer(0, 1) == 0 ? InitStrategy::kKMeans : InitStrategy::kRandomPartition;
  c.rule = gen.integer(0, 1) == 0 ? SelectionRule::kMinEntropy : SelectionRule::kDeltaChange;
  if (gen.integer(0, 1) == 1) c.delta = gen.uniform(0.0, 2.0);
  a.training.log_likelihood = gen.uniform(-1e5, 1e3);
  a.training.iterations = static_cast<int>(gen.integer(1, 500));
  a.training.converged = gen.integer(0, 1) == 1;
  a.training.h_value = gen.uniform(-5.0, 50.0);
  for (Index kk = 1; kk <= gen.integer(0, 4); ++kk) {
    HEntry e{kk, std::nullopt};
    if (gen.integer(0, 3) > 0) e.h = gen.uniform(-5.0, 50.0);
    a.training.h_table.push_back(e);
  }
  return a;
}

}  // namespace fixture

#endif  // MPPCA_TESTS_FIXTURES_HPP
