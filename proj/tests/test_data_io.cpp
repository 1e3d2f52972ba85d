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

#include <mppca/data_io.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <clocale>
#include <filesystem>
#include <functional>

using namespace mppca;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

void expect_same_artifact(const ModelArtifact& a, const ModelArtifact& b) {
  ASSERT_EQ(a.params.num_components(), b.params.num_components());
  EXPECT_EQ(a.params.pi, b.params.pi);
  for (std::size_t i = 0; i < a.params.locals.size(); ++i) {
    EXPECT_EQ(a.params.locals[i].W, b.params.locals[i].W);
    EXPECT_EQ(a.params.locals[i].mu, b.params.locals[i].mu);
    EXPECT_EQ(a.params.locals[i].sigma2, b.params.locals[i].sigma2);
  }
  EXPECT_EQ(a.form, b.form);
  EXPECT_EQ(a.column_names, b.column_names);
  ASSERT_EQ(a.thresholds.has_value(), b.thresholds.has_value());
  if (a.thresholds) {
    EXPECT_EQ(a.thresholds->j_t2, b.thresholds->j_t2);
    EXPECT_EQ(a.thresholds->j_spe, b.thresholds->j_spe);
    EXPECT_EQ(a.thresholds->j_tc2, b.thresholds->j_tc2);
    EXPECT_EQ(a.thresholds->alpha, b.thresholds->alpha);
    EXPECT_EQ(a.thresholds->h_tc2, b.thresholds->h_tc2);
    EXPECT_EQ(a.thresholds->sample_count, b.thresholds->sample_count);
  }
  ASSERT_EQ(a.standardization.has_value(), b.standardization.has_value());
  if (a.standardization) {
    EXPECT_EQ(a.standardization->mean, b.standardization->mean);
    EXPECT_EQ(a.standardization->scale, b.standardization->scale);
  }
  EXPECT_EQ(a.training.config.seed, b.training.config.seed);
  EXPECT_EQ(a.training.config.delta, b.training.config.delta);
  EXPECT_EQ(a.training.config.contribution_rate, b.training.config.contribution_rate);
  EXPECT_EQ(a.training.log_likelihood, b.training.log_likelihood);
  EXPECT_EQ(a.training.h_table.size(), b.training.h_table.size());
}

}  // namespace

TEST(Csv, CompleteMatrix) {
  const Dataset ds = parse_csv("1.0,2.0\n3.0,4.0");
  ASSERT_EQ(ds.rows(), 2);
  ASSERT_EQ(ds.cols(), 2);
  EXPECT_TRUE(ds.complete());
  EXPECT_EQ(ds.values(0, 1), 2.0);
  EXPECT_EQ(ds.values(1, 0), 3.0);
  EXPECT_TRUE(ds.column_names.empty());
  EXPECT_FALSE(ds.fault_labels);
}

TEST(Csv, EmptyFieldsAreMissing) {
  const Dataset ds = parse_csv("1.0,\n,4.0");
  ASSERT_EQ(ds.rows(), 2);
  EXPECT_TRUE(ds.observed(0, 0));
  EXPECT_FALSE(ds.observed(0, 1));
  EXPECT_FALSE(ds.observed(1, 0));
  EXPECT_TRUE(ds.observed(1, 1));
  EXPECT_EQ(ds.values(1, 1), 4.0);
}

TEST(Csv, HeaderDetectionAndLabels) {
  const Dataset ds = parse_csv("a,b,fault\n1,2,0\n3,4,1\r\n\n");
  EXPECT_EQ(ds.column_names, (std::vector<std::string>{"a", "b"}));
  ASSERT_TRUE(ds.fault_labels);
  EXPECT_EQ(*ds.fault_labels, (std::vector<bool>{false, true}));
  EXPECT_EQ(ds.cols(), 2);

  CsvOptions no_header;
  no_header.header = CsvHeader::kAbsent;
  EXPECT_THROW(parse_csv("a,b\n1,2\n", no_header), FormatError);
  CsvOptions header;
  header.header = CsvHeader::kPresent;
  const Dataset numeric_header = parse_csv("1,2\n3,4\n", header);
  EXPECT_EQ(numeric_header.rows(), 1);
  EXPECT_EQ(numeric_header.column_names, (std::vector<std::string>{"1", "2"}));
}

TEST(Csv, LocatedErrors) {
  const std::string ragged = error_of([] { parse_csv("1,2\n3\n", {}, "f.csv"); });
  EXPECT_NE(ragged.find("f.csv:2"), std::string::npos) << ragged;
  const std::string bad = error_of([] { parse_csv("1,2\n3,x4\n", {}, "f.csv"); });
  EXPECT_NE(bad.find("f.csv:2"), std::string::npos) << bad;
  EXPECT_NE(bad.find("column 2"), std::string::npos) << bad;
  EXPECT_THROW(parse_csv("1,2\n3,nan\n"), FormatError);
  EXPECT_THROW(parse_csv("1,2\n3,1e999\n"), FormatError);
  EXPECT_THROW(parse_csv("a,fault\n1,2\n"), FormatError);
  EXPECT_THROW(parse_csv(""), DataError);
  EXPECT_THROW(parse_csv("a,b\n"), DataError);
  EXPECT_THROW(read_csv("/nonexistent/file.csv"), DataError);
}

TEST(Csv, LocaleIndependent) {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") == nullptr) GTEST_SKIP() << "de_DE locale unavailable";
  const Dataset ds = parse_csv("1.5,2.25\n");
  std::setlocale(LC_NUMERIC, saved.c_str());
  EXPECT_EQ(ds.values(0, 0), 1.5);
  EXPECT_EQ(ds.values(0, 1), 2.25);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  oracle::Gen gen(80);
  Dataset ds = Dataset::from_matrix(gen.matrix(40, 5, 1e3));
  ds.values(3, 2) = 1e-300;
  ds.values(4, 1) = -0.1;
  ds.observed(7, 4) = false;
  ds.values(7, 4) = kMissing;
  ds.column_names = {"a", "b", "c", "d", "e"};
  std::vector<bool> labels(40);
  for (std::size_t n = 20; n < 40; ++n) labels[n] = true;
  ds.fault_labels = labels;
  const std::string text = format_csv(ds);
  const Dataset back = parse_csv(text);
  EXPECT_EQ(back.column_names, ds.column_names);
  EXPECT_EQ(back.fault_labels, ds.fault_labels);
  EXPECT_EQ(back.observed, ds.observed);
  for (Index n = 0; n < 40; ++n) {
    for (Index j = 0; j < 5; ++j) {
      if (ds.observed(n, j)) {
        EXPECT_EQ(back.values(n, j), ds.values(n, j));
      }
    }
  }
  EXPECT_EQ(format_csv(back), text);
  // Canonical formatting: trailing zeros and leading '+' disappear.
  EXPECT_EQ(format_csv(parse_csv("x1,x2\n1.50,+2\n")), "x1,x2\n1.5,2\n");
}

TEST(Csv, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "mppca_test_io.csv";
  Dataset ds = Dataset::from_matrix(Matrix::Identity(3, 3));
  write_csv(ds, path.string());
  const Dataset back = read_csv(path.string());
  EXPECT_EQ(back.values, ds.values);
  EXPECT_EQ(back.column_names, (std::vector<std::string>{"x1", "x2", "x3"}));
  std::filesystem::remove(path);
}

TEST(Model, RandomRoundTripsAreLosslessAndByteIdentical) {
  oracle::Gen gen(81);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelArtifact a = fixture::random_artifact(gen);
    const std::string text = serialize_model(a);
    const ModelArtifact b = parse_model(text);
    expect_same_artifact(a, b);
    ASSERT_EQ(serialize_model(b), text);
  }
}

TEST(Model, SingleComponentRoundTrip) {
  ModelArtifact a;
  PpcaParams p;
  p.W = Matrix::Zero(2, 1);
  p.mu = Vector::Zero(2);
  p.sigma2 = 1.0;
  a.params.locals = {p};
  a.params.pi = Vector::Ones(1);
  a.training.config.q = 1;
  const std::string text = serialize_model(a);
  const ModelArtifact b = parse_model(text);
  expect_same_artifact(a, b);
  EXPECT_EQ(serialize_model(b), text);
  EXPECT_NE(text.find("\"format\": \"mppca-model\""), std::string::npos);
}

TEST(Model, FileRoundTrip) {
  oracle::Gen gen(82);
  const ModelArtifact a = fixture::random_artifact(gen);
  const auto path = std::filesystem::temp_directory_path() / "mppca_test_model.json";
  write_model(a, path.string());
  expect_same_artifact(a, read_model(path.string()));
  std::filesystem::remove(path);
}

TEST(Model, TamperedWeightsRejected) {
  oracle::Gen gen(83);
  ModelArtifact a = fixture::random_artifact(gen);
  while (a.params.num_components() < 2) a = fixture::random_artifact(gen);
  auto j = nlohmann::ordered_json::parse(serialize_model(a));
  j["components"][0]["weight"] = j["components"][0]["weight"].get<double>() + 0.2;
  EXPECT_THROW(parse_model(j.dump()), FormatError);
}

TEST(Model, VersionAndSchemaErrors) {
  oracle::Gen gen(84);
  const ModelArtifact a = fixture::random_artifact(gen);
  const auto good = nlohmann::ordered_json::parse(serialize_model(a));

  auto j = good;
  j["version"] = 2;
  const std::string msg = error_of([&] { parse_model(j.dump()); });
  EXPECT_NE(msg.find("version"), std::string::npos) << msg;

  j = good;
  j["format"] = "something-else";
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  j = good;
  j.erase("components");
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  j = good;
  j["dim"] = good["dim"].get<int>() + 1;
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  j = good;
  j["components"][0]["noise_variance"] = -1.0;
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  j = good;
  j["components"][0]["mean"][0] = "one";
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  j = good;
  j["statistic_form"] = "other";
  EXPECT_THROW(parse_model(j.dump()), FormatError);
  EXPECT_THROW(parse_model("{not json"), FormatError);
}

TEST(Standardize, ShiftedDataBecomesZeroMean) {
  oracle::Gen gen(85);
  Matrix x = gen.matrix(100, 3);
  x.rowwise() += Eigen::RowVectorXd::Constant(3, 1e4);
  const auto [out, s] = standardize(Dataset::from_matrix(x));
  for (Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(out.values.col(j).mean(), 0.0, 1e-10);
    EXPECT_NEAR(oracle::two_pass_stddev(std::vector<double>(out.values.col(j).data(),
                                                            out.values.col(j).data() + 100)),
                1.0, 1e-12);
  }
  EXPECT_EQ(s.apply(Vector(x.row(5).transpose())), Vector(out.values.row(5).transpose()));
}

TEST(Standardize, AlreadyStandardizedIsNearIdentity) {
  oracle::Gen gen(86);
  const auto [once, s1] = standardize(Dataset::from_matrix(gen.matrix(500, 4)));
  const Standardization s2 = fit_standardization(once);
  for (Index j = 0; j < 4; ++j) {
    EXPECT_LT(std::abs(s2.mean(j)), 1e-12);
    EXPECT_LT(std::abs(s2.scale(j) - 1.0), 1e-12);
  }
}

TEST(Standardize, MaskedMomentsMatchOracle) {
  oracle::Gen gen(87);
  Dataset ds = Dataset::from_matrix(gen.matrix(60, 3, 2.0));
  for (Index n = 0; n < 60; ++n) {
    for (Index j = 0; j < 3; ++j) {
      if (gen.uniform(0.0, 1.0) < 0.3) {
        ds.observed(n, j) = false;
        ds.values(n, j) = kMissing;
      }
    }
  }
  const Standardization s = fit_standardization(ds);
  for (Index j = 0; j < 3; ++j) {
    std::vector<double> seen;
    for (Index n = 0; n < 60; ++n) {
      if (ds.observed(n, j)) seen.push_back(ds.values(n, j));
    }
    double mean = 0.0;
    for (double v : seen) mean += v;
    mean /= static_cast<double>(seen.size());
    EXPECT_NEAR(s.mean(j), mean, 1e-12);
    EXPECT_NEAR(s.scale(j), oracle::two_pass_stddev(seen), 1e-12);
  }
  Dataset applied = ds;
  s.apply(applied);
  EXPECT_EQ(applied.observed, ds.observed);
}

TEST(Standardize, DegenerateColumnsNamed) {
  Dataset ds = parse_csv("a,b\n1,5\n2,5\n3,5\n");
  const std::string msg = error_of([&] { fit_standardization(ds); });
  EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
  ds = parse_csv("a,b\n1,5\n2,\n3,\n");
  EXPECT_THROW(fit_standardization(ds), DataError);
}

TEST(Scenario, RoundTripAndRandomClusters) {
  ScenarioShape shape;
  shape.dim = 4;
  shape.latent_dim = 1;
  shape.clusters = 2;
  shape.seed = 3;
  ScenarioSpec s;
  s.clusters = make_clusters(shape);
  s.n_normal = 50;
  s.n_test = 30;
  s.fault.type = FaultType::kRampDrift;
  s.fault.magnitude = 2.5;
  s.fault.onset = 10;
  s.fault.variables = {0, 3};
  s.missing_rate = 0.05;
  s.seed = 9;
  const std::string text = serialize_scenario(s);
  const ScenarioSpec back = parse_scenario(text);
  EXPECT_EQ(serialize_scenario(back), text);
  EXPECT_EQ(back.fault.variables, s.fault.variables);
  EXPECT_EQ(back.clusters.locals[1].W, s.clusters.locals[1].W);

  const ScenarioSpec random = parse_scenario(
      R"({"format": "mppca-scenario", "version": 1,
          "random_clusters": {"dim": 4, "latent_dim": 1, "clusters": 2, "seed": 3},
          "n_normal": 50, "n_test": 30})");
  EXPECT_EQ(random.clusters.locals[0].mu, s.clusters.locals[0].mu);
  EXPECT_EQ(random.fault.onset, 30);
  EXPECT_THROW(parse_scenario(R"({"format": "mppca-scenario", "version": 1,
          "random_clusters": {"dim": 4, "latent_dim": 1, "clusters": 2},
          "n_normal": 50, "n_test": 30, "fault": {"type": "step-bias", "magnitude": 1,
          "onset": 31, "variables": [0]}})"),
               FormatError);
}

TEST(StatisticsFile, RoundTripAndErrors) {
  StatisticsTable t;
  for (int n = 0; n < 3; ++n) {
    t.index.push_back(n);
    t.t2.push_back(0.1 * n);
    t.spe.push_back(1.0 / 3.0);
    t.tc2.push_back(n * 2.0);
    t.j_t2.push_back(1.5);
    t.j_spe.push_back(2.5);
    t.j_tc2.push_back(3.5);
    t.alarm.push_back(n == 2);
  }
  const std::string text = format_statistics(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), kStatisticsHeader);
  const StatisticsTable back = parse_statistics(text);
  EXPECT_EQ(back.spe, t.spe);
  EXPECT_EQ(back.alarm, t.alarm);
  EXPECT_EQ(format_statistics(back), text);
  EXPECT_THROW(parse_statistics("index,t2\n0,1\n"), FormatError);
  EXPECT_THROW(parse_statistics(std::string(kStatisticsHeader) + "\n0,1,2,3,4,5,6,maybe\n"), FormatError);
}

TEST(AlarmFile, RoundTripWithAndWithoutLabels) {
  AlarmTable t;
  t.index = {0, 1, 2};
  t.alarm = {false, true, true};
  EXPECT_EQ(format_alarms(t), "index,alarm\n0,0\n1,1\n2,1\n");
  t.fault = std::vector<bool>{false, false, true};
  const AlarmTable back = parse_alarms(format_alarms(t));
  EXPECT_EQ(back.alarm, t.alarm);
  EXPECT_EQ(back.fault, t.fault);
  EXPECT_THROW(parse_alarms("index,alarm\n0,2\n"), FormatError);
}
