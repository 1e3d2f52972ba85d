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

#ifndef MPPCA_DATA_IO_HPP
#define MPPCA_DATA_IO_HPP

/*!@file
 * CSV datasets, JSON model artifacts, scenario files and standardization.
 *
 * CSV: comma separated, optional header row, empty field = missing, an
 * optional final header column named "fault" holds 0/1 labels. Numbers are
 * parsed and printed with std::from_chars / std::to_chars, so the C locale
 * never matters and printed values round-trip exactly.
 *
 * Model file (JSON, "format": "mppca-model", "version": 1):
 *   dim, latent_dim, num_components, statistic_form, columns,
 *   components[]: {weight, mean[d], loading[d][q] (row-major), noise_variance},
 *   thresholds: {alpha, t2, spe, tc2, bandwidth_t2, bandwidth_spe,
 *                bandwidth_tc2, sample_count} or null,
 *   standardization: {mean[d], scale[d]} or null,
 *   training: {k, q, contribution_rate, k_range, seed, max_iterations,
 *              tolerance, sigma2_floor, init, kmeans_restarts, selection_rule, delta,
 *              log_likelihood, iterations, converged, h_value, h_table[]}
 */

#include <mppca/core.hpp>
#include <mppca/dataset.hpp>
#include <mppca/mixture.hpp>
#include <mppca/monitoring.hpp>
#include <mppca/synth.hpp>

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace mppca {

// ---------------------------------------------------------------- text files

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("write to '" + path + "' failed");
}

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return {buf, res.ptr};
}

/// Locale-independent strict parse of a whole field. Accepts a leading '+';
/// rejects trailing garbage, nan and inf.
inline std::optional<double> parse_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct CsvLine {
  std::size_t line_number = 0;  // 1-based
  std::vector<std::string_view> fields;
};

inline std::vector<CsvLine> split_csv(std::string_view text) {
  std::vector<CsvLine> lines;
  std::size_t line_number = 0;
  while (!text.empty()) {
    ++line_number;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (trim(line).empty()) continue;
    CsvLine parsed{line_number, {}};
    while (true) {
      const auto comma = line.find(',');
      parsed.fields.push_back(trim(line.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    lines.push_back(std::move(parsed));
  }
  return lines;
}

inline std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

}  // namespace detail

// ----------------------------------------------------------------------- CSV

enum class CsvHeader { kAuto, kPresent, kAbsent };

struct CsvOptions {
  /// kAuto treats the first row as a header when any of its fields is
  /// non-empty and not a number.
  CsvHeader header = CsvHeader::kAuto;
};

/// Parses CSV text. Throws FormatError with file/line/column on ragged rows,
/// non-numeric fields and bad labels, DataError when no data rows remain.
inline Dataset parse_csv(std::string_view text, const CsvOptions& options = {},
                         const std::string& source = "<csv>") {
  const auto lines = detail::split_csv(text);
  if (lines.empty()) throw DataError(source + ": no data rows");

  bool has_header = options.header == CsvHeader::kPresent;
  if (options.header == CsvHeader::kAuto) {
    for (auto f : lines.front().fields) {
      if (!f.empty() && !parse_double(f)) has_header = true;
    }
  }

  Dataset ds;
  ds.source = source;
  const std::size_t width = lines.front().fields.size();
  std::size_t value_cols = width;
  bool labelled = false;
  if (has_header) {
    for (auto f : lines.front().fields) ds.column_names.emplace_back(f);
    if (ds.column_names.back() == "fault") {
      labelled = true;
      value_cols = width - 1;
      ds.column_names.pop_back();
    }
    if (value_cols == 0) throw FormatError(source + ": header names no data columns");
  }

  const std::size_t first = has_header ? 1 : 0;
  const auto n_rows = static_cast<Index>(lines.size() - first);
  if (n_rows == 0) throw DataError(source + ": no data rows");
  const auto d = static_cast<Index>(value_cols);
  ds.values = Matrix(n_rows, d);
  ds.observed = MaskMatrix(n_rows, d);
  std::vector<bool> labels;

  for (std::size_t li = first; li < lines.size(); ++li) {
    const auto& line = lines[li];
    const auto row = static_cast<Index>(li - first);
    if (line.fields.size() != width) {
      throw FormatError(source + ":" + std::to_string(line.line_number) + ": expected " +
                        std::to_string(width) + " fields, found " +
                        std::to_string(line.fields.size()));
    }
    for (std::size_t c = 0; c < value_cols; ++c) {
      const auto field = line.fields[c];
      const auto col = static_cast<Index>(c);
      if (field.empty()) {
        ds.values(row, col) = kMissing;
        ds.observed(row, col) = false;
        continue;
      }
      const auto v = parse_double(field);
      if (!v) {
        throw FormatError(detail::location(source, line.line_number, c + 1) +
                          ": not a finite number: '" + std::string(field) + "'");
      }
      ds.values(row, col) = *v;
      ds.observed(row, col) = true;
    }
    if (labelled) {
      const auto field = line.fields.back();
      if (field != "0" && field != "1") {
        throw FormatError(detail::location(source, line.line_number, width) +
                          ": fault label must be 0 or 1, found '" + std::string(field) + "'");
      }
      labels.push_back(field == "1");
    }
  }
  if (labelled) ds.fault_labels = std::move(labels);
  return ds;
}

inline Dataset read_csv(const std::string& path, const CsvOptions& options = {}) {
  return parse_csv(read_text_file(path), options, path);
}

/// Header (column names, or x1..xd when none are stored) plus a trailing
/// "fault" column when labels are present. Missing entries are empty.
inline std::string format_csv(const Dataset& ds, bool header = true) {
  ds.validate();
  std::string out;
  if (header) {
    const auto names = ds.column_names.empty() ? default_column_names(ds.cols()) : ds.column_names;
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c > 0) out += ',';
      out += names[c];
    }
    if (ds.fault_labels) out += ",fault";
    out += '\n';
  }
  for (Index n = 0; n < ds.rows(); ++n) {
    for (Index j = 0; j < ds.cols(); ++j) {
      if (j > 0) out += ',';
      if (ds.observed(n, j)) out += format_double(ds.values(n, j));
    }
    if (ds.fault_labels) out += (*ds.fault_labels)[static_cast<std::size_t>(n)] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

inline void write_csv(const Dataset& ds, const std::string& path, bool header = true) {
  write_text_file(path, format_csv(ds, header));
}

// ----------------------------------------------------------- standardization

/// Per-column affine map x -> (x - mean) / scale.
struct Standardization {
  Vector mean;
  Vector scale;

  Index dim() const { return mean.size(); }

  Vector apply(const VectorRef& x) const {
    detail::require_shape(x.size() == dim(), "sample length does not match standardization");
    return (x - mean).cwiseQuotient(scale);
  }

  /// Transforms observed entries in place; unobserved entries stay missing.
  void apply(Dataset& ds) const {
    detail::require_shape(ds.cols() == dim(), "data width does not match standardization");
    for (Index n = 0; n < ds.rows(); ++n) {
      for (Index j = 0; j < ds.cols(); ++j) {
        if (ds.observed(n, j)) ds.values(n, j) = (ds.values(n, j) - mean(j)) / scale(j);
      }
    }
  }
};

/// Column means and standard deviations (N - 1 denominator) over observed
/// entries only. Throws DataError naming the column when a column has fewer
/// than two observed values or zero spread.
inline Standardization fit_standardization(const Dataset& ds) {
  ds.validate();
  const Index d = ds.cols();
  Standardization s{Vector(d), Vector(d)};
  for (Index j = 0; j < d; ++j) {
    const std::string name =
        ds.column_names.empty() ? "x" + std::to_string(j + 1) : ds.column_names[static_cast<std::size_t>(j)];
    double sum = 0.0;
    double count = 0.0;
    for (Index n = 0; n < ds.rows(); ++n) {
      if (ds.observed(n, j)) {
        sum += ds.values(n, j);
        count += 1.0;
      }
    }
    if (count < 2.0) throw DataError("column '" + name + "' has fewer than two observed values");
    const double mean = sum / count;
    double ss = 0.0;
    for (Index n = 0; n < ds.rows(); ++n) {
      if (ds.observed(n, j)) ss += (ds.values(n, j) - mean) * (ds.values(n, j) - mean);
    }
    const double scale = std::sqrt(ss / (count - 1.0));
    if (!(scale > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw DataError("column '" + name + "' has zero variance");
    }
    s.mean(j) = mean;
    s.scale(j) = scale;
  }
  return s;
}

inline std::pair<Dataset, Standardization> standardize(const Dataset& ds) {
  Standardization s = fit_standardization(ds);
  Dataset out = ds;
  s.apply(out);
  return {std::move(out), std::move(s)};
}

// ------------------------------------------------------------ model artifact

inline constexpr const char* kModelFormat = "mppca-model";
inline constexpr int kModelVersion = 1;
inline constexpr const char* kScenarioFormat = "mppca-scenario";
inline constexpr int kScenarioVersion = 1;

struct HEntry {
  Index k = 0;
  std::optional<double> h;  // empty when the fit for this K failed
};

/// Training settings and outcome stored alongside the parameters.
struct TrainingRecord {
  TrainingConfig config;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double h_value = 0.0;
  std::vector<HEntry> h_table;
};

struct ModelArtifact {
  MixtureParams params;
  std::optional<ThresholdSet> thresholds;
  StatisticForm form = StatisticForm::kPosteriorNormalized;
  std::optional<Standardization> standardization;
  std::vector<std::string> column_names;
  TrainingRecord training;

  void validate() const {
    params.validate();
    if (!column_names.empty() && static_cast<Index>(column_names.size()) != params.dim()) {
      throw FormatError("column name count does not match model dimension");
    }
    if (standardization) {
      const auto& s = *standardization;
      if (s.mean.size() != params.dim() || s.scale.size() != params.dim()) {
        throw FormatError("standardization length does not match model dimension");
      }
      if (!(s.scale.array() > 0.0).all()) throw FormatError("standardization scale must be > 0");
    }
    if (thresholds) {
      const auto& t = *thresholds;
      if (!(t.alpha > 0.0 && t.alpha < 1.0)) throw FormatError("threshold alpha must lie in (0, 1)");
      for (double v : {t.j_t2, t.j_spe, t.j_tc2, t.h_t2, t.h_spe, t.h_tc2}) {
        if (!std::isfinite(v)) throw FormatError("thresholds must be finite");
      }
    }
  }
};

namespace detail {

using Json = nlohmann::ordered_json;

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index j = 0; j < v.size(); ++j) a.push_back(v(j));
  return a;
}

inline Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

inline const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw FormatError("expected an object around '" + std::string(key) + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError("missing field '" + std::string(key) + "'");
  return *it;
}

inline double number_of(const Json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::int64_t integer_of(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw FormatError(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

inline Vector vector_of(const Json& j, Index expected, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != expected) {
    throw FormatError(std::string(what) + " must be an array of length " + std::to_string(expected));
  }
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) v(i) = number_of(j[static_cast<std::size_t>(i)], what);
  return v;
}

inline Matrix matrix_of(const Json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw FormatError(std::string(what) + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) m.row(r) = vector_of(j[static_cast<std::size_t>(r)], cols, what).transpose();
  return m;
}

inline Json components_json(const MixtureParams& m) {
  Json comps = Json::array();
  for (Index i = 0; i < m.num_components(); ++i) {
    const PpcaParams& p = m.locals[static_cast<std::size_t>(i)];
    Json c = Json::object();
    c["weight"] = m.pi(i);
    c["mean"] = vector_json(p.mu);
    c["loading"] = matrix_json(p.W);
    c["noise_variance"] = p.sigma2;
    comps.push_back(std::move(c));
  }
  return comps;
}

inline MixtureParams components_of(const Json& comps, Index d, Index q) {
  if (!comps.is_array() || comps.empty()) throw FormatError("components must be a non-empty array");
  MixtureParams m;
  m.pi = Vector(static_cast<Index>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Json& c = comps[i];
    PpcaParams p;
    m.pi(static_cast<Index>(i)) = number_of(field(c, "weight"), "weight");
    p.mu = vector_of(field(c, "mean"), d, "mean");
    p.W = matrix_of(field(c, "loading"), d, q, "loading");
    p.sigma2 = number_of(field(c, "noise_variance"), "noise_variance");
    m.locals.push_back(std::move(p));
  }
  return m;
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace detail

inline InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "kmeans") return InitStrategy::kKMeans;
  if (s == "random-partition") return InitStrategy::kRandomPartition;
  throw std::invalid_argument("unknown initialization '" + s + "'");
}

inline SelectionRule parse_selection_rule(const std::string& s) {
  if (s == "min-entropy") return SelectionRule::kMinEntropy;
  if (s == "delta-change") return SelectionRule::kDeltaChange;
  throw std::invalid_argument("unknown selection rule '" + s + "'");
}

inline std::string to_string(InitStrategy s) {
  return s == InitStrategy::kRandomPartition ? "random-partition" : "kmeans";
}

inline std::string to_string(SelectionRule r) {
  return r == SelectionRule::kDeltaChange ? "delta-change" : "min-entropy";
}

/// Canonical JSON text (two-space indent, trailing newline).
inline std::string serialize_model(const ModelArtifact& a) {
  using detail::Json;
  a.validate();
  Json j = Json::object();
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["dim"] = a.params.dim();
  j["latent_dim"] = a.params.latent_dim();
  j["num_components"] = a.params.num_components();
  j["statistic_form"] = to_string(a.form);
  j["columns"] = a.column_names;
  j["components"] = detail::components_json(a.params);
  if (a.thresholds) {
    const ThresholdSet& t = *a.thresholds;
    j["thresholds"] = Json{{"alpha", t.alpha},         {"t2", t.j_t2},
                           {"spe", t.j_spe},           {"tc2", t.j_tc2},
                           {"bandwidth_t2", t.h_t2},   {"bandwidth_spe", t.h_spe},
                           {"bandwidth_tc2", t.h_tc2}, {"sample_count", t.sample_count}};
  } else {
    j["thresholds"] = nullptr;
  }
  if (a.standardization) {
    j["standardization"] = Json{{"mean", detail::vector_json(a.standardization->mean)},
                                {"scale", detail::vector_json(a.standardization->scale)}};
  } else {
    j["standardization"] = nullptr;
  }
  const TrainingRecord& r = a.training;
  const TrainingConfig& c = r.config;
  Json tr = Json::object();
  tr["k"] = c.k;
  tr["q"] = c.q;
  tr["contribution_rate"] = detail::optional_json(c.contribution_rate);
  tr["k_range"] = c.k_range ? Json{{"min", c.k_range->min}, {"max", c.k_range->max}} : Json(nullptr);
  tr["seed"] = c.seed;
  tr["max_iterations"] = c.max_iterations;
  tr["tolerance"] = c.tolerance;
  tr["sigma2_floor"] = c.sigma2_floor;
  tr["init"] = to_string(c.init);
  tr["kmeans_restarts"] = c.kmeans_restarts;
  tr["selection_rule"] = to_string(c.rule);
  tr["delta"] = detail::optional_json(c.delta);
  tr["log_likelihood"] = r.log_likelihood;
  tr["iterations"] = r.iterations;
  tr["converged"] = r.converged;
  tr["h_value"] = r.h_value;
  Json table = Json::array();
  for (const auto& e : r.h_table) table.push_back(Json{{"k", e.k}, {"h", detail::optional_json(e.h)}});
  tr["h_table"] = std::move(table);
  j["training"] = std::move(tr);
  return j.dump(2) + "\n";
}

/// Parses and validates a model document. Any schema problem, a version
/// other than kModelVersion, or mixing weights off 1 by more than 1e-12
/// raises FormatError.
inline ModelArtifact parse_model(const std::string& text) {
  using detail::field;
  using detail::integer_of;
  using detail::number_of;
  using detail::Json;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (field(j, "format") != kModelFormat) throw FormatError("not an mppca model file");
    const auto version = integer_of(field(j, "version"), "version");
    if (version != kModelVersion) {
      throw FormatError("unsupported model version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelVersion) + ")");
    }
    const Index d = integer_of(field(j, "dim"), "dim");
    const Index q = integer_of(field(j, "latent_dim"), "latent_dim");
    const Index k = integer_of(field(j, "num_components"), "num_components");
    if (d < 1 || q < 1 || k < 1) throw FormatError("dim, latent_dim and num_components must be >= 1");

    ModelArtifact a;
    a.form = parse_statistic_form(field(j, "statistic_form").get<std::string>());
    a.column_names = field(j, "columns").get<std::vector<std::string>>();
    a.params = detail::components_of(field(j, "components"), d, q);
    if (a.params.num_components() != k) throw FormatError("num_components does not match components");

    const Json& th = field(j, "thresholds");
    if (!th.is_null()) {
      ThresholdSet t;
      t.alpha = number_of(field(th, "alpha"), "alpha");
      t.j_t2 = number_of(field(th, "t2"), "t2");
      t.j_spe = number_of(field(th, "spe"), "spe");
      t.j_tc2 = number_of(field(th, "tc2"), "tc2");
      t.h_t2 = number_of(field(th, "bandwidth_t2"), "bandwidth_t2");
      t.h_spe = number_of(field(th, "bandwidth_spe"), "bandwidth_spe");
      t.h_tc2 = number_of(field(th, "bandwidth_tc2"), "bandwidth_tc2");
      t.sample_count = integer_of(field(th, "sample_count"), "sample_count");
      a.thresholds = t;
    }
    const Json& st = field(j, "standardization");
    if (!st.is_null()) {
      a.standardization = Standardization{detail::vector_of(field(st, "mean"), d, "standardization mean"),
                                          detail::vector_of(field(st, "scale"), d, "standardization scale")};
    }

    const Json& tr = field(j, "training");
    TrainingConfig& c = a.training.config;
    c.k = integer_of(field(tr, "k"), "k");
    c.q = integer_of(field(tr, "q"), "q");
    if (const Json& rate = field(tr, "contribution_rate"); !rate.is_null()) {
      c.contribution_rate = number_of(rate, "contribution_rate");
    }
    if (const Json& range = field(tr, "k_range"); !range.is_null()) {
      c.k_range = KRange{integer_of(field(range, "min"), "k_range.min"),
                         integer_of(field(range, "max"), "k_range.max")};
    }
    c.seed = field(tr, "seed").get<std::uint64_t>();
    c.max_iterations = static_cast<int>(integer_of(field(tr, "max_iterations"), "max_iterations"));
    c.tolerance = number_of(field(tr, "tolerance"), "tolerance");
    c.sigma2_floor = number_of(field(tr, "sigma2_floor"), "sigma2_floor");
    c.init = parse_init_strategy(field(tr, "init").get<std::string>());
    c.kmeans_restarts = static_cast<int>(integer_of(field(tr, "kmeans_restarts"), "kmeans_restarts"));
    c.rule = parse_selection_rule(field(tr, "selection_rule").get<std::string>());
    if (const Json& delta = field(tr, "delta"); !delta.is_null()) c.delta = number_of(delta, "delta");
    a.training.log_likelihood = number_of(field(tr, "log_likelihood"), "log_likelihood");
    a.training.iterations = static_cast<int>(integer_of(field(tr, "iterations"), "iterations"));
    a.training.converged = field(tr, "converged").get<bool>();
    a.training.h_value = number_of(field(tr, "h_value"), "h_value");
    for (const Json& e : field(tr, "h_table")) {
      HEntry h{integer_of(field(e, "k"), "h_table.k"), std::nullopt};
      if (const Json& v = field(e, "h"); !v.is_null()) h.h = number_of(v, "h_table.h");
      a.training.h_table.push_back(h);
    }

    try {
      a.params.validate();
    } catch (const std::exception& e) {
      throw FormatError(std::string("invalid model parameters: ") + e.what());
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model schema violation: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model schema violation: ") + e.what());
  }
}

inline void write_model(const ModelArtifact& a, const std::string& path) {
  write_text_file(path, serialize_model(a));
}

inline ModelArtifact read_model(const std::string& path) { return parse_model(read_text_file(path)); }

// ------------------------------------------------------------ scenario files

/// A scenario document gives either explicit "components" (same layout as
/// the model file) or a "random_clusters" block expanded by make_clusters:
///
///   {"format": "mppca-scenario", "version": 1,
///    "random_clusters": {"dim", "latent_dim", "clusters", "separation",
///                        "noise_variance", "loading_scale", "seed"},
///    "n_normal", "n_test", "missing_rate", "train_missing_rate", "seed",
///    "fault": {"type", "magnitude", "onset", "variables"}}
///
/// Fields of "random_clusters" other than "dim"/"latent_dim"/"clusters" are
/// optional and default as in ScenarioShape.
inline ScenarioSpec parse_scenario(const std::string& text) {
  using detail::field;
  using detail::integer_of;
  using detail::number_of;
  using detail::Json;
  try {
    const Json j = Json::parse(text);
    if (field(j, "format") != kScenarioFormat) throw FormatError("not an mppca scenario file");
    if (integer_of(field(j, "version"), "version") != kScenarioVersion) {
      throw FormatError("unsupported scenario version");
    }
    ScenarioSpec s;
    if (j.contains("components")) {
      const Json& comps = j["components"];
      if (!comps.is_array() || comps.empty()) throw FormatError("components must be a non-empty array");
      const Json& first = comps[0];
      const auto d = static_cast<Index>(field(first, "mean").size());
      const auto loading = field(first, "loading");
      const auto q = loading.empty() ? Index{0} : static_cast<Index>(loading[0].size());
      s.clusters = detail::components_of(comps, d, q);
    } else {
      const Json& r = field(j, "random_clusters");
      ScenarioShape shape;
      shape.dim = integer_of(field(r, "dim"), "dim");
      shape.latent_dim = integer_of(field(r, "latent_dim"), "latent_dim");
      shape.clusters = integer_of(field(r, "clusters"), "clusters");
      shape.separation = r.value("separation", shape.separation);
      shape.noise_variance = r.value("noise_variance", shape.noise_variance);
      shape.loading_scale = r.value("loading_scale", shape.loading_scale);
      shape.seed = r.value("seed", shape.seed);
      s.clusters = make_clusters(shape);
    }
    s.n_normal = integer_of(field(j, "n_normal"), "n_normal");
    s.n_test = integer_of(field(j, "n_test"), "n_test");
    s.missing_rate = j.value("missing_rate", 0.0);
    s.train_missing_rate = j.value("train_missing_rate", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("fault")) {
      const Json& f = j["fault"];
      s.fault.type = parse_fault_type(field(f, "type").get<std::string>());
      s.fault.magnitude = number_of(field(f, "magnitude"), "magnitude");
      s.fault.onset = integer_of(field(f, "onset"), "onset");
      s.fault.variables = field(f, "variables").get<std::vector<Index>>();
    } else {
      s.fault.onset = s.n_test;
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario schema violation: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("scenario schema violation: ") + e.what());
  }
}

/// Writes the explicit-components form.
inline std::string serialize_scenario(const ScenarioSpec& s) {
  using detail::Json;
  s.validate();
  Json j = Json::object();
  j["format"] = kScenarioFormat;
  j["version"] = kScenarioVersion;
  j["components"] = detail::components_json(s.clusters);
  j["n_normal"] = s.n_normal;
  j["n_test"] = s.n_test;
  j["missing_rate"] = s.missing_rate;
  j["train_missing_rate"] = s.train_missing_rate;
  j["seed"] = s.seed;
  j["fault"] = Json{{"type", to_string(s.fault.type)},
                    {"magnitude", s.fault.magnitude},
                    {"onset", s.fault.onset},
                    {"variables", s.fault.variables}};
  return j.dump(2) + "\n";
}

inline ScenarioSpec read_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

// ---------------------------------------------------------- statistics files

/// Rows of a monitoring statistics file:
///   index,t2,spe,tc2,j_t2,j_spe,j_tc2,alarm
struct StatisticsTable {
  std::vector<std::int64_t> index;
  std::vector<double> t2, spe, tc2, j_t2, j_spe, j_tc2;
  std::vector<bool> alarm;

  std::size_t size() const { return index.size(); }
};

inline constexpr const char* kStatisticsHeader = "index,t2,spe,tc2,j_t2,j_spe,j_tc2,alarm";

inline std::string format_statistics(const StatisticsTable& t) {
  std::string out = std::string(kStatisticsHeader) + "\n";
  for (std::size_t n = 0; n < t.size(); ++n) {
    out += std::to_string(t.index[n]);
    for (double v : {t.t2[n], t.spe[n], t.tc2[n], t.j_t2[n], t.j_spe[n], t.j_tc2[n]}) {
      out += ',';
      out += format_double(v);
    }
    out += t.alarm[n] ? ",1\n" : ",0\n";
  }
  return out;
}

inline StatisticsTable parse_statistics(std::string_view text, const std::string& source = "<statistics>") {
  const auto lines = detail::split_csv(text);
  if (lines.empty()) throw FormatError(source + ": empty statistics file");
  std::string header;
  for (std::size_t c = 0; c < lines.front().fields.size(); ++c) {
    if (c > 0) header += ',';
    header += lines.front().fields[c];
  }
  if (header != kStatisticsHeader) {
    throw FormatError(source + ": statistics header must be '" + std::string(kStatisticsHeader) + "'");
  }
  StatisticsTable t;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.fields.size() != 8) {
      throw FormatError(source + ":" + std::to_string(line.line_number) + ": expected 8 fields");
    }
    std::int64_t idx = 0;
    const auto f0 = line.fields[0];
    const auto res = std::from_chars(f0.data(), f0.data() + f0.size(), idx);
    if (res.ec != std::errc() || res.ptr != f0.data() + f0.size()) {
      throw FormatError(detail::location(source, line.line_number, 1) + ": index must be an integer");
    }
    t.index.push_back(idx);
    std::vector<double>* cols[] = {&t.t2, &t.spe, &t.tc2, &t.j_t2, &t.j_spe, &t.j_tc2};
    for (std::size_t c = 0; c < 6; ++c) {
      const auto v = parse_double(line.fields[c + 1]);
      if (!v) throw FormatError(detail::location(source, line.line_number, c + 2) + ": not a finite number");
      cols[c]->push_back(*v);
    }
    const auto a = line.fields[7];
    if (a != "0" && a != "1") {
      throw FormatError(detail::location(source, line.line_number, 8) + ": alarm must be 0 or 1");
    }
    t.alarm.push_back(a == "1");
  }
  return t;
}

/// Alarm file rows: index,alarm[,fault]
struct AlarmTable {
  std::vector<std::int64_t> index;
  std::vector<bool> alarm;
  std::optional<std::vector<bool>> fault;
};

inline std::string format_alarms(const AlarmTable& t) {
  std::string out = t.fault ? "index,alarm,fault\n" : "index,alarm\n";
  for (std::size_t n = 0; n < t.index.size(); ++n) {
    out += std::to_string(t.index[n]);
    out += t.alarm[n] ? ",1" : ",0";
    if (t.fault) out += (*t.fault)[n] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

inline AlarmTable parse_alarms(std::string_view text, const std::string& source = "<alarms>") {
  const auto lines = detail::split_csv(text);
  if (lines.empty()) throw FormatError(source + ": empty alarm file");
  const auto& head = lines.front().fields;
  const bool labelled = head.size() == 3 && head[2] == "fault";
  if (head.size() < 2 || head[0] != "index" || head[1] != "alarm" || (head.size() == 3 && !labelled) ||
      head.size() > 3) {
    throw FormatError(source + ": alarm header must be 'index,alarm' or 'index,alarm,fault'");
  }
  AlarmTable t;
  if (labelled) t.fault.emplace();
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& line = lines[li];
    if (line.fields.size() != head.size()) {
      throw FormatError(source + ":" + std::to_string(line.line_number) + ": expected " +
                        std::to_string(head.size()) + " fields");
    }
    std::int64_t idx = 0;
    const auto f0 = line.fields[0];
    const auto res = std::from_chars(f0.data(), f0.data() + f0.size(), idx);
    if (res.ec != std::errc() || res.ptr != f0.data() + f0.size()) {
      throw FormatError(detail::location(source, line.line_number, 1) + ": index must be an integer");
    }
    t.index.push_back(idx);
    for (std::size_t c = 1; c < head.size(); ++c) {
      const auto f = line.fields[c];
      if (f != "0" && f != "1") {
        throw FormatError(detail::location(source, line.line_number, c + 1) + ": flag must be 0 or 1");
      }
      (c == 1 ? t.alarm : *t.fault).push_back(f == "1");
    }
  }
  return t;
}

}  // namespace mppca

#endif  // MPPCA_DATA_IO_HPP
