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

#include "cli.hpp"

#include <mppca/mppca.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>

namespace mppca::cli {
namespace {

const std::map<std::string, CsvHeader> kHeaderChoices{
    {"auto", CsvHeader::kAuto}, {"yes", CsvHeader::kPresent}, {"no", CsvHeader::kAbsent}};

struct DataArgs {
  std::string path;
  std::string header = "auto";
  std::string missing = "on";

  Dataset load() const { return read_csv(path, CsvOptions{kHeaderChoices.at(header)}); }
  bool allow_missing() const { return missing == "on"; }
};

void add_data_args(CLI::App* cmd, DataArgs& d, const std::string& help) {
  cmd->add_option("--data", d.path, help)->required()->check(CLI::ExistingFile);
  cmd->add_option("--header", d.header, "Header row: auto, yes or no")
      ->check(CLI::IsMember({"auto", "yes", "no"}))
      ->capture_default_str();
  cmd->add_option("--missing", d.missing, "Accept empty fields as missing values: on or off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

struct FitArgs {
  std::optional<Index> k;
  std::optional<Index> k_min;
  std::optional<Index> k_max;
  std::optional<Index> q;
  double contribution_rate = 0.9;
  double alpha = 0.99;
  std::string form = "posterior-normalized";
  std::string rule = "min-entropy";
  std::optional<double> delta;
  std::string init = "kmeans";
  int kmeans_restarts = 10;
  int max_iterations = 500;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  bool standardize = false;
};

void add_fit_args(CLI::App* cmd, FitArgs& f, bool fixed_k) {
  if (fixed_k) {
    cmd->add_option("-k,--components", f.k, "Fixed number of local models")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--k-min", f.k_min, "Smallest K tried by selection (default 1)")->check(CLI::PositiveNumber);
  cmd->add_option("--k-max", f.k_max, "Largest K tried by selection (default 10)")->check(CLI::PositiveNumber);
  cmd->add_option("-q,--latent-dim", f.q, "Latent dimension; overrides --contribution-rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--contribution-rate", f.contribution_rate,
                  "Cumulative eigenvalue fraction used to pick q")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Confidence level of the control limits")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--form", f.form, "Statistic form: posterior-normalized or literal")
      ->check(CLI::IsMember({"posterior-normalized", "literal"}))
      ->capture_default_str();
  cmd->add_option("--rule", f.rule, "K selection rule: min-entropy or delta-change")
      ->check(CLI::IsMember({"min-entropy", "delta-change"}))
      ->capture_default_str();
  cmd->add_option("--delta", f.delta, "Tolerance of the delta-change rule (default 5% of |H(K_min)|)");
  cmd->add_option("--init", f.init, "EM initialization: kmeans or random-partition")
      ->check(CLI::IsMember({"kmeans", "random-partition"}))
      ->capture_default_str();
  cmd->add_option("--kmeans-restarts", f.kmeans_restarts, "k-means seedings tried; lowest inertia wins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iterations", f.max_iterations, "EM iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tolerance", f.tolerance, "Relative log-likelihood change for convergence")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--standardize", f.standardize, "Standardize columns before fitting");
}

TrainOptions train_options(const FitArgs& f, bool select) {
  TrainOptions o;
  TrainingConfig& c = o.config;
  c.k = f.k.value_or(1);
  if (f.q) {
    c.q = *f.q;
  } else {
    c.contribution_rate = f.contribution_rate;
  }
  c.max_iterations = f.max_iterations;
  c.tolerance = f.tolerance;
  c.seed = f.seed;
  c.init = parse_init_strategy(f.init);
  c.kmeans_restarts = f.kmeans_restarts;
  c.rule = parse_selection_rule(f.rule);
  c.delta = f.delta;
  if (select) c.k_range = KRange{f.k_min.value_or(1), f.k_max.value_or(10)};
  o.select = select;
  o.alpha = f.alpha;
  o.form = parse_statistic_form(f.form);
  o.standardize = f.standardize;
  return o;
}

void print_training(const TrainOutcome& t, std::ostream& out) {
  const ModelArtifact& a = t.artifact;
  if (t.selection) {
    out << "K     H(K)\n";
    for (std::size_t j = 0; j < t.selection->candidates.size(); ++j) {
      const auto& c = t.selection->candidates[j];
      out << c.k << "     ";
      if (c.report) {
        out << format_double(t.selection->h_values[j]);
      } else {
        out << "failed: " << c.error;
      }
      out << (c.k == t.selection->best_k ? "  <- selected" : "") << "\n";
    }
  }
  out << "K = " << a.params.num_components() << ", q = " << a.params.latent_dim()
      << ", d = " << a.params.dim() << "\n";
  out << "log-likelihood = " << format_double(a.training.log_likelihood) << " after "
      << a.training.iterations << " iterations" << (a.training.converged ? "" : " (not converged)")
      << "\n";
  if (a.thresholds) {
    out << "limits (alpha = " << format_double(a.thresholds->alpha)
        << "): T2 " << format_double(a.thresholds->j_t2) << ", SPE " << format_double(a.thresholds->j_spe)
        << ", Tc2 " << format_double(a.thresholds->j_tc2) << "\n";
  }
}

std::string percent(const std::optional<double>& v) {
  return v ? format_double(*v) + "%" : std::string("n/a");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixture-of-PPCA process monitoring", "mppca"};
  app.require_subcommand(1);

  // train
  DataArgs train_data;
  FitArgs train_fit;
  std::string train_output;
  auto* train = app.add_subcommand("train", "Fit a model on normal data and compute control limits");
  add_data_args(train, train_data, "Training CSV (normal operation)");
  add_fit_args(train, train_fit, true);
  train->add_option("-o,--output", train_output, "Model file to write")->required();

  // select-k
  DataArgs select_data;
  FitArgs select_fit;
  std::string select_output;
  auto* select = app.add_subcommand("select-k", "Fit every K in a range and report H(K)");
  add_data_args(select, select_data, "Training CSV (normal operation)");
  add_fit_args(select, select_fit, false);
  select->add_option("-o,--output", select_output, "Optionally write the selected model");

  // threshold
  DataArgs threshold_data;
  std::string threshold_model;
  std::string threshold_output;
  double threshold_alpha = 0.99;
  auto* threshold = app.add_subcommand("threshold", "Recompute control limits of a model on normal data");
  add_data_args(threshold, threshold_data, "Normal-operation CSV");
  threshold->add_option("--model", threshold_model, "Model file")->required()->check(CLI::ExistingFile);
  threshold->add_option("--alpha", threshold_alpha, "Confidence level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  threshold->add_option("-o,--output", threshold_output, "Model file to write")->required();

  // monitor
  DataArgs monitor_data;
  std::string monitor_model;
  std::string monitor_stats;
  std::string monitor_alarms;
  std::string monitor_mode = "combined";
  auto* monitor_cmd = app.add_subcommand("monitor", "Score a test stream and raise alarms");
  add_data_args(monitor_cmd, monitor_data, "Test CSV");
  monitor_cmd->add_option("--model", monitor_model, "Model file")->required()->check(CLI::ExistingFile);
  monitor_cmd->add_option("--stats", monitor_stats, "Per-sample statistics CSV to write")->required();
  monitor_cmd->add_option("--alarms", monitor_alarms, "Alarm CSV to write")->required();
  monitor_cmd->add_option("--mode", monitor_mode, "Alarm rule: combined (Tc2) or dual (T2 or SPE)")
      ->check(CLI::IsMember({"combined", "dual"}))
      ->capture_default_str();

  // evaluate
  std::string evaluate_alarms;
  std::string evaluate_labels;
  std::string evaluate_output;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Missing and false alarm rates from an alarm file");
  evaluate_cmd->add_option("--alarms", evaluate_alarms, "Alarm CSV (index,alarm[,fault])")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--labels", evaluate_labels,
                           "CSV with a 'fault' column; needed when the alarm file has none")
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("-o,--output", evaluate_output, "JSON report to write");

  // simulate
  std::string sim_scenario;
  std::string sim_train;
  std::string sim_test;
  std::string sim_scenario_out;
  ScenarioShape shape;
  ScenarioSpec spec;
  std::string sim_fault = "step-bias";
  std::optional<Index> sim_onset;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic multimode scenario");
  simulate->add_option("--scenario", sim_scenario, "Scenario JSON; replaces the generation flags")
      ->check(CLI::ExistingFile);
  simulate->add_option("--train-output", sim_train, "Training CSV to write")->required();
  simulate->add_option("--test-output", sim_test, "Labelled test CSV to write")->required();
  simulate->add_option("--scenario-output", sim_scenario_out, "Write the expanded scenario JSON");
  simulate->add_option("--dim", shape.dim, "Observed dimension")->capture_default_str();
  simulate->add_option("--latent-dim", shape.latent_dim, "Latent dimension of every cluster")
      ->capture_default_str();
  simulate->add_option("--clusters", shape.clusters, "Number of operating modes")->capture_default_str();
  simulate->add_option("--separation", shape.separation, "Minimum mean distance in noise sigmas")
      ->capture_default_str();
  simulate->add_option("--noise-variance", shape.noise_variance, "Noise variance of every cluster")
      ->capture_default_str();
  simulate->add_option("--n-normal", spec.n_normal, "Training samples")->capture_default_str();
  simulate->add_option("--n-test", spec.n_test, "Test samples")->capture_default_str();
  simulate->add_option("--fault", sim_fault, "step-bias, ramp-drift, gain-change or noise-increase")
      ->check(CLI::IsMember({"step-bias", "ramp-drift", "gain-change", "noise-increase"}))
      ->capture_default_str();
  simulate->add_option("--magnitude", spec.fault.magnitude, "Fault magnitude in standard deviations of each affected variable")
      ->capture_default_str();
  simulate->add_option("--onset", sim_onset, "0-based index of the first faulty test sample (default: none)");
  simulate->add_option("--fault-vars", spec.fault.variables, "0-based affected columns, comma separated")
      ->delimiter(',');
  simulate->add_option("--missing-rate", spec.missing_rate, "MCAR rate in the test stream")
      ->capture_default_str();
  simulate->add_option("--train-missing-rate", spec.train_missing_rate, "MCAR rate in the training stream")
      ->capture_default_str();
  simulate->add_option("--seed", spec.seed, "Random seed")->capture_default_str();

  // report
  std::string report_stats;
  std::string report_dir;
  auto* report = app.add_subcommand("report", "SVG charts of a statistics file");
  report->add_option("--stats", report_stats, "Statistics CSV from monitor")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("-o,--output-dir", report_dir, "Directory for the chart files")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (*train || *select) {
      const bool is_train = train->parsed();
      const DataArgs& d = is_train ? train_data : select_data;
      const FitArgs& f = is_train ? train_fit : select_fit;
      if (is_train && f.k && (f.k_min || f.k_max)) {
        throw std::invalid_argument("--components cannot be combined with --k-min/--k-max");
      }
      const bool do_select = !is_train || !f.k;
      TrainOptions o = train_options(f, do_select);
      o.allow_missing = d.allow_missing();
      const Dataset data = d.load();
      TrainOutcome t;
      try {
        t = mppca::train(data, o);
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string(e.what()) + " (seed " + std::to_string(o.config.seed) +
                                 "; rerun with --seed " + std::to_string(o.config.seed) + " to replay)");
      }
      print_training(t, out);
      const std::string& path = is_train ? train_output : select_output;
      if (!path.empty()) {
        write_model(t.artifact, path);
        out << "wrote " << path << "\n";
      }
      return kExitOk;
    }

    if (*threshold) {
      ModelArtifact a = read_model(threshold_model);
      const Dataset data = threshold_data.load();
      if (!threshold_data.allow_missing() && !data.complete()) {
        throw DataError(data.source + ": data contains missing values and missing-data handling is off");
      }
      a.thresholds = thresholds_for(a, data, threshold_alpha);
      write_model(a, threshold_output);
      out << "limits (alpha = " << format_double(a.thresholds->alpha) << "): T2 "
          << format_double(a.thresholds->j_t2) << ", SPE " << format_double(a.thresholds->j_spe) << ", Tc2 "
          << format_double(a.thresholds->j_tc2) << "\n";
      return kExitOk;
    }

    if (*monitor_cmd) {
      const ModelArtifact a = read_model(monitor_model);
      const Dataset data = monitor_data.load();
      const StatisticsTable t =
          mppca::monitor(a, data, parse_detection_mode(monitor_mode), monitor_data.allow_missing());
      AlarmTable alarms{t.index, t.alarm, data.fault_labels};
      write_text_file(monitor_stats, format_statistics(t));
      write_text_file(monitor_alarms, format_alarms(alarms));
      std::int64_t count = 0;
      std::optional<std::int64_t> first;
      for (std::size_t n = 0; n < t.size(); ++n) {
        if (!t.alarm[n]) continue;
        ++count;
        if (!first) first = t.index[n];
      }
      out << t.size() << " samples, " << count << " alarms (" << monitor_mode << " mode)";
      if (first) out << ", first alarm at index " << *first;
      out << "\n";
      return count > 0 ? kExitAlarm : kExitOk;
    }

    if (*evaluate_cmd) {
      const AlarmTable alarms = parse_alarms(read_text_file(evaluate_alarms), evaluate_alarms);
      std::vector<bool> labels;
      if (!evaluate_labels.empty()) {
        const Dataset ds = read_csv(evaluate_labels, CsvOptions{CsvHeader::kPresent});
        if (!ds.fault_labels) throw DataError(evaluate_labels + ": no 'fault' column");
        labels = *ds.fault_labels;
      } else if (alarms.fault) {
        labels = *alarms.fault;
      } else {
        throw DataError("the alarm file has no fault column; pass --labels");
      }
      const EvaluationReport r = mppca::evaluate(alarms.alarm, labels);
      out << "MAR = " << percent(r.mar) << " (" << r.missed << " of " << r.detected + r.missed
          << " faulty samples missed)\n";
      out << "FAR = " << percent(r.far) << " (" << r.false_alarms << " of " << r.false_alarms + r.quiet
          << " normal samples alarmed)\n";
      if (!evaluate_output.empty()) {
        nlohmann::ordered_json j;
        j["mar_percent"] = r.mar ? nlohmann::ordered_json(*r.mar) : nlohmann::ordered_json(nullptr);
        j["far_percent"] = r.far ? nlohmann::ordered_json(*r.far) : nlohmann::ordered_json(nullptr);
        j["detected"] = r.detected;
        j["missed"] = r.missed;
        j["false_alarms"] = r.false_alarms;
        j["quiet"] = r.quiet;
        write_text_file(evaluate_output, j.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (*simulate) {
      ScenarioSpec s = spec;
      if (!sim_scenario.empty()) {
        s = read_scenario(sim_scenario);
      } else {
        shape.seed = spec.seed;
        s.clusters = make_clusters(shape);
        s.fault.type = parse_fault_type(sim_fault);
        s.fault.onset = sim_onset.value_or(s.n_test);
      }
      const ScenarioData data = generate(s);
      write_csv(data.train, sim_train);
      write_csv(data.test, sim_test);
      if (!sim_scenario_out.empty()) write_text_file(sim_scenario_out, serialize_scenario(s));
      out << "wrote " << data.train.rows() << " training and " << data.test.rows() << " test samples\n";
      return kExitOk;
    }

    if (*report) {
      const StatisticsTable t = parse_statistics(read_text_file(report_stats), report_stats);
      const auto charts = chart_series(t);
      std::filesystem::create_directories(report_dir);
      for (const auto& c : charts) {
        const auto base = (std::filesystem::path(report_dir) / c.name).string();
        write_text_file(base + ".svg", render_chart_svg(c));
        write_text_file(base + ".csv", format_series_csv(c));
      }
      out << "wrote " << charts.size() << " charts to " << report_dir << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace mppca::cli
