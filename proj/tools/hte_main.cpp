// Batch front end: fit/predict causal forests, variable importance with
// permutation p-values, repeated-split inference (BLP/GATE/CLAN), synthetic
// benchmark runs, and smart-meter feature extraction. Every command is a pure
// function of (input files, flags, seed); outputs are CSV plus a JSON run
// manifest per output directory.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hte/csv.hpp"
#include "hte/dataset.hpp"
#include "hte/forest.hpp"
#include "hte/importance.hpp"
#include "hte/inference.hpp"
#include "hte/meter.hpp"
#include "hte/simulate.hpp"
#include "hte/tariff.hpp"
#include "hte/tree.hpp"
#include "hte/version.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

struct CommonOpts {
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out_dir;
};

struct DataOpts {
  std::string data_path;
  std::string schema_path;
  std::string outcome_col = "y";
  std::string treatment_col = "d";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--seed", opts.seed, "random seed (required; no wall-clock default)")
      ->required();
  cmd->add_option("--workers", opts.workers, "worker thread count")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", opts.out_dir, "output directory")->required();
}

void add_data(CLI::App* cmd, DataOpts& opts) {
  cmd->add_option("--data", opts.data_path, "dataset CSV")->required();
  cmd->add_option("--schema", opts.schema_path, "covariate schema sidecar")->required();
  cmd->add_option("--outcome", opts.outcome_col, "outcome column name")->default_val("y");
  cmd->add_option("--treatment", opts.treatment_col, "treatment column name")->default_val("d");
}

void add_forest(CLI::App* cmd, hte::ForestParams& params) {
  cmd->add_option("--trees", params.num_trees, "trees in the ensemble")->default_val(15000);
  cmd->add_option("--sample-fraction", params.sample_fraction, "subsample fraction per tree")
      ->default_val(0.5);
  cmd->add_option("--mtry-fraction", params.mtry_fraction, "fraction of columns drawn per split")
      ->default_val(1.0 / 3.0);
  cmd->add_option("--min-node", params.tree_params.min_leaf, "minimum rows per leaf")
      ->default_val(5);
  cmd->add_option("--min-treat-control", params.tree_params.min_treat_control_per_leaf,
                  "minimum treated and control rows per causal leaf")
      ->default_val(5);
  cmd->add_flag("--adaptive,!--honest", [&params](std::int64_t count) {
        params.tree_params.honest = count == 0;
      },
      "disable honest splitting (default: honest)");
  cmd->add_option("--max-depth", params.tree_params.max_depth, "maximum split depth (0 = stump)")
      ->default_val(hte::kUnlimitedDepth);
  cmd->add_option("--bag-size", params.bag_size, "trees per half-sample bag")->default_val(10);
}

nlohmann::json forest_config(const hte::ForestParams& p) {
  return {{"trees", p.num_trees},
          {"sample_fraction", p.sample_fraction},
          {"mtry_fraction", p.mtry_fraction},
          {"min_node", p.tree_params.min_leaf},
          {"min_treat_control", p.tree_params.min_treat_control_per_leaf},
          {"honest", p.tree_params.honest},
          {"max_depth", p.tree_params.max_depth},
          {"bag_size", p.bag_size}};
}

std::string out_path(const CommonOpts& opts, const std::string& name) {
  return (std::filesystem::path(opts.out_dir) / name).string();
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const CommonOpts& opts)
      : command_(std::move(command)), opts_(opts), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(opts.out_dir);
  }

  void set_inputs(nlohmann::json inputs) { inputs_ = std::move(inputs); }
  void set_config(nlohmann::json config) { config_ = std::move(config); }
  void set_outputs(std::vector<std::string> names) { outputs_ = std::move(names); }

  void write() const {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start_);
    nlohmann::json manifest{{"command", command_},
                            {"version", hte::kVersion},
                            {"seed", opts_.seed},
                            {"workers", opts_.workers},
                            {"inputs", inputs_},
                            {"config", config_},
                            {"outputs", outputs_},
                            {"wall_time_ms", elapsed.count()}};
    std::ofstream out(out_path(opts_, "manifest.json"), std::ios::binary);
    if (!out) throw hte::io_error("cannot write manifest");
    out << manifest.dump(2) << '\n';
  }

 private:
  std::string command_;
  const CommonOpts& opts_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::string> outputs_;
};

std::string cell_or_empty(double value, bool present) {
  return present ? hte::format_double(value) : std::string{};
}

void write_aggregate_row(hte::CsvWriter& w, const std::string& label,
                         const hte::MedianAggregate& agg) {
  w.row({label, hte::format_double(agg.point), cell_or_empty(agg.ci_low, agg.has_bounds),
         cell_or_empty(agg.ci_high, agg.has_bounds), std::to_string(agg.num_valid_splits)});
}

// Covariate rows only (no outcome/treatment needed), expanded per schema.
std::vector<std::vector<double>> load_prediction_rows(const std::string& path,
                                                      const hte::CovariateSchema& schema) {
  const hte::CsvTable table = hte::read_csv(path);
  std::vector<std::size_t> var_cols(schema.size());
  for (std::size_t v = 0; v < schema.size(); ++v) var_cols[v] = table.column(schema.var(v).name);

  std::vector<std::vector<double>> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::string line = "row " + std::to_string(i + 2);
    std::vector<double> expanded(static_cast<std::size_t>(schema.width()), 0.0);
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const auto& var = schema.var(v);
      const std::string& cell = raw[var_cols[v]];
      const int offset = schema.offset(v);
      if (var.kind == hte::VarKind::Continuous) {
        expanded[static_cast<std::size_t>(offset)] =
            hte::parse_double(cell, line + ", column \"" + var.name + "\"");
      } else {
        const int l = schema.level_index(v, cell);
        if (l < 0) {
          throw hte::validation_error("unknown categorical level \"" + cell + "\" at " + line +
                                      ", column \"" + var.name + "\"");
        }
        expanded[static_cast<std::size_t>(offset + l)] = 1.0;
      }
    }
    rows.push_back(std::move(expanded));
  }
  return rows;
}

int cmd_fit(const CommonOpts& common, const DataOpts& data_opts,
            const hte::ForestParams& forest_params) {
  ManifestWriter manifest("fit", common);
  hte::ForestParams params = forest_params;
  params.seed = common.seed;

  const auto schema = hte::CovariateSchema::load(data_opts.schema_path);
  const auto data = hte::load_csv(data_opts.data_path, schema, data_opts.outcome_col,
                                  data_opts.treatment_col);
  const auto forest = hte::fit_causal_forest(data, params, common.workers);
  hte::save_forest(forest, out_path(common, "forest.json"));

  manifest.set_inputs({{"data", data_opts.data_path}, {"schema", data_opts.schema_path}});
  manifest.set_config(forest_config(params));
  manifest.set_outputs({"forest.json"});
  manifest.write();
  return 0;
}

int cmd_predict(const CommonOpts& common, const std::string& forest_path,
                const std::string& data_path, double level) {
  ManifestWriter manifest("predict", common);
  const auto forest = hte::load_forest(forest_path);
  const auto rows = load_prediction_rows(data_path, forest.schema());

  std::vector<hte::ItePrediction> predictions(rows.size());
  hte::parallel_for(rows.size(), common.workers, [&](std::size_t i) {
    predictions[i] = hte::predict_ite(forest, rows[i], level);
  });

  hte::CsvWriter w(out_path(common, "predictions.csv"));
  w.row({"row", "tau_hat", "variance", "ci_low", "ci_high"});
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    w.row({std::to_string(i), hte::format_double(p.tau_hat), hte::format_double(p.variance),
           hte::format_double(p.ci_low), hte::format_double(p.ci_high)});
  }

  manifest.set_inputs({{"forest", forest_path}, {"data", data_path}});
  manifest.set_config({{"level", level}});
  manifest.set_outputs({"predictions.csv"});
  manifest.write();
  return 0;
}

int cmd_importance(const CommonOpts& common, const DataOpts& data_opts,
                   const hte::ForestParams& forest_params, int permutations, bool smoothed) {
  ManifestWriter manifest("importance", common);
  const auto schema = hte::CovariateSchema::load(data_opts.schema_path);
  const auto data = hte::load_csv(data_opts.data_path, schema, data_opts.outcome_col,
                                  data_opts.treatment_col);

  std::vector<std::string> outputs{"importance.csv"};
  if (permutations > 0) {
    hte::PermutationTestConfig config;
    config.num_permutations = permutations;
    config.forest_params = forest_params;
    config.seed = common.seed;
    config.smoothed_pvalues = smoothed;
    hte::PermutationTestDetail detail;
    const auto report = hte::permutation_pvalues(data, config, common.workers, &detail);

    hte::CsvWriter w(out_path(common, "importance.csv"));
    w.row({"variable", "raw_importance", "scaled_importance", "p_value"});
    for (const auto& v : report.variables) {
      w.row({v.variable, hte::format_double(v.raw), hte::format_double(v.scaled),
             hte::format_double(*v.p_value)});
    }

    hte::CsvWriter reps(out_path(common, "replicates.csv"));
    reps.row({"replicate", "variable", "raw_importance"});
    for (std::size_t r = 0; r < detail.replicate_raw.size(); ++r) {
      for (std::size_t v = 0; v < schema.size(); ++v) {
        reps.row({std::to_string(r), schema.var(v).name,
                  hte::format_double(detail.replicate_raw[r][v])});
      }
    }
    outputs.push_back("replicates.csv");
  } else {
    hte::ForestParams params = forest_params;
    params.seed = common.seed;
    const auto forest = hte::fit_causal_forest(data, params, common.workers);
    const auto report = hte::split_frequency_importance(forest);
    hte::CsvWriter w(out_path(common, "importance.csv"));
    w.row({"variable", "raw_importance", "scaled_importance"});
    for (const auto& v : report.variables) {
      w.row({v.variable, hte::format_double(v.raw), hte::format_double(v.scaled)});
    }
  }

  manifest.set_inputs({{"data", data_opts.data_path}, {"schema", data_opts.schema_path}});
  auto config = forest_config(forest_params);
  config["permutations"] = permutations;
  config["smoothed_pvalues"] = smoothed;
  manifest.set_config(config);
  manifest.set_outputs(outputs);
  manifest.write();
  return 0;
}

hte::InferenceParams make_inference_params(const CommonOpts& common,
                                           const hte::ForestParams& forest_params, int splits,
                                           int groups, bool printed_form) {
  hte::InferenceParams params;
  params.num_splits = splits;
  params.forest_params = forest_params;
  params.seed = common.seed;
  params.num_groups = groups;
  params.gate_printed_form = printed_form;
  return params;
}

int cmd_blp(const CommonOpts& common, const DataOpts& data_opts,
            const hte::ForestParams& forest_params, int splits) {
  ManifestWriter manifest("blp", common);
  const auto schema = hte::CovariateSchema::load(data_opts.schema_path);
  const auto data = hte::load_csv(data_opts.data_path, schema, data_opts.outcome_col,
                                  data_opts.treatment_col);
  const auto params = make_inference_params(common, forest_params, splits, 4, false);
  const auto result = hte::blp(data, params, common.workers);

  hte::CsvWriter w(out_path(common, "blp.csv"));
  w.row({"coefficient", "estimate", "ci_low", "ci_high", "num_valid_splits"});
  write_aggregate_row(w, "beta1", result.beta1);
  write_aggregate_row(w, "beta2", result.beta2);

  manifest.set_inputs({{"data", data_opts.data_path}, {"schema", data_opts.schema_path}});
  auto config = forest_config(forest_params);
  config["splits"] = splits;
  manifest.set_config(config);
  manifest.set_outputs({"blp.csv"});
  manifest.write();
  return 0;
}

int cmd_gate(const CommonOpts& common, const DataOpts& data_opts,
             const hte::ForestParams& forest_params, int splits, int groups, bool printed_form) {
  ManifestWriter manifest("gate", common);
  const auto schema = hte::CovariateSchema::load(data_opts.schema_path);
  const auto data = hte::load_csv(data_opts.data_path, schema, data_opts.outcome_col,
                                  data_opts.treatment_col);
  const auto params = make_inference_params(common, forest_params, splits, groups, printed_form);
  const auto result = hte::gate(data, params, common.workers);

  hte::CsvWriter w(out_path(common, "gate.csv"));
  w.row({"group", "estimate", "ci_low", "ci_high", "num_valid_splits"});
  for (std::size_t g = 0; g < result.gamma.size(); ++g) {
    write_aggregate_row(w, "gamma_" + std::to_string(g + 1), result.gamma[g]);
  }
  const std::string k = std::to_string(result.gamma.size());
  write_aggregate_row(w, "gamma_" + k + "_minus_gamma_1", result.top_minus_bottom);
  write_aggregate_row(w, "gamma_1_minus_gamma_" + k, result.bottom_minus_top);

  manifest.set_inputs({{"data", data_opts.data_path}, {"schema", data_opts.schema_path}});
  auto config = forest_config(forest_params);
  config["splits"] = splits;
  config["groups"] = groups;
  config["printed_form"] = printed_form;
  manifest.set_config(config);
  manifest.set_outputs({"gate.csv"});
  manifest.write();
  return 0;
}

int cmd_clan(const CommonOpts& common, const DataOpts& data_opts,
             const hte::ForestParams& forest_params, int splits, int groups,
             const std::string& columns_arg) {
  ManifestWriter manifest("clan", common);
  const auto schema = hte::CovariateSchema::load(data_opts.schema_path);
  const auto data = hte::load_csv(data_opts.data_path, schema, data_opts.outcome_col,
                                  data_opts.treatment_col);

  std::vector<hte::Functional> functionals;
  if (columns_arg == "all") {
    for (const auto& name : schema.expanded_names()) {
      functionals.push_back(hte::column_functional(data, name));
    }
    functionals.push_back(hte::outcome_functional(data_opts.outcome_col));
  } else {
    std::stringstream ss(columns_arg);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      if (name == data_opts.outcome_col) functionals.push_back(hte::outcome_functional(name));
      else functionals.push_back(hte::column_functional(data, name));
    }
    if (functionals.empty()) throw hte::validation_error("clan: no functionals requested");
  }

  const auto params = make_inference_params(common, forest_params, splits, groups, false);
  const auto result = hte::clan(data, functionals, params, common.workers);

  hte::CsvWriter w(out_path(common, "clan.csv"));
  w.row({"functional", "low_group_mean", "low_ci_low", "low_ci_high", "high_group_mean",
         "high_ci_low", "high_ci_high", "difference", "diff_ci_low", "diff_ci_high",
         "num_valid_splits"});
  for (const auto& f : result.functionals) {
    w.row({f.name, hte::format_double(f.low_group.point),
           cell_or_empty(f.low_group.ci_low, f.low_group.has_bounds),
           cell_or_empty(f.low_group.ci_high, f.low_group.has_bounds),
           hte::format_double(f.high_group.point),
           cell_or_empty(f.high_group.ci_low, f.high_group.has_bounds),
           cell_or_empty(f.high_group.ci_high, f.high_group.has_bounds),
           hte::format_double(f.difference.point),
           cell_or_empty(f.difference.ci_low, f.difference.has_bounds),
           cell_or_empty(f.difference.ci_high, f.difference.has_bounds),
           std::to_string(f.difference.num_valid_splits)});
  }

  manifest.set_inputs({{"data", data_opts.data_path}, {"schema", data_opts.schema_path}});
  auto config = forest_config(forest_params);
  config["splits"] = splits;
  config["groups"] = groups;
  config["columns"] = columns_arg;
  manifest.set_config(config);
  manifest.set_outputs({"clan.csv"});
  manifest.write();
  return 0;
}

int cmd_simulate(const CommonOpts& common, int design, int iterations, int permutations, int n,
                 const hte::ForestParams& forest_params, bool emit_data) {
  ManifestWriter manifest("simulate", common);

  if (emit_data) {
    if (design < 1 || design > 3) {
      throw hte::validation_error("simulate --emit-data needs --design 1, 2, or 3");
    }
    const auto [data, truth] = hte::simulate(hte::SimDesign{design, n, common.seed});
    data.write_csv(out_path(common, "dataset.csv"), "y", "d");
    data.schema().save(out_path(common, "dataset.schema"));
    hte::CsvWriter w(out_path(common, "truth.csv"));
    w.row({"row", "tau"});
    for (std::size_t i = 0; i < truth.tau.size(); ++i) {
      w.row({std::to_string(i), hte::format_double(truth.tau[i])});
    }
    manifest.set_config({{"design", design}, {"n", n}, {"true_ate", truth.ate}});
    manifest.set_outputs({"dataset.csv", "dataset.schema", "truth.csv"});
    manifest.write();
    return 0;
  }

  hte::BenchmarkParams params;
  if (design == 0) params.designs = {1, 2, 3};
  else params.designs = {design};
  params.iterations = iterations;
  params.permutations = permutations;
  params.n = n;
  params.forest_params = forest_params;
  params.seed = common.seed;

  const auto rows = hte::run_appendix_benchmark(params, common.workers);
  hte::CsvWriter w(out_path(common, "benchmark.csv"));
  w.row({"design", "iteration", "variable", "raw_importance", "scaled_importance", "p_value"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.design), std::to_string(r.iteration), r.variable,
           hte::format_double(r.raw_importance), hte::format_double(r.scaled_importance),
           hte::format_double(r.p_value)});
  }

  auto config = forest_config(forest_params);
  config["design"] = design;
  config["iterations"] = iterations;
  config["permutations"] = permutations;
  config["n"] = n;
  manifest.set_config(config);
  manifest.set_outputs({"benchmark.csv"});
  manifest.write();
  return 0;
}

struct FeatureCmdOpts {
  std::string readings_path;
  std::string survey_path;
  std::string survey_schema_path;
  std::string assignments_path;
  std::string holidays_path;
  std::string tariffs_path;
  std::string benchmark_start = "2009-07-14";
  std::string benchmark_end = "2009-12-31";
  std::string trial_start = "2010-01-01";
  std::string trial_end = "2010-12-31";
};

int cmd_features(const CommonOpts& common, const FeatureCmdOpts& opts) {
  ManifestWriter manifest("features", common);

  const auto schedule = opts.tariffs_path.empty() ? hte::TariffSchedule::standard()
                                                  : hte::TariffSchedule::load(opts.tariffs_path);
  const auto holidays = opts.holidays_path.empty() ? hte::HolidayCalendar{}
                                                   : hte::HolidayCalendar::load(opts.holidays_path);
  const hte::DateRange benchmark{hte::parse_date(opts.benchmark_start),
                                 hte::parse_date(opts.benchmark_end)};
  const hte::DateRange trial{hte::parse_date(opts.trial_start), hte::parse_date(opts.trial_end)};

  // Readings CSV: household_id, timestamp, kwh; grouped into per-household
  // panels (order within a household must already be chronological).
  const hte::CsvTable readings = hte::read_csv(opts.readings_path);
  const std::size_t id_col = readings.column("household_id");
  const std::size_t ts_col = readings.column("timestamp");
  const std::size_t kwh_col = readings.column("kwh");
  std::map<std::string, std::vector<hte::MeterReading>> per_household;
  for (std::size_t i = 0; i < readings.rows.size(); ++i) {
    const auto& row = readings.rows[i];
    const std::string where = "row " + std::to_string(i + 2);
    hte::MeterReading r;
    r.minute = hte::parse_timestamp(row[ts_col]);
    r.kwh = hte::parse_double(row[kwh_col], where + ", column \"kwh\"");
    per_household[row[id_col]].push_back(r);
  }
  std::vector<hte::LoadPanel> panels;
  panels.reserve(per_household.size());
  for (auto& [id, rs] : per_household) panels.emplace_back(id, std::move(rs));

  std::vector<hte::FeatureRow> features(panels.size());
  std::vector<double> outcomes_by_panel(panels.size());
  hte::parallel_for(panels.size(), common.workers, [&](std::size_t i) {
    features[i] = hte::extract_features(panels[i], benchmark, holidays, schedule);
    outcomes_by_panel[i] = hte::peak_outcome(panels[i], trial, holidays, schedule);
  });
  std::map<std::string, double> outcomes;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    outcomes[panels[i].household_id()] = outcomes_by_panel[i];
  }

  const auto survey_schema = hte::CovariateSchema::load(opts.survey_schema_path);
  const hte::CsvTable survey_csv = hte::read_csv(opts.survey_path);
  const std::size_t survey_id_col = survey_csv.column("household_id");
  std::vector<std::size_t> survey_cols(survey_schema.size());
  for (std::size_t v = 0; v < survey_schema.size(); ++v) {
    survey_cols[v] = survey_csv.column(survey_schema.var(v).name);
  }
  std::vector<hte::SurveyRow> survey_rows;
  for (const auto& row : survey_csv.rows) {
    hte::SurveyRow s;
    s.household_id = row[survey_id_col];
    for (std::size_t v = 0; v < survey_schema.size(); ++v) s.cells.push_back(row[survey_cols[v]]);
    survey_rows.push_back(std::move(s));
  }

  const hte::CsvTable assignments = hte::read_csv(opts.assignments_path);
  const std::size_t a_id_col = assignments.column("household_id");
  const std::size_t a_t_col = assignments.column("treatment");
  std::map<std::string, std::uint8_t> treatments;
  for (std::size_t i = 0; i < assignments.rows.size(); ++i) {
    const auto& row = assignments.rows[i];
    const double t = hte::parse_double(row[a_t_col], "assignments row " + std::to_string(i + 2));
    if (t != 0.0 && t != 1.0) {
      throw hte::validation_error("assignments row " + std::to_string(i + 2) +
                                  ": treatment must be 0 or 1");
    }
    if (!treatments.emplace(row[a_id_col], t == 1.0 ? 1 : 0).second) {
      throw hte::validation_error("assignments: duplicate household id \"" + row[a_id_col] + "\"");
    }
  }

  const auto assembled =
      hte::assemble_dataset(features, survey_rows, survey_schema, outcomes, treatments);

  // Dataset CSV with the household id prepended so rows stay traceable;
  // the id column is not part of the covariate schema.
  const auto& data = assembled.data;
  {
    hte::CsvWriter w(out_path(common, "dataset.csv"));
    std::vector<std::string> header{"household_id"};
    for (const auto& var : data.schema().vars()) header.push_back(var.name);
    header.push_back("outcome");
    header.push_back("treatment");
    w.row(header);
    for (std::size_t i = 0; i < data.n(); ++i) {
      std::vector<std::string> fields{assembled.household_ids[i]};
      for (std::size_t v = 0; v < data.schema().size(); ++v) {
        const auto& var = data.schema().var(v);
        const int offset = data.schema().offset(v);
        if (var.kind == hte::VarKind::Continuous) {
          fields.push_back(hte::format_double(data.x(i, offset)));
        } else {
          for (std::size_t l = 0; l < var.levels.size(); ++l) {
            if (data.x(i, offset + static_cast<int>(l)) == 1.0) {
              fields.push_back(var.levels[l]);
              break;
            }
          }
        }
      }
      fields.push_back(hte::format_double(data.y(i)));
      fields.push_back(data.treated(i) ? "1" : "0");
      w.row(fields);
    }
  }
  data.schema().save(out_path(common, "dataset.schema"));

  nlohmann::json tariff_echo = nlohmann::json::array();
  for (const auto& p : schedule.prices()) {
    tariff_echo.push_back(
        {{"tariff", p.tariff}, {"night", p.night}, {"day", p.day}, {"peak", p.peak}});
  }
  manifest.set_inputs({{"readings", opts.readings_path},
                       {"survey", opts.survey_path},
                       {"survey_schema", opts.survey_schema_path},
                       {"assignments", opts.assignments_path},
                       {"holidays", opts.holidays_path},
                       {"tariffs", opts.tariffs_path.empty() ? "<built-in>" : opts.tariffs_path}});
  manifest.set_config({{"benchmark_start", opts.benchmark_start},
                       {"benchmark_end", opts.benchmark_end},
                       {"trial_start", opts.trial_start},
                       {"trial_end", opts.trial_end},
                       {"tariff_prices", tariff_echo}});
  manifest.set_outputs({"dataset.csv", "dataset.schema"});
  manifest.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Honest causal trees and forests: heterogeneous treatment effect estimation,\n"
               "variable importance with permutation tests, repeated-split inference, and a\n"
               "smart-meter feature pipeline."};
  app.require_subcommand(1);
  // Config files use one [subcommand] section per command and are overridden
  // by explicit flags: hte --config run.ini fit ...
  app.set_config("--config", "", "read options from a config file; flags win");

  CommonOpts common;
  DataOpts data_opts;
  hte::ForestParams forest_params;
  double level = 0.90;
  int permutations = 0;
  bool smoothed = false;
  int splits = 1000;
  int groups = 4;
  bool printed_form = false;
  std::string forest_path;
  std::string clan_columns = "all";
  int design = 0;
  int iterations = 20;
  int n = 500;
  bool emit_data = false;
  FeatureCmdOpts feature_opts;

  auto* fit = app.add_subcommand("fit", "fit a causal forest and save it");
  add_common(fit, common);
  add_data(fit, data_opts);
  add_forest(fit, forest_params);

  auto* predict = app.add_subcommand("predict", "per-row effect predictions with intervals");
  add_common(predict, common);
  predict->add_option("--forest", forest_path, "saved forest file")->required();
  predict->add_option("--data", data_opts.data_path, "covariate CSV")->required();
  predict->add_option("--level", level, "confidence level")->default_val(0.90);

  auto* importance = app.add_subcommand("importance", "depth-weighted split importance table");
  add_common(importance, common);
  add_data(importance, data_opts);
  add_forest(importance, forest_params);
  importance->add_option("--permutations", permutations, "permutation replicates (0 disables the test)")
      ->default_val(0);
  importance->add_flag("--smoothed-pvalues", smoothed, "report (count+1)/(R+1) p-values");

  auto* blp = app.add_subcommand("blp", "best linear predictor heterogeneity test");
  add_common(blp, common);
  add_data(blp, data_opts);
  add_forest(blp, forest_params);
  blp->add_option("--splits", splits, "sample splits")->default_val(1000);

  auto* gate = app.add_subcommand("gate", "sorted group average treatment effects");
  add_common(gate, common);
  add_data(gate, data_opts);
  add_forest(gate, forest_params);
  gate->add_option("--splits", splits, "sample splits")->default_val(1000);
  gate->add_option("--groups", groups, "quantile groups")->default_val(4);
  gate->add_flag("--printed-form", printed_form,
                 "regress on group indicators without the treatment interaction");

  auto* clan = app.add_subcommand("clan", "classification analysis of extreme groups");
  add_common(clan, common);
  add_data(clan, data_opts);
  add_forest(clan, forest_params);
  clan->add_option("--splits", splits, "sample splits")->default_val(1000);
  clan->add_option("--groups", groups, "quantile groups")->default_val(4);
  clan->add_option("--columns", clan_columns,
                   "comma-separated expanded columns (or \"all\")")
      ->default_val("all");

  auto* simulate = app.add_subcommand("simulate", "synthetic designs and the benchmark study");
  add_common(simulate, common);
  add_forest(simulate, forest_params);
  simulate->add_option("--design", design, "design 1, 2, or 3 (0 = all)")->default_val(0);
  simulate->add_option("--iterations", iterations, "benchmark iterations")->default_val(20);
  simulate->add_option("--permutations", permutations, "permutation replicates")->default_val(100);
  simulate->add_option("--n", n, "rows per simulated dataset")->default_val(500);
  simulate->add_flag("--emit-data", emit_data, "write one simulated dataset instead");

  auto* features = app.add_subcommand("features", "smart-meter feature extraction");
  add_common(features, common);
  features->add_option("--readings", feature_opts.readings_path, "half-hourly readings CSV")
      ->required();
  features->add_option("--survey", feature_opts.survey_path, "survey CSV")->required();
  features->add_option("--survey-schema", feature_opts.survey_schema_path, "survey schema sidecar")
      ->required();
  features->add_option("--assignments", feature_opts.assignments_path, "treatment assignment CSV")
      ->required();
  features->add_option("--holidays", feature_opts.holidays_path, "holiday date list");
  features->add_option("--tariffs", feature_opts.tariffs_path, "tariff schedule file");
  features->add_option("--benchmark-start", feature_opts.benchmark_start, "benchmark period start")
      ->default_val("2009-07-14");
  features->add_option("--benchmark-end", feature_opts.benchmark_end, "benchmark period end")
      ->default_val("2009-12-31");
  features->add_option("--trial-start", feature_opts.trial_start, "trial period start")
      ->default_val("2010-01-01");
  features->add_option("--trial-end", feature_opts.trial_end, "trial period end")
      ->default_val("2010-12-31");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (fit->parsed()) return cmd_fit(common, data_opts, forest_params);
    if (predict->parsed()) return cmd_predict(common, forest_path, data_opts.data_path, level);
    if (importance->parsed()) {
      return cmd_importance(common, data_opts, forest_params, permutations, smoothed);
    }
    if (blp->parsed()) return cmd_blp(common, data_opts, forest_params, splits);
    if (gate->parsed()) {
      return cmd_gate(common, data_opts, forest_params, splits, groups, printed_form);
    }
    if (clan->parsed()) {
      return cmd_clan(common, data_opts, forest_params, splits, groups, clan_columns);
    }
    if (simulate->parsed()) {
      return cmd_simulate(common, design, iterations, permutations, n, forest_params, emit_data);
    }
    if (features->parsed()) return cmd_features(common, feature_opts);
  } catch (const hte::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const hte::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const hte::degeneracy_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
