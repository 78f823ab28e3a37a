#pragma once

// Stage drivers shared by the CLI and the acceptance harness. Every stage
// writes its artifacts under an output directory and records itself in that
// directory's manifest.json.

#include <optional>
#include <string>
#include <vector>

#include "tickpred/dataset.hpp"
#include "tickpred/factors.hpp"
#include "tickpred/synth.hpp"
#include "tickpred/tick.hpp"
#include "tickpred/training.hpp"

namespace tickpred {

/// Flat key=value run-configuration file mirroring TrainConfig.
TrainConfig train_config_from_file(const std::string& path);
/// CLI override helpers live in the CLI; this echoes a config for manifests.
std::string train_config_to_json_string(const TrainConfig& cfg);

struct SynthStage {
  SynthConfig config;
  std::string out_dir;
};
/// Writes ticks.csv and synth.json (calibrated fee + achieved shares).
SynthReport run_synth(const SynthStage& st);

struct IngestStage {
  std::string input_csv;
  std::string out_dir;
  SessionSchedule sessions = SessionSchedule::defaults();
  std::string instrument;  // defaults to the input file stem
};
/// Parses, forward-fills and segments; writes grid.csv.
ParseReport run_ingest(const IngestStage& st);

struct FeaturizeStage {
  std::string grid_csv;
  std::string out_dir;
  double fee = 0.0001;
  int horizon = kDefaultHorizon;
  int warmup = kDefaultHorizon;
};
struct FeaturizeSummary {
  std::size_t rows = 0;
  std::array<std::int64_t, kNumClasses> label_counts{};
};
/// Writes features.csv (13 features + return + label + validity per row).
FeaturizeSummary run_featurize(const FeaturizeStage& st);

struct SplitStage {
  std::string features_csv;
  std::string out_dir;
  int window = kWindowLen;
};
struct SplitSummary {
  std::size_t n_train = 0, n_val = 0, n_test = 0;
  AssembleStats assemble;
};
/// Assembles samples and writes train.tpds / val.tpds / test.tpds.
SplitSummary run_split(const SplitStage& st);

struct TrainStage {
  std::string train_path;
  std::string val_path;
  TrainConfig config;
  std::string out_dir;
  std::string run_name = "run";
};
struct TrainSummary {
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  int epochs_run = 0;
  std::string checkpoint_path;
  std::string metrics_path;
};
/// Trains, restores the best epoch, writes <run>_checkpoint.tpck and
/// <run>_metrics.jsonl (one record per epoch).
TrainSummary run_train(const TrainStage& st);

struct EvaluateStage {
  std::string checkpoint_path;
  std::string dataset_path;
  std::optional<ModelKind> expect_model;  // typed error on mismatch
  std::string out_dir;                    // optional; writes eval.json when set
  bool quiet = false;
};
EvalStats run_evaluate(const EvaluateStage& st);

struct FactorsStage {
  std::string grid_csv;
  std::string out_dir;
  double fee = 0.0001;
  int horizon = kDefaultHorizon;
};
struct FactorsSummary {
  std::size_t factor_rows = 0;
};
/// Writes factors.csv and factor_cum.csv (z-scored factor x return cumsum).
FactorsSummary run_factors(const FactorsStage& st);

// Shared readers for the intermediate CSV artifacts.
TickSeries load_grid_csv(const std::string& path);

struct FeatureFileRow {
  std::int64_t timestamp = 0;
  int segment = 0;
  std::array<double, kFeatureDim> features{};
  double forward_return = 0.0;
  int label = 0;
  bool row_valid = false;
  bool label_valid = false;
};
std::vector<FeatureFileRow> load_features_csv(const std::string& path);

}  // namespace tickpred
