#include "tickpred/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tickpred/csv.hpp"
#include "tickpred/features.hpp"

namespace tickpred {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_on_off(const std::string& v, const std::string& key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw PipelineError("bad value for " + key + ": \"" + v + "\" (want on|off)");
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PipelineError("cannot create output directory " + dir + ": " + ec.message());
}

ordered_json loss_spec_json(const LossSpec& loss) {
  ordered_json j;
  j["kind"] = loss_kind_name(loss.kind);
  j["class_weights"] = loss.class_weights;
  j["class_counts"] = loss.class_counts;
  j["lambda"] = loss.lambda;
  j["accuracies"] = loss.accuracies;
  return j;
}

ordered_json train_config_json(const TrainConfig& cfg) {
  ordered_json j;
  j["model"] = model_kind_name(cfg.model);
  j["loss"] = loss_spec_json(cfg.loss);
  j["batch_size"] = cfg.batch_size;
  j["learning_rate"] = cfg.learning_rate;
  j["early_stop_patience"] = cfg.early_stop_patience;
  j["max_epochs"] = cfg.max_epochs;
  j["seed"] = cfg.seed;
  j["normalize"] = cfg.normalize;
  j["undersample"] = cfg.undersample;
  j["rus_mode"] = cfg.rus_mode == RusMode::kBalance ? "balance" : "literal";
  j["fee"] = cfg.fee;
  j["horizon"] = cfg.horizon;
  j["mlp_hidden"] = cfg.mlp_hidden;
  j["lstm_hidden"] = cfg.lstm_hidden;
  j["negative_slope"] = cfg.negative_slope;
  j["output_activation"] = cfg.output_activation;
  j["lstm_clip_norm"] = cfg.lstm_clip_norm;
  return j;
}

/// Merge one stage record into <out_dir>/manifest.json.
void update_manifest(const std::string& out_dir, const std::string& stage, ordered_json record) {
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  ordered_json manifest;
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      in >> manifest;
    } catch (...) {
      manifest = ordered_json::object();
    }
  }
  if (!manifest.contains("toolkit_version")) manifest["toolkit_version"] = kToolkitVersion;
  if (!manifest.contains("stages")) manifest["stages"] = ordered_json::object();
  manifest["stages"][stage] = std::move(record);
  std::ofstream out(path);
  if (!out) throw PipelineError("cannot write manifest: " + path);
  out << manifest.dump(2) << "\n";
}

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace

TrainConfig train_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open run config: " + path);
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw PipelineError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    try {
      if (key == "model") cfg.model = model_kind_from_name(val);
      else if (key == "loss") cfg.loss.kind = loss_kind_from_name(val);
      else if (key == "weights") {
        if (std::sscanf(val.c_str(), "%lf,%lf,%lf", &cfg.loss.class_weights[0],
                        &cfg.loss.class_weights[1], &cfg.loss.class_weights[2]) != 3)
          throw PipelineError("want three comma-separated weights");
      }
      else if (key == "lambda") cfg.loss.lambda = std::stod(val);
      else if (key == "batch_size") cfg.batch_size = std::stoi(val);
      else if (key == "learning_rate") cfg.learning_rate = std::stod(val);
      else if (key == "patience") cfg.early_stop_patience = std::stoi(val);
      else if (key == "max_epochs") cfg.max_epochs = std::stoi(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "normalize") cfg.normalize = parse_on_off(val, key);
      else if (key == "undersample") cfg.undersample = parse_on_off(val, key);
      else if (key == "rus_mode") {
        if (val == "balance") cfg.rus_mode = RusMode::kBalance;
        else if (val == "literal") cfg.rus_mode = RusMode::kLiteral;
        else throw PipelineError("want balance|literal");
      }
      else if (key == "fee") cfg.fee = std::stod(val);
      else if (key == "horizon") cfg.horizon = std::stoi(val);
      else if (key == "mlp_hidden") {
        cfg.mlp_hidden.clear();
        std::size_t start = 0;
        while (start < val.size()) {
          std::size_t comma = val.find(',', start);
          if (comma == std::string::npos) comma = val.size();
          cfg.mlp_hidden.push_back(std::stoi(val.substr(start, comma - start)));
          start = comma + 1;
        }
      }
      else if (key == "lstm_hidden") cfg.lstm_hidden = std::stoi(val);
      else if (key == "negative_slope") cfg.negative_slope = std::stod(val);
      else if (key == "output_activation") cfg.output_activation = parse_on_off(val, key);
      else if (key == "lstm_clip_norm") cfg.lstm_clip_norm = std::stod(val);
      else throw PipelineError("unknown key \"" + key + "\"");
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception&) {
      throw PipelineError(path + ":" + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  return cfg;
}

std::string train_config_to_json_string(const TrainConfig& cfg) {
  return train_config_json(cfg).dump();
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

SynthReport run_synth(const SynthStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  const std::string ticks_path = (fs::path(st.out_dir) / "ticks.csv").string();
  SynthReport report = generate_ticks(st.config, ticks_path);

  ordered_json sidecar;
  sidecar["fee"] = report.fee;
  sidecar["achieved_shares"] = report.achieved_shares;
  sidecar["label_counts"] = report.label_counts;
  sidecar["rows"] = report.rows;
  sidecar["labeled_points"] = report.labeled_points;
  sidecar["signal"] = st.config.signal;
  sidecar["seed"] = st.config.seed;
  {
    std::ofstream out(fs::path(st.out_dir) / "synth.json");
    out << sidecar.dump(2) << "\n";
  }

  ordered_json rec;
  rec["config"] = ordered_json{{"seed", st.config.seed},
                               {"days", st.config.days},
                               {"sessions", st.config.sessions.to_string()},
                               {"signal", st.config.signal},
                               {"ratio", st.config.ratio},
                               {"mid0", st.config.mid0},
                               {"tick", st.config.tick},
                               {"instrument", st.config.instrument}};
  rec["outputs"] = {ticks_path};
  rec["fee"] = report.fee;
  rec["achieved_shares"] = report.achieved_shares;
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "synth", std::move(rec));
  return report;
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> grid_csv_header() {
  auto h = tick_csv_header();
  h.push_back("segment");
  h.push_back("filled");
  h.push_back("crossed");
  h.push_back("rowValid");
  return h;
}

}  // namespace

ParseReport run_ingest(const IngestStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  ParseReport report;
  auto ticks = parse_tick_file(st.input_csv, report, st.instrument);
  TickSeries series = forward_fill(ticks, st.sessions, report);

  const std::string grid_path = (fs::path(st.out_dir) / "grid.csv").string();
  CsvWriter csv(grid_path, grid_csv_header());
  int seg_id = 0;
  for (const auto& seg : series.segments) {
    for (const auto& row : seg.rows) {
      const TickRecord& r = row.rec;
      csv.begin_row();
      csv.add_int(r.timestamp);
      csv.add_fixed(r.last_price, 4);
      csv.add_fixed(r.volume, 4);
      csv.add_fixed(r.cum_amount, 4);
      csv.add_fixed(r.cum_volume, 4);
      for (int i = 0; i < 5; ++i) csv.add_fixed(r.bid_price[i], 4);
      for (int i = 0; i < 5; ++i) csv.add_fixed(r.bid_volume[i], 4);
      for (int i = 0; i < 5; ++i) csv.add_fixed(r.ask_price[i], 4);
      for (int i = 0; i < 5; ++i) csv.add_fixed(r.ask_volume[i], 4);
      csv.add_int(seg_id);
      csv.add_int(row.filled ? 1 : 0);
      csv.add_int(row.crossed ? 1 : 0);
      csv.add_int(row.valid ? 1 : 0);
      csv.end_row();
    }
    ++seg_id;
  }
  csv.close();

  ordered_json rec;
  rec["inputs"] = {st.input_csv};
  rec["outputs"] = {grid_path};
  rec["config"] = ordered_json{{"sessions", st.sessions.to_string()}};
  rec["rows_ok"] = report.rows_ok;
  rec["rows_crossed"] = report.rows_crossed;
  rec["rows_outside_session"] = report.rows_outside_session;
  rec["malformed"] = report.malformed;
  rec["segments"] = series.segments.size();
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "ingest", std::move(rec));
  return report;
}

TickSeries load_grid_csv(const std::string& path) {
  CsvReader reader(path, grid_csv_header());
  TickSeries series;
  std::vector<std::string_view> f;
  int cur_seg = -1;
  while (reader.next_row(f)) {
    TickRecord r;
    r.timestamp = reader.parse_int(f[0], 0);
    r.last_price = reader.parse_double(f[1], 1);
    r.volume = reader.parse_double(f[2], 2);
    r.cum_amount = reader.parse_double(f[3], 3);
    r.cum_volume = reader.parse_double(f[4], 4);
    for (int i = 0; i < 5; ++i) r.bid_price[i] = reader.parse_double(f[5 + i], 5 + i);
    for (int i = 0; i < 5; ++i) r.bid_volume[i] = reader.parse_double(f[10 + i], 10 + i);
    for (int i = 0; i < 5; ++i) r.ask_price[i] = reader.parse_double(f[15 + i], 15 + i);
    for (int i = 0; i < 5; ++i) r.ask_volume[i] = reader.parse_double(f[20 + i], 20 + i);
    int seg = static_cast<int>(reader.parse_int(f[25], 25));
    GridRow row;
    row.rec = std::move(r);
    row.filled = reader.parse_int(f[26], 26) != 0;
    row.crossed = reader.parse_int(f[27], 27) != 0;
    row.valid = reader.parse_int(f[28], 28) != 0;
    if (seg != cur_seg) {
      if (seg != cur_seg + 1)
        throw PipelineError(path + ": segment ids must be consecutive");
      series.segments.emplace_back();
      series.segments.back().start_ms = row.rec.timestamp;
      cur_seg = seg;
    }
    series.segments.back().rows.push_back(std::move(row));
  }
  return series;
}

// ---------------------------------------------------------------------------
// featurize
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> features_csv_header() {
  std::vector<std::string> h = {"timestamp", "segment", "midPrice"};
  for (int i = 1; i <= 5; ++i) h.push_back("diffBidPrice" + std::to_string(i));
  for (int i = 1; i <= 5; ++i) h.push_back("diffAskPrice" + std::to_string(i));
  h.push_back("diffLastPrice");
  h.push_back("logVolume");
  h.push_back("forwardReturn");
  h.push_back("label");
  h.push_back("rowValid");
  h.push_back("labelValid");
  return h;
}

}  // namespace

FeaturizeSummary run_featurize(const FeaturizeStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  TickSeries ticks = load_grid_csv(st.grid_csv);
  FeatureSeries feats = featurize(ticks, st.fee, st.horizon, st.warmup);

  const std::string out_path = (fs::path(st.out_dir) / "features.csv").string();
  CsvWriter csv(out_path, features_csv_header());
  FeaturizeSummary summary;
  int seg_id = 0;
  for (const auto& seg : feats.segments) {
    for (std::size_t i = 0; i < seg.rows.size(); ++i) {
      const FeatureRow& row = seg.rows[i];
      const LabeledPoint& lp = seg.labels[i];
      csv.begin_row();
      csv.add_int(row.timestamp);
      csv.add_int(seg_id);
      auto vals = row.values();
      for (int j = 0; j < kFeatureDim; ++j) csv.add_general(vals[j]);
      csv.add_general(lp.forward_return);
      csv.add_int(lp.label);
      csv.add_int(row.valid ? 1 : 0);
      csv.add_int(lp.label_valid ? 1 : 0);
      csv.end_row();
      ++summary.rows;
      if (lp.label_valid) summary.label_counts[static_cast<std::size_t>(lp.label + 1)]++;
    }
    ++seg_id;
  }
  csv.close();

  ordered_json rec;
  rec["inputs"] = {st.grid_csv};
  rec["outputs"] = {out_path};
  rec["config"] = ordered_json{{"fee", st.fee}, {"horizon", st.horizon}, {"warmup", st.warmup}};
  rec["rows"] = summary.rows;
  rec["label_counts"] = summary.label_counts;
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "featurize", std::move(rec));
  return summary;
}

std::vector<FeatureFileRow> load_features_csv(const std::string& path) {
  CsvReader reader(path, features_csv_header());
  std::vector<FeatureFileRow> rows;
  std::vector<std::string_view> f;
  while (reader.next_row(f)) {
    FeatureFileRow r;
    r.timestamp = reader.parse_int(f[0], 0);
    r.segment = static_cast<int>(reader.parse_int(f[1], 1));
    for (int j = 0; j < kFeatureDim; ++j)
      r.features[j] = reader.parse_double(f[2 + j], 2 + static_cast<std::size_t>(j));
    r.forward_return = reader.parse_double(f[15], 15);
    r.label = static_cast<int>(reader.parse_int(f[16], 16));
    r.row_valid = reader.parse_int(f[17], 17) != 0;
    r.label_valid = reader.parse_int(f[18], 18) != 0;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

SplitSummary run_split(const SplitStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  auto rows = load_features_csv(st.features_csv);

  // Rebuild a FeatureSeries so sample assembly can reuse the library path.
  FeatureSeries series;
  int cur_seg = -1;
  for (const auto& r : rows) {
    if (r.segment != cur_seg) {
      series.segments.emplace_back();
      cur_seg = r.segment;
    }
    FeatureSegment& seg = series.segments.back();
    FeatureRow fr;
    fr.timestamp = r.timestamp;
    fr.mid_price = r.features[0];
    for (int i = 0; i < 5; ++i) fr.diff_bid_price[i] = r.features[1 + i];
    for (int i = 0; i < 5; ++i) fr.diff_ask_price[i] = r.features[6 + i];
    fr.diff_last_price = r.features[11];
    fr.log_volume = r.features[12];
    fr.valid = r.row_valid;
    seg.rows.push_back(fr);
    LabeledPoint lp;
    lp.timestamp = r.timestamp;
    lp.forward_return = r.forward_return;
    lp.label = r.label;
    lp.label_valid = r.label_valid;
    seg.labels.push_back(lp);
  }

  SplitSummary summary;
  SampleSet all = assemble_samples(series, st.window, &summary.assemble);
  SplitIndex idx = chronological_split(all);

  auto subset = [&](std::size_t b, std::size_t e) {
    SampleSet s;
    s.window = all.window;
    s.feat_dim = all.feat_dim;
    s.samples.assign(all.samples.begin() + static_cast<std::ptrdiff_t>(b),
                     all.samples.begin() + static_cast<std::ptrdiff_t>(e));
    return s;
  };
  const std::string train_path = (fs::path(st.out_dir) / "train.tpds").string();
  const std::string val_path = (fs::path(st.out_dir) / "val.tpds").string();
  const std::string test_path = (fs::path(st.out_dir) / "test.tpds").string();
  SampleSet train = subset(idx.train_begin, idx.train_end);
  SampleSet val = subset(idx.val_begin, idx.val_end);
  SampleSet test = subset(idx.test_begin, idx.test_end);
  save_samples(train_path, train);
  save_samples(val_path, val);
  save_samples(test_path, test);
  summary.n_train = train.samples.size();
  summary.n_val = val.samples.size();
  summary.n_test = test.samples.size();

  ordered_json rec;
  rec["inputs"] = {st.features_csv};
  rec["outputs"] = {train_path, val_path, test_path};
  rec["config"] = ordered_json{{"window", st.window}, {"ratios", "8:1:1"}};
  rec["n_train"] = summary.n_train;
  rec["n_val"] = summary.n_val;
  rec["n_test"] = summary.n_test;
  rec["train_class_counts"] = train.class_counts();
  rec["skipped_endpoints"] = summary.assemble.skipped_invalid;
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "split", std::move(rec));
  return summary;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TrainSummary run_train(const TrainStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  st.config.validate_config();

  SampleSet train_set = load_samples(st.train_path);
  SampleSet val_set = load_samples(st.val_path);

  MlpConfig mlp_cfg;
  mlp_cfg.structure.clear();
  mlp_cfg.structure.push_back(train_set.window * train_set.feat_dim);
  for (int h : st.config.mlp_hidden) mlp_cfg.structure.push_back(h);
  mlp_cfg.structure.push_back(kNumClasses);
  mlp_cfg.negative_slope = st.config.negative_slope;
  mlp_cfg.output_activation = st.config.output_activation;
  LstmConfig lstm_cfg;
  lstm_cfg.input_dim = train_set.feat_dim;
  lstm_cfg.hidden_dim = st.config.lstm_hidden;
  lstm_cfg.seq_len = train_set.window;

  auto model = make_model(st.config.model, mlp_cfg, lstm_cfg, st.config.seed);

  const std::string metrics_path =
      (fs::path(st.out_dir) / (st.run_name + "_metrics.jsonl")).string();
  std::ofstream metrics(metrics_path);
  if (!metrics) throw PipelineError("cannot write metrics: " + metrics_path);

  auto on_epoch = [&](const EpochReport& r) {
    ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_accuracy"] = r.val_accuracy;
    j["balanced_accuracy"] = r.balanced_accuracy;
    j["per_class_accuracy"] = r.per_class_accuracy;
    j["confusion"] = r.confusion;
    j["loss_weights"] = r.loss_weights_used;
    j["skipped_steps"] = r.skipped_steps;
    metrics << j.dump() << "\n";
  };

  TrainResult result = train(*model, st.config, train_set, val_set, on_epoch);
  metrics.close();

  model->restore_params(result.best_params);
  CheckpointMeta meta;
  meta.kind = st.config.model;
  meta.normalize = st.config.normalize;
  meta.output_activation = st.config.output_activation;
  meta.negative_slope = st.config.negative_slope;
  meta.seed = st.config.seed;
  meta.epoch = static_cast<std::uint32_t>(result.best_epoch);
  meta.seq_len = static_cast<std::uint32_t>(train_set.window);
  const std::string ckpt_path =
      (fs::path(st.out_dir) / (st.run_name + "_checkpoint.tpck")).string();
  save_checkpoint(ckpt_path, *model, meta);

  TrainSummary summary;
  summary.best_epoch = result.best_epoch;
  summary.best_val_accuracy = result.best_val_accuracy;
  summary.epochs_run = static_cast<int>(result.reports.size());
  summary.checkpoint_path = ckpt_path;
  summary.metrics_path = metrics_path;

  ordered_json rec;
  rec["inputs"] = {st.train_path, st.val_path};
  rec["outputs"] = {ckpt_path, metrics_path};
  rec["config"] = train_config_json(st.config);
  rec["best_epoch"] = result.best_epoch;
  rec["best_val_accuracy"] = result.best_val_accuracy;
  rec["epochs_run"] = summary.epochs_run;
  if (st.config.loss.kind == LossKind::kSensitive) rec["sensitive_counts"] = result.sensitive_counts;
  rec["warnings"] = result.warnings;
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "train:" + st.run_name, std::move(rec));
  return summary;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

EvalStats run_evaluate(const EvaluateStage& st) {
  LoadedCheckpoint ckpt = load_checkpoint(st.checkpoint_path);
  if (st.expect_model && *st.expect_model != ckpt.meta.kind) {
    throw PipelineError("checkpoint architecture \"" + std::string(model_kind_name(ckpt.meta.kind)) +
                        "\" does not match requested \"" +
                        std::string(model_kind_name(*st.expect_model)) + "\"");
  }
  SampleSet data = load_samples(st.dataset_path);
  EvalStats stats = validate(*ckpt.model, data, ckpt.meta.normalize);

  if (!st.quiet) {
    std::printf("checkpoint: %s (arch=%s, best epoch %u)\n", st.checkpoint_path.c_str(),
                model_kind_name(ckpt.meta.kind), ckpt.meta.epoch);
    std::printf("samples: %zu\n", stats.total);
    std::printf("accuracy: %.6f\n", stats.accuracy);
    std::printf("balanced_accuracy: %.6f\n", stats.balanced_accuracy);
    std::printf("per_class_accuracy: -1: %.6f  0: %.6f  +1: %.6f\n", stats.per_class_accuracy[0],
                stats.per_class_accuracy[1], stats.per_class_accuracy[2]);
    std::printf("confusion (rows = true -1,0,+1; cols = predicted):\n");
    for (int c = 0; c < kNumClasses; ++c)
      std::printf("  %8lld %8lld %8lld\n", static_cast<long long>(stats.confusion[c][0]),
                  static_cast<long long>(stats.confusion[c][1]),
                  static_cast<long long>(stats.confusion[c][2]));
  }

  if (!st.out_dir.empty()) {
    ensure_dir(st.out_dir);
    ordered_json j;
    j["checkpoint"] = st.checkpoint_path;
    j["dataset"] = st.dataset_path;
    j["accuracy"] = stats.accuracy;
    j["balanced_accuracy"] = stats.balanced_accuracy;
    j["per_class_accuracy"] = stats.per_class_accuracy;
    j["confusion"] = stats.confusion;
    j["samples"] = stats.total;
    std::ofstream out(fs::path(st.out_dir) / "eval.json");
    out << j.dump(2) << "\n";
    update_manifest(st.out_dir, "evaluate", j);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// factors
// ---------------------------------------------------------------------------

FactorsSummary run_factors(const FactorsStage& st) {
  ensure_dir(st.out_dir);
  StageTimer timer;
  TickSeries ticks = load_grid_csv(st.grid_csv);
  FeatureSeries feats = featurize(ticks, st.fee, st.horizon, /*warmup_len=*/kDefaultHorizon);

  // Factor rows per segment, plus aligned forward returns for accumulation.
  std::vector<std::int64_t> timestamps;
  std::array<std::vector<double>, kNumFactors> fvals;
  std::array<std::vector<std::uint8_t>, kNumFactors> fvalid;
  std::vector<double> fwd_ret;
  std::vector<std::uint8_t> ret_valid;

  const std::string factors_path = (fs::path(st.out_dir) / "factors.csv").string();
  std::vector<std::string> header = {"timestamp"};
  for (const auto& n : factor_names()) header.push_back(n);
  for (const auto& n : factor_names()) header.push_back("valid_" + n);
  CsvWriter csv(factors_path, header);

  FactorsSummary summary;
  for (std::size_t s = 0; s < ticks.segments.size(); ++s) {
    const Segment& seg = ticks.segments[s];
    std::vector<double> mids(seg.rows.size(), 0.0);
    for (std::size_t i = 0; i < seg.rows.size(); ++i) {
      const auto& r = seg.rows[i].rec;
      mids[i] = (r.bid_price[0] + r.ask_price[0]) / 2.0;
    }
    for (std::size_t t = 0; t < seg.rows.size(); ++t) {
      auto row = compute_factors(seg, mids, t);
      if (!row) continue;
      csv.begin_row();
      csv.add_int(row->timestamp);
      for (int i = 0; i < kNumFactors; ++i) csv.add_general(row->value(i));
      for (int i = 0; i < kNumFactors; ++i) csv.add_int(row->valid[i] ? 1 : 0);
      csv.end_row();
      ++summary.factor_rows;

      timestamps.push_back(row->timestamp);
      for (int i = 0; i < kNumFactors; ++i) {
        fvals[i].push_back(row->value(i));
        fvalid[i].push_back(row->valid[i] ? 1 : 0);
      }
      const LabeledPoint& lp = feats.segments[s].labels[t];
      fwd_ret.push_back(lp.forward_return);
      ret_valid.push_back(lp.label_valid ? 1 : 0);
    }
  }
  csv.close();

  const std::string cum_path = (fs::path(st.out_dir) / "factor_cum.csv").string();
  CsvWriter cum(cum_path, {"factor", "timestamp", "cumsum"});
  for (int i = 0; i < kNumFactors; ++i) {
    AccumulatedFactor acc =
        accumulate_factor_return(timestamps, fvals[i], fvalid[i], fwd_ret, ret_valid);
    for (std::size_t k = 0; k < acc.timestamps.size(); ++k) {
      cum.begin_row();
      cum.add_str(factor_names()[i]);
      cum.add_int(acc.timestamps[k]);
      cum.add_general(acc.cumsum[k]);
      cum.end_row();
    }
  }
  cum.close();

  ordered_json rec;
  rec["inputs"] = {st.grid_csv};
  rec["outputs"] = {factors_path, cum_path};
  rec["config"] = ordered_json{{"fee", st.fee}, {"horizon", st.horizon}};
  rec["factor_rows"] = summary.factor_rows;
  rec["wall_s"] = timer.seconds();
  update_manifest(st.out_dir, "factors", std::move(rec));
  return summary;
}

}  // namespace tickpred
