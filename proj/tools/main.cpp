// tickpred — tick-data-to-prediction toolkit CLI.

#include <atomic>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tickpred/kernels.hpp"
#include "tickpred/pipeline.hpp"

using namespace tickpred;

namespace {

struct TrainCli {
  std::string config_path;
  std::string train_path, val_path;
  std::string out_dir = "out";
  std::string run_name = "run";
  bool grid = false;
  // overrides; empty/negative means "not set on the command line"
  std::string model, loss, weights, rus_mode;
  double lambda = -1.0, learning_rate = -1.0, fee = -1.0, negative_slope = -1.0;
  int batch_size = -1, patience = -1, max_epochs = -1, horizon = -1, lstm_hidden = -1;
  long long seed = -1;
  std::string normalize, undersample, output_activation;
};

bool flag_on(const std::string& v, const char* key) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw PipelineError(std::string("bad value for --") + key + ": want on|off");
}

TrainConfig resolve_train_config(const TrainCli& cli) {
  TrainConfig cfg;
  if (!cli.config_path.empty()) cfg = train_config_from_file(cli.config_path);
  if (!cli.model.empty()) cfg.model = model_kind_from_name(cli.model);
  if (!cli.loss.empty()) cfg.loss.kind = loss_kind_from_name(cli.loss);
  if (!cli.weights.empty()) {
    if (std::sscanf(cli.weights.c_str(), "%lf,%lf,%lf", &cfg.loss.class_weights[0],
                    &cfg.loss.class_weights[1], &cfg.loss.class_weights[2]) != 3)
      throw PipelineError("--weights wants three comma-separated values");
  }
  if (cli.lambda >= 0.0) cfg.loss.lambda = cli.lambda;
  if (cli.learning_rate > 0.0) cfg.learning_rate = cli.learning_rate;
  if (cli.fee >= 0.0) cfg.fee = cli.fee;
  if (cli.negative_slope >= 0.0) cfg.negative_slope = cli.negative_slope;
  if (cli.batch_size > 0) cfg.batch_size = cli.batch_size;
  if (cli.patience > 0) cfg.early_stop_patience = cli.patience;
  if (cli.max_epochs > 0) cfg.max_epochs = cli.max_epochs;
  if (cli.horizon > 0) cfg.horizon = cli.horizon;
  if (cli.lstm_hidden > 0) cfg.lstm_hidden = cli.lstm_hidden;
  if (cli.seed >= 0) cfg.seed = static_cast<std::uint64_t>(cli.seed);
  if (!cli.normalize.empty()) cfg.normalize = flag_on(cli.normalize, "normalize");
  if (!cli.undersample.empty()) cfg.undersample = flag_on(cli.undersample, "undersample");
  if (!cli.output_activation.empty())
    cfg.output_activation = flag_on(cli.output_activation, "output-activation");
  if (!cli.rus_mode.empty()) {
    if (cli.rus_mode == "balance") cfg.rus_mode = RusMode::kBalance;
    else if (cli.rus_mode == "literal") cfg.rus_mode = RusMode::kLiteral;
    else throw PipelineError("--rus-mode wants balance|literal");
  }
  return cfg;
}

int run_train_grid(const TrainCli& cli) {
  const char* losses[] = {"plain", "weighted", "sensitive", "focal", "adaptive"};
  const char* models[] = {"mlp", "lstm"};
  struct Job {
    TrainStage stage;
    std::string tag;
  };
  std::vector<Job> jobs;
  for (const char* m : models) {
    for (const char* l : losses) {
      TrainCli per = cli;
      per.model = m;
      per.loss = l;
      Job job;
      job.tag = std::string(l) + "_" + m;
      job.stage.train_path = cli.train_path;
      job.stage.val_path = cli.val_path;
      job.stage.config = resolve_train_config(per);
      job.stage.out_dir = cli.out_dir + "/" + job.tag;
      job.stage.run_name = job.tag;
      jobs.push_back(std::move(job));
    }
  }

  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<int> failures{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          TrainSummary s = run_train(jobs[i].stage);
          std::printf("[%s] best epoch %d, val accuracy %.4f\n", jobs[i].tag.c_str(),
                      s.best_epoch, s.best_val_accuracy);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[%s] failed: %s\n", jobs[i].tag.c_str(), e.what());
          failures.fetch_add(1);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return failures.load() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tickpred — L5 tick features, fee-threshold labels, and imbalance-aware training"};
  app.require_subcommand(1);

  // --- synth ---
  auto* synth = app.add_subcommand("synth", "generate a synthetic L5 tick stream");
  std::string synth_config, synth_out = "out";
  long long synth_seed = -1;
  double synth_signal = -1.0;
  int synth_days = -1;
  synth->add_option("--config", synth_config, "synth config file (key=value)");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", synth_seed, "override seed");
  synth->add_option("--signal", synth_signal, "override signal strength in [0,1]");
  synth->add_option("--days", synth_days, "override number of trading days");

  // --- ingest ---
  auto* ingest = app.add_subcommand("ingest", "parse ticks, forward-fill the 0.5 s grid");
  std::string ingest_input, ingest_out = "out", ingest_sessions, ingest_instrument;
  ingest->add_option("--input", ingest_input, "canonical tick CSV")->required();
  ingest->add_option("--out", ingest_out, "output directory");
  ingest->add_option("--sessions", ingest_sessions, "session schedule HH:MM+min;...");
  ingest->add_option("--instrument", ingest_instrument, "instrument symbol");

  // --- featurize ---
  auto* feat = app.add_subcommand("featurize", "13 features, forward returns and labels");
  std::string feat_grid, feat_out = "out";
  double feat_fee = 0.0001;
  int feat_horizon = kDefaultHorizon;
  feat->add_option("--grid", feat_grid, "grid.csv from ingest")->required();
  feat->add_option("--out", feat_out, "output directory");
  feat->add_option("--fee", feat_fee, "fee threshold (return units)");
  feat->add_option("--horizon", feat_horizon, "forward-return horizon in grid steps");

  // --- split ---
  auto* split = app.add_subcommand("split", "assemble 60x13 samples, chronological 8:1:1 split");
  std::string split_features, split_out = "out";
  int split_window = kWindowLen;
  split->add_option("--features", split_features, "features.csv from featurize")->required();
  split->add_option("--out", split_out, "output directory");
  split->add_option("--window", split_window, "window length in grid steps");

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "train a backbone with an imbalance countermeasure");
  TrainCli tcli;
  train_cmd->add_option("--config", tcli.config_path, "run config file (key=value)");
  train_cmd->add_option("--train", tcli.train_path, "train .tpds")->required();
  train_cmd->add_option("--val", tcli.val_path, "validation .tpds")->required();
  train_cmd->add_option("--out", tcli.out_dir, "output directory");
  train_cmd->add_option("--name", tcli.run_name, "run name prefix for artifacts");
  train_cmd->add_option("--model", tcli.model, "mlp|lstm");
  train_cmd->add_option("--loss", tcli.loss, "plain|weighted|sensitive|focal|adaptive");
  train_cmd->add_option("--weights", tcli.weights, "class weights w-1,w0,w+1");
  train_cmd->add_option("--lambda", tcli.lambda, "focal lambda");
  train_cmd->add_option("--lr", tcli.learning_rate, "learning rate");
  train_cmd->add_option("--batch", tcli.batch_size, "batch size");
  train_cmd->add_option("--patience", tcli.patience, "early-stop patience (epochs)");
  train_cmd->add_option("--max-epochs", tcli.max_epochs, "maximum epochs");
  train_cmd->add_option("--seed", tcli.seed, "training seed");
  train_cmd->add_option("--fee", tcli.fee, "fee threshold (recorded in the manifest)");
  train_cmd->add_option("--horizon", tcli.horizon, "horizon (recorded in the manifest)");
  train_cmd->add_option("--normalize", tcli.normalize, "on|off per-sample normalization");
  train_cmd->add_option("--undersample", tcli.undersample, "on|off per-epoch undersampling");
  train_cmd->add_option("--rus-mode", tcli.rus_mode, "balance|literal undersampling rule");
  train_cmd->add_option("--lstm-hidden", tcli.lstm_hidden, "LSTM hidden width");
  train_cmd->add_option("--negative-slope", tcli.negative_slope, "LeakyReLU negative slope");
  train_cmd->add_option("--output-activation", tcli.output_activation,
                        "on|off LeakyReLU on the MLP output layer");
  train_cmd->add_flag("--grid-runs", tcli.grid, "run the loss x model matrix as parallel jobs");

  // --- evaluate ---
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
  std::string eval_ckpt, eval_data, eval_out, eval_model;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint .tpck")->required();
  eval_cmd->add_option("--data", eval_data, "dataset .tpds")->required();
  eval_cmd->add_option("--model", eval_model, "expected architecture (mlp|lstm)");
  eval_cmd->add_option("--out", eval_out, "optional output directory for eval.json");

  // --- factors ---
  auto* factors_cmd = app.add_subcommand("factors", "diagnostic factors + accumulation curves");
  std::string fac_grid, fac_out = "out";
  double fac_fee = 0.0001;
  int fac_horizon = kDefaultHorizon;
  factors_cmd->add_option("--grid", fac_grid, "grid.csv from ingest")->required();
  factors_cmd->add_option("--out", fac_out, "output directory");
  factors_cmd->add_option("--fee", fac_fee, "fee threshold (return units)");
  factors_cmd->add_option("--horizon", fac_horizon, "forward-return horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      SynthStage st;
      if (!synth_config.empty()) st.config = SynthConfig::from_file(synth_config);
      if (synth_seed >= 0) st.config.seed = static_cast<std::uint64_t>(synth_seed);
      if (synth_signal >= 0.0) st.config.signal = synth_signal;
      if (synth_days > 0) st.config.days = synth_days;
      st.out_dir = synth_out;
      SynthReport r = run_synth(st);
      std::printf("synth: %zu rows, fee %.8g, shares -1/0/+1 = %.4f/%.4f/%.4f\n", r.rows, r.fee,
                  r.achieved_shares[0], r.achieved_shares[1], r.achieved_shares[2]);
    } else if (ingest->parsed()) {
      IngestStage st;
      st.input_csv = ingest_input;
      st.out_dir = ingest_out;
      if (!ingest_sessions.empty()) st.sessions = SessionSchedule::parse(ingest_sessions);
      st.instrument = ingest_instrument;
      ParseReport r = run_ingest(st);
      std::printf("ingest: %zu ok, %zu crossed, %zu outside sessions, %zu malformed\n", r.rows_ok,
                  r.rows_crossed, r.rows_outside_session, r.malformed.size());
      for (const auto& m : r.malformed) std::fprintf(stderr, "  %s\n", m.c_str());
    } else if (feat->parsed()) {
      FeaturizeStage st;
      st.grid_csv = feat_grid;
      st.out_dir = feat_out;
      st.fee = feat_fee;
      st.horizon = feat_horizon;
      FeaturizeSummary s = run_featurize(st);
      std::printf("featurize: %zu rows, labels -1/0/+1 = %lld/%lld/%lld\n", s.rows,
                  static_cast<long long>(s.label_counts[0]), static_cast<long long>(s.label_counts[1]),
                  static_cast<long long>(s.label_counts[2]));
    } else if (split->parsed()) {
      SplitStage st;
      st.features_csv = split_features;
      st.out_dir = split_out;
      st.window = split_window;
      SplitSummary s = run_split(st);
      std::printf("split: train/val/test = %zu/%zu/%zu samples (skipped %zu endpoints)\n", s.n_train,
                  s.n_val, s.n_test, s.assemble.skipped_invalid);
    } else if (train_cmd->parsed()) {
      if (tcli.grid) return run_train_grid(tcli);
      TrainStage st;
      st.train_path = tcli.train_path;
      st.val_path = tcli.val_path;
      st.out_dir = tcli.out_dir;
      st.run_name = tcli.run_name;
      st.config = resolve_train_config(tcli);
      TrainSummary s = run_train(st);
      std::printf("train: best epoch %d (val accuracy %.4f) after %d epochs -> %s\n", s.best_epoch,
                  s.best_val_accuracy, s.epochs_run, s.checkpoint_path.c_str());
    } else if (eval_cmd->parsed()) {
      EvaluateStage st;
      st.checkpoint_path = eval_ckpt;
      st.dataset_path = eval_data;
      st.out_dir = eval_out;
      if (!eval_model.empty()) st.expect_model = model_kind_from_name(eval_model);
      run_evaluate(st);
    } else if (factors_cmd->parsed()) {
      FactorsStage st;
      st.grid_csv = fac_grid;
      st.out_dir = fac_out;
      st.fee = fac_fee;
      st.horizon = fac_horizon;
      FactorsSummary s = run_factors(st);
      std::printf("factors: %zu rows\n", s.factor_rows);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
