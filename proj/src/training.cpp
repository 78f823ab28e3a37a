#include "tickpred/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace tickpred {

void TrainConfig::validate_config() const {
  if (batch_size < 1) throw PipelineError("batch_size must be >= 1");
  if (early_stop_patience < 1) throw PipelineError("early_stop_patience must be >= 1");
  if (max_epochs < 1) throw PipelineError("max_epochs must be >= 1");
  if (learning_rate <= 0.0) throw PipelineError("learning_rate must be > 0");
  if (fee < 0.0) throw PipelineError("fee must be >= 0");
  if (horizon < 1) throw PipelineError("horizon must be >= 1");
}

bool EarlyStopper::observe(int epoch, double metric) {
  if (metric > best_metric_) {
    best_metric_ = metric;
    best_epoch_ = epoch;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

EvalStats validate(Model& model, const SampleSet& split, bool normalize) {
  if (split.samples.empty()) throw PipelineError("validate: empty split");
  EvalStats st;
  st.total = split.samples.size();
  std::vector<double> w;
  for (const auto& s : split.samples) {
    w.assign(s.window.begin(), s.window.end());
    if (normalize) normalize_window(w.data(), split.window, split.feat_dim);
    Vec3 logits = model.forward(w.data(), split.window, split.feat_dim);
    int pred = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (logits[c] > logits[pred]) pred = c;
    st.confusion[s.label_idx][static_cast<std::size_t>(pred)]++;
  }

  std::int64_t correct = 0;
  int present = 0;
  double recall_sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    std::int64_t row = 0;
    for (int p = 0; p < kNumClasses; ++p) row += st.confusion[c][p];
    correct += st.confusion[c][c];
    if (row > 0) {
      st.per_class_accuracy[c] = static_cast<double>(st.confusion[c][c]) / static_cast<double>(row);
      recall_sum += st.per_class_accuracy[c];
      ++present;
    } else {
      st.per_class_accuracy[c] = 1.0;  // absent class: no signal, no boost
    }
  }
  st.accuracy = static_cast<double>(correct) / static_cast<double>(st.total);
  st.balanced_accuracy = present > 0 ? recall_sum / present : 0.0;
  return st;
}

TrainResult train(Model& model, const TrainConfig& cfg, const SampleSet& train_set,
                  const SampleSet& val_set,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  cfg.validate_config();
  if (train_set.samples.empty()) throw PipelineError("train: empty training set");
  if (val_set.samples.empty()) throw PipelineError("train: empty validation set");

  TrainResult result;

  LossSpec loss = cfg.loss;
  if (loss.kind == LossKind::kSensitive) {
    auto counts = train_set.class_counts();
    for (int c = 0; c < kNumClasses; ++c) {
      loss.class_counts[c] = static_cast<double>(counts[c]);
      result.sensitive_counts[c] = static_cast<double>(counts[c]);
    }
  }

  AdamOptimizer adam(model.blocks());
  EarlyStopper stopper(cfg.early_stop_patience);

  const int rows = train_set.window;
  const int cols = train_set.feat_dim;
  std::vector<double> window;
  std::vector<std::size_t> order(train_set.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();

    std::vector<std::size_t> epoch_indices;
    if (cfg.undersample) {
      epoch_indices = undersample_epoch(train_set, cfg.seed, epoch, cfg.rus_mode, &result.warnings);
    } else {
      epoch_indices = order;
      Rng shuffle_rng(derive_seed(cfg.seed, /*tag=*/0x53485546ULL, static_cast<std::uint64_t>(epoch)));
      for (std::size_t i = epoch_indices.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(i));
        std::swap(epoch_indices[i - 1], epoch_indices[j]);
      }
    }

    EpochReport report;
    report.epoch = epoch;
    report.loss_weights_used = loss.effective_weights();

    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    const std::size_t n = epoch_indices.size();
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bs = end - start;
      model.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train_set.samples[epoch_indices[k]];
        window.assign(s.window.begin(), s.window.end());
        if (cfg.normalize) normalize_window(window.data(), rows, cols);
        Vec3 logits = model.forward(window.data(), rows, cols);
        LossResult lr = eval_loss(loss, logits, s.label_idx);
        batch_loss += lr.loss;
        model.backward(lr.dlogits);
      }
      if (!std::isfinite(batch_loss)) {
        throw PipelineError("non-finite training loss at epoch " + std::to_string(epoch) +
                            ", batch starting at sample " + std::to_string(start));
      }
      model.scale_grads(1.0 / static_cast<double>(bs));  // batch mean reduction
      if (model.kind() == ModelKind::kLstm && cfg.lstm_clip_norm > 0.0)
        model.clip_grad_norm(cfg.lstm_clip_norm);
      if (!adam.step(model.blocks(), cfg.learning_rate)) {
        ++report.skipped_steps;
        result.warnings.push_back("epoch " + std::to_string(epoch) +
                                  ": skipped Adam step on non-finite gradients");
      }
      loss_sum += batch_loss;
      loss_n += bs;
    }
    report.train_loss = loss_n > 0 ? loss_sum / static_cast<double>(loss_n) : 0.0;

    EvalStats val = validate(model, val_set, cfg.normalize);
    report.val_accuracy = val.accuracy;
    report.balanced_accuracy = val.balanced_accuracy;
    report.per_class_accuracy = val.per_class_accuracy;
    report.confusion = val.confusion;

    // Accuracy-adaptive weighting reads the previous epoch's validation pass.
    if (loss.kind == LossKind::kAdaptive) loss.accuracies = val.per_class_accuracy;

    bool improved = val.accuracy > result.best_val_accuracy || result.best_epoch == 0;
    if (improved) {
      result.best_val_accuracy = val.accuracy;
      result.best_epoch = epoch;
      result.best_params = model.snapshot_params();
    }

    report.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.reports.push_back(report);
    if (on_epoch) on_epoch(report);

    if (stopper.observe(epoch, val.accuracy)) break;
  }

  return result;
}

}  // namespace tickpred
