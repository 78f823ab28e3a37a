#pragma once

// Mini-batch training loop: optional per-epoch undersampling, validation
// after every epoch, accuracy early stopping, best-epoch checkpointing.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tickpred/dataset.hpp"
#include "tickpred/losses.hpp"
#include "tickpred/nn.hpp"

namespace tickpred {

struct TrainConfig {
  ModelKind model = ModelKind::kMlp;
  LossSpec loss;
  int batch_size = 512;
  double learning_rate = 0.0001;
  int early_stop_patience = 10;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  bool normalize = false;
  bool undersample = false;
  RusMode rus_mode = RusMode::kBalance;
  double fee = 0.0001;
  int horizon = kDefaultHorizon;
  // backbone knobs
  std::vector<int> mlp_hidden = {64, 64};
  int lstm_hidden = 64;
  double negative_slope = 0.01;
  bool output_activation = true;
  double lstm_clip_norm = 5.0;  // global-norm clip, LSTM only

  void validate_config() const;
};

struct EpochReport {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::array<double, kNumClasses> per_class_accuracy{};     // recall per class
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};  // [true][pred]
  std::array<double, kNumClasses> loss_weights_used = {1.0, 1.0, 1.0};
  int skipped_steps = 0;  // Adam steps skipped on non-finite gradients
  double wall_s = 0.0;
};

/// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  /// Feed one epoch's metric; returns true when training should stop.
  bool observe(int epoch, double metric);

  int best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_metric_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_metric_ = -1.0;
  int stale_ = 0;
};

struct EvalStats {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::array<double, kNumClasses> per_class_accuracy{};
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
  std::size_t total = 0;
};

/// Argmax evaluation on a sample set. Per-class accuracy is recall; classes
/// absent from the split report accuracy 1 (no adaptive boost).
EvalStats validate(Model& model, const SampleSet& split, bool normalize);

struct TrainResult {
  std::vector<EpochReport> reports;
  std::vector<std::vector<double>> best_params;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::array<double, kNumClasses> sensitive_counts{};  // counts used, if any
  std::vector<std::string> warnings;
};

/// Train on `train`, validating on `val` after each epoch. The returned
/// best_params snapshot corresponds to the best-validation-accuracy epoch.
/// `model` is left in its *final* epoch state; call restore_params with
/// best_params for the best checkpoint.
TrainResult train(Model& model, const TrainConfig& cfg, const SampleSet& train_set,
                  const SampleSet& val_set,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

}  // namespace tickpred
