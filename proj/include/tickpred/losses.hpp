#pragma once

// Cross-entropy and the four label-imbalance countermeasure losses, with
// analytic gradients with respect to the logits.

#include <array>
#include <cstdint>
#include <string>

#include "tickpred/common.hpp"

namespace tickpred {

enum class LossKind { kPlain, kWeighted, kSensitive, kFocal, kAdaptive };

const char* loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

/// Which countermeasure to apply and its parameters. The five kinds are
/// mutually exclusive.
struct LossSpec {
  LossKind kind = LossKind::kPlain;
  std::array<double, kNumClasses> class_weights = {8.0, 1.0, 8.0};  // weighted
  std::array<double, kNumClasses> class_counts = {1.0, 1.0, 1.0};   // sensitive
  double lambda = 2.0;                                              // focal
  std::array<double, kNumClasses> accuracies = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // adaptive

  /// The per-class multipliers in effect (weighted/adaptive kinds).
  std::array<double, kNumClasses> effective_weights() const;
};

using Vec3 = std::array<double, kNumClasses>;

/// Numerically stable softmax (max subtraction).
Vec3 softmax_probs(const Vec3& logits);

/// -log p_y with p_y clamped at 1e-12.
double cross_entropy(const Vec3& p, int y);

/// Count-derived coefficients of the sensitive loss: N_{-c} / ((C-1) N).
/// They sum to 1 for any positive counts.
Vec3 sensitive_coefficients(const Vec3& counts);

/// Accuracy-adaptive weights: w_c = (1/a_c) / sum_k (1/a_k), accuracies
/// floored at 0.01. The weights sum to 1.
Vec3 adaptive_weights(const Vec3& accuracies);

struct LossResult {
  double loss = 0.0;
  Vec3 dlogits{};  // gradient of the per-sample loss wrt the logits
};

/// Per-sample loss and gradient for the configured kind.
/// y is the class index in {0, 1, 2}.
LossResult eval_loss(const LossSpec& spec, const Vec3& logits, int y);

}  // namespace tickpred
