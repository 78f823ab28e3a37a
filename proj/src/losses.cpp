#include "tickpred/losses.hpp"

#include <algorithm>
#include <cmath>

namespace tickpred {

namespace {
constexpr double kProbFloor = 1e-12;
}

const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::kPlain: return "plain";
    case LossKind::kWeighted: return "weighted";
    case LossKind::kSensitive: return "sensitive";
    case LossKind::kFocal: return "focal";
    case LossKind::kAdaptive: return "adaptive";
  }
  return "?";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "plain") return LossKind::kPlain;
  if (name == "weighted") return LossKind::kWeighted;
  if (name == "sensitive") return LossKind::kSensitive;
  if (name == "focal") return LossKind::kFocal;
  if (name == "adaptive") return LossKind::kAdaptive;
  throw PipelineError("unknown loss kind \"" + name + "\" (want plain|weighted|sensitive|focal|adaptive)");
}

std::array<double, kNumClasses> LossSpec::effective_weights() const {
  switch (kind) {
    case LossKind::kWeighted: return class_weights;
    case LossKind::kAdaptive: return adaptive_weights(accuracies);
    default: return {1.0, 1.0, 1.0};
  }
}

Vec3 softmax_probs(const Vec3& logits) {
  double mx = std::max({logits[0], logits[1], logits[2]});
  Vec3 p;
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(logits[c] - mx);
    sum += p[c];
  }
  for (int c = 0; c < kNumClasses; ++c) p[c] /= sum;
  return p;
}

double cross_entropy(const Vec3& p, int y) {
  return -std::log(std::max(p[y], kProbFloor));
}

Vec3 sensitive_coefficients(const Vec3& counts) {
  double total = counts[0] + counts[1] + counts[2];
  if (total <= 0.0) throw PipelineError("sensitive loss needs positive class counts");
  Vec3 k;
  for (int c = 0; c < kNumClasses; ++c) k[c] = (total - counts[c]) / ((kNumClasses - 1) * total);
  return k;
}

Vec3 adaptive_weights(const Vec3& accuracies) {
  Vec3 inv;
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    double a = std::max(accuracies[c], 0.01);
    inv[c] = 1.0 / a;
    sum += inv[c];
  }
  for (int c = 0; c < kNumClasses; ++c) inv[c] /= sum;
  return inv;
}

namespace {

// d p_y / d z_c = p_y (delta_{cy} - p_c); the chain applied to dL/dp_y.
Vec3 chain_through_softmax(double dL_dpy, const Vec3& p, int y) {
  Vec3 g;
  for (int c = 0; c < kNumClasses; ++c) {
    double dpy_dzc = p[y] * ((c == y ? 1.0 : 0.0) - p[c]);
    g[c] = dL_dpy * dpy_dzc;
  }
  return g;
}

LossResult plain_ce(const Vec3& p, int y, double weight) {
  LossResult r;
  r.loss = weight * cross_entropy(p, y);
  for (int c = 0; c < kNumClasses; ++c) r.dlogits[c] = weight * (p[c] - (c == y ? 1.0 : 0.0));
  return r;
}

}  // namespace

LossResult eval_loss(const LossSpec& spec, const Vec3& logits, int y) {
  for (int c = 0; c < kNumClasses; ++c)
    if (!std::isfinite(logits[c])) throw PipelineError("non-finite logits in loss evaluation");
  if (y < 0 || y >= kNumClasses) throw PipelineError("class index out of range in loss evaluation");

  const Vec3 p = softmax_probs(logits);

  switch (spec.kind) {
    case LossKind::kPlain:
      return plain_ce(p, y, 1.0);

    case LossKind::kWeighted:
      return plain_ce(p, y, spec.class_weights[y]);

    case LossKind::kAdaptive:
      return plain_ce(p, y, adaptive_weights(spec.accuracies)[y]);

    case LossKind::kSensitive: {
      // kappa_y (1 - p_y)^2 * ce; the (1-p_y)^2 factor participates in the
      // gradient, mirroring focal loss.
      const Vec3 kappa = sensitive_coefficients(spec.class_counts);
      const double py = std::max(p[y], kProbFloor);
      const double u = 1.0 - p[y];
      const double ce = -std::log(py);
      LossResult r;
      r.loss = kappa[y] * u * u * ce;
      const double dL_dpy = kappa[y] * (-2.0 * u * ce - u * u / py);
      r.dlogits = chain_through_softmax(dL_dpy, p, y);
      return r;
    }

    case LossKind::kFocal: {
      if (spec.lambda < 0.0) throw PipelineError("focal lambda must be >= 0");
      if (spec.lambda == 0.0) return plain_ce(p, y, 1.0);  // exact CE reduction
      const double py = std::max(p[y], kProbFloor);
      const double u = std::max(1.0 - p[y], 0.0);
      LossResult r;
      if (u < kProbFloor) {
        // p_y -> 1: loss and gradient vanish for lambda > 0.
        r.loss = 0.0;
        r.dlogits = {0.0, 0.0, 0.0};
        return r;
      }
      const double ulam = std::pow(u, spec.lambda);
      r.loss = -ulam * std::log(py);
      const double dL_dpy = spec.lambda * std::pow(u, spec.lambda - 1.0) * std::log(py) - ulam / py;
      r.dlogits = chain_through_softmax(dL_dpy, p, y);
      return r;
    }
  }
  throw PipelineError("unhandled loss kind");
}

}  // namespace tickpred
