#pragma once

// From-scratch dense networks: MLP and single-layer LSTM with exact
// backpropagation, plus the Adam optimizer and the checkpoint format.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tickpred/common.hpp"
#include "tickpred/losses.hpp"

namespace tickpred {

enum class ModelKind { kMlp, kLstm };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& name);

/// One named parameter matrix (cols = 1 for bias vectors) with its gradient
/// accumulator.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0, cols = 0;
  std::vector<double> val;
  std::vector<double> grad;

  std::size_t size() const { return rows * cols; }
};

/// A backbone network mapping a 60x13 window to 3 logits. forward() caches
/// the activations consumed by the matching backward() call; per-sample
/// gradients accumulate into the blocks until zero_grads().
class Model {
 public:
  virtual ~Model() = default;

  virtual ModelKind kind() const = 0;

  /// window is row-major, oldest timestep first; dims must match exactly.
  virtual Vec3 forward(const double* window, int rows, int cols) = 0;
  virtual void backward(const Vec3& dlogits) = 0;

  std::vector<ParamBlock>& blocks() { return blocks_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  void zero_grads();
  void scale_grads(double a);
  /// Global L2 norm of all gradients.
  double grad_norm() const;
  /// Scale gradients down to max_norm if they exceed it. Returns the factor.
  double clip_grad_norm(double max_norm);
  bool grads_finite() const;

  std::vector<std::vector<double>> snapshot_params() const;
  void restore_params(const std::vector<std::vector<double>>& snap);

  std::size_t param_count() const;

 protected:
  std::vector<ParamBlock> blocks_;

  ParamBlock& add_block(const std::string& name, std::size_t rows, std::size_t cols);
  void init_uniform_fanin(Rng& rng);
};

struct MlpConfig {
  std::vector<int> structure = {kWindowLen * kFeatureDim, 64, 64, kNumClasses};
  double negative_slope = 0.01;
  bool output_activation = true;  // LeakyReLU on the logits, ahead of softmax
};

struct LstmConfig {
  int input_dim = kFeatureDim;
  int hidden_dim = 64;
  int seq_len = kWindowLen;
};

class MlpModel : public Model {
 public:
  MlpModel(const MlpConfig& cfg, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kMlp; }

  Vec3 forward(const double* window, int rows, int cols) override;
  void backward(const Vec3& dlogits) override;

  const MlpConfig& config() const { return cfg_; }

 private:
  MlpConfig cfg_;
  // forward caches: inputs and pre/post activations per layer
  std::vector<std::vector<double>> z_, a_;
  std::vector<double> dz_, da_;
};

class LstmModel : public Model {
 public:
  LstmModel(const LstmConfig& cfg, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kLstm; }

  Vec3 forward(const double* window, int rows, int cols) override;
  void backward(const Vec3& dlogits) override;

  const LstmConfig& config() const { return cfg_; }

 private:
  LstmConfig cfg_;
  std::vector<double> x_;  // copied window
  // per-step caches (seq_len x hidden each)
  std::vector<double> i_, f_, o_, g_, c_, tanh_c_, h_;
  // work buffers
  std::vector<double> zi_, zf_, zo_, zg_, dh_, dc_, tmp_, dz_;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const std::vector<ParamBlock>& blocks, AdamConfig cfg = {});

  /// One update from the blocks' accumulated gradients. Returns false (and
  /// leaves everything untouched) when any gradient is non-finite.
  bool step(std::vector<ParamBlock>& blocks, double lr);

  std::int64_t step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct CheckpointMeta {
  ModelKind kind = ModelKind::kMlp;
  bool normalize = false;
  bool output_activation = true;
  double negative_slope = 0.01;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
  std::uint32_t seq_len = kWindowLen;  // LSTM unroll length
};

/// Checkpoint container ("TPCK"): see README for the byte layout.
void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  CheckpointMeta meta;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

std::unique_ptr<Model> make_model(ModelKind kind, const MlpConfig& mlp, const LstmConfig& lstm,
                                  std::uint64_t seed);

}  // namespace tickpred
