#include "tickpred/nn.hpp"

#include <cmath>
#include <cstring>

#include "tickpred/binio.hpp"
#include "tickpred/kernels.hpp"

namespace tickpred {

const char* model_kind_name(ModelKind k) { return k == ModelKind::kMlp ? "mlp" : "lstm"; }

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "mlp") return ModelKind::kMlp;
  if (name == "lstm") return ModelKind::kLstm;
  throw PipelineError("unknown model kind \"" + name + "\" (want mlp|lstm)");
}

void Model::zero_grads() {
  for (auto& b : blocks_) std::fill(b.grad.begin(), b.grad.end(), 0.0);
}

void Model::scale_grads(double a) {
  const auto& k = kern::active();
  for (auto& b : blocks_) k.scale(b.grad.data(), b.grad.size(), a);
}

double Model::grad_norm() const {
  const auto& k = kern::active();
  double sq = 0.0;
  for (const auto& b : blocks_) sq += k.dot(b.grad.data(), b.grad.data(), b.grad.size());
  return std::sqrt(sq);
}

double Model::clip_grad_norm(double max_norm) {
  double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return 1.0;
  double s = max_norm / norm;
  scale_grads(s);
  return s;
}

bool Model::grads_finite() const {
  for (const auto& b : blocks_)
    for (double g : b.grad)
      if (!std::isfinite(g)) return false;
  return true;
}

std::vector<std::vector<double>> Model::snapshot_params() const {
  std::vector<std::vector<double>> snap;
  snap.reserve(blocks_.size());
  for (const auto& b : blocks_) snap.push_back(b.val);
  return snap;
}

void Model::restore_params(const std::vector<std::vector<double>>& snap) {
  if (snap.size() != blocks_.size()) throw PipelineError("parameter snapshot shape mismatch");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (snap[i].size() != blocks_[i].val.size()) throw PipelineError("parameter snapshot shape mismatch");
    blocks_[i].val = snap[i];
  }
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

ParamBlock& Model::add_block(const std::string& name, std::size_t rows, std::size_t cols) {
  ParamBlock b;
  b.name = name;
  b.rows = rows;
  b.cols = cols;
  b.val.assign(rows * cols, 0.0);
  b.grad.assign(rows * cols, 0.0);
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

void Model::init_uniform_fanin(Rng& rng) {
  for (auto& b : blocks_) {
    if (b.cols == 1) continue;  // biases start at zero
    double bound = 1.0 / std::sqrt(static_cast<double>(b.cols));
    for (auto& w : b.val) w = rng.uniform(-bound, bound);
  }
}

namespace {

void check_window(const double* window, int rows, int cols, int want_rows, int want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw PipelineError("window shape mismatch: got " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", want " + std::to_string(want_rows) + "x" +
                        std::to_string(want_cols));
  }
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(window[i])) throw PipelineError("non-finite value in input window");
}

}  // namespace

// ---------------------------------------------------------------------------
// MLP
// ---------------------------------------------------------------------------

MlpModel::MlpModel(const MlpConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.structure.size() < 2) throw PipelineError("MLP structure needs at least two layers");
  if (cfg_.structure.back() != kNumClasses)
    throw PipelineError("MLP output width must be " + std::to_string(kNumClasses));
  for (std::size_t l = 0; l + 1 < cfg_.structure.size(); ++l) {
    auto idx = std::to_string(l + 1);
    add_block("W" + idx, static_cast<std::size_t>(cfg_.structure[l + 1]),
              static_cast<std::size_t>(cfg_.structure[l]));
    add_block("b" + idx, static_cast<std::size_t>(cfg_.structure[l + 1]), 1);
  }
  Rng rng(derive_seed(seed, /*tag=*/0x4D4C50ULL));
  init_uniform_fanin(rng);

  const std::size_t n_layers = cfg_.structure.size() - 1;
  z_.resize(n_layers);
  a_.resize(n_layers + 1);
  a_[0].resize(static_cast<std::size_t>(cfg_.structure[0]));
  for (std::size_t l = 0; l < n_layers; ++l) {
    z_[l].resize(static_cast<std::size_t>(cfg_.structure[l + 1]));
    a_[l + 1].resize(static_cast<std::size_t>(cfg_.structure[l + 1]));
  }
  std::size_t widest = 0;
  for (int w : cfg_.structure) widest = std::max(widest, static_cast<std::size_t>(w));
  dz_.resize(widest);
  da_.resize(widest);
}

Vec3 MlpModel::forward(const double* window, int rows, int cols) {
  if (rows * cols != cfg_.structure.front())
    throw PipelineError("MLP input size mismatch: got " + std::to_string(rows * cols) +
                        ", want " + std::to_string(cfg_.structure.front()));
  check_window(window, rows, cols, rows, cols);
  std::memcpy(a_[0].data(), window, a_[0].size() * sizeof(double));

  const auto& k = kern::active();
  const std::size_t n_layers = z_.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const ParamBlock& W = blocks_[2 * l];
    const ParamBlock& b = blocks_[2 * l + 1];
    k.matvec(W.val.data(), W.rows, W.cols, a_[l].data(), z_[l].data());
    k.axpy(1.0, b.val.data(), z_[l].data(), b.rows);
    const bool is_output = (l + 1 == n_layers);
    if (!is_output || cfg_.output_activation) {
      k.leaky_relu(z_[l].data(), a_[l + 1].data(), z_[l].size(), cfg_.negative_slope);
    } else {
      a_[l + 1] = z_[l];
    }
  }
  const auto& out = a_.back();
  return {out[0], out[1], out[2]};
}

void MlpModel::backward(const Vec3& dlogits) {
  const auto& k = kern::active();
  const std::size_t n_layers = z_.size();

  std::copy(dlogits.begin(), dlogits.end(), da_.begin());
  for (std::size_t li = n_layers; li-- > 0;) {
    ParamBlock& W = blocks_[2 * li];
    ParamBlock& b = blocks_[2 * li + 1];
    const std::size_t out_n = W.rows;
    const bool is_output = (li + 1 == n_layers);
    if (!is_output || cfg_.output_activation) {
      k.leaky_relu_grad(z_[li].data(), da_.data(), dz_.data(), out_n, cfg_.negative_slope);
    } else {
      std::copy(da_.begin(), da_.begin() + static_cast<std::ptrdiff_t>(out_n), dz_.begin());
    }
    k.ger_acc(W.grad.data(), W.rows, W.cols, dz_.data(), a_[li].data());
    k.axpy(1.0, dz_.data(), b.grad.data(), out_n);
    if (li > 0) {
      std::fill(da_.begin(), da_.begin() + static_cast<std::ptrdiff_t>(W.cols), 0.0);
      k.matvec_t_acc(W.val.data(), W.rows, W.cols, dz_.data(), da_.data());
    }
  }
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

LstmModel::LstmModel(const LstmConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  const auto H = static_cast<std::size_t>(cfg_.hidden_dim);
  const auto D = static_cast<std::size_t>(cfg_.input_dim);
  for (const char* gate : {"i", "f", "o", "g"}) {
    add_block(std::string("W") + gate, H, D);
    add_block(std::string("U") + gate, H, H);
    add_block(std::string("b") + gate, H, 1);
  }
  add_block("Wy", kNumClasses, H);
  add_block("by", kNumClasses, 1);
  Rng rng(derive_seed(seed, /*tag=*/0x4C53544DULL));
  init_uniform_fanin(rng);

  const auto T = static_cast<std::size_t>(cfg_.seq_len);
  x_.resize(T * D);
  for (auto* buf : {&i_, &f_, &o_, &g_, &c_, &tanh_c_, &h_}) buf->resize(T * H);
  for (auto* buf : {&zi_, &zf_, &zo_, &zg_, &dh_, &dc_, &tmp_, &dz_}) buf->resize(H);
}

Vec3 LstmModel::forward(const double* window, int rows, int cols) {
  check_window(window, rows, cols, cfg_.seq_len, cfg_.input_dim);
  const auto H = static_cast<std::size_t>(cfg_.hidden_dim);
  const auto D = static_cast<std::size_t>(cfg_.input_dim);
  const auto T = static_cast<std::size_t>(cfg_.seq_len);
  std::memcpy(x_.data(), window, T * D * sizeof(double));

  const auto& k = kern::active();
  // block order: (Wi,Ui,bi),(Wf,Uf,bf),(Wo,Uo,bo),(Wg,Ug,bg),Wy,by
  const ParamBlock* B = blocks_.data();

  const double* h_prev = nullptr;  // null means zero vector at t = 0
  const double* c_prev = nullptr;
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = x_.data() + t * D;
    double* gates[4] = {zi_.data(), zf_.data(), zo_.data(), zg_.data()};
    for (int gidx = 0; gidx < 4; ++gidx) {
      const ParamBlock& W = B[3 * gidx];
      const ParamBlock& U = B[3 * gidx + 1];
      const ParamBlock& bias = B[3 * gidx + 2];
      k.matvec(W.val.data(), W.rows, W.cols, xt, gates[gidx]);
      if (h_prev) {
        k.matvec(U.val.data(), U.rows, U.cols, h_prev, tmp_.data());
        k.axpy(1.0, tmp_.data(), gates[gidx], H);
      }
      k.axpy(1.0, bias.val.data(), gates[gidx], H);
    }
    double* it = i_.data() + t * H;
    double* ft = f_.data() + t * H;
    double* ot = o_.data() + t * H;
    double* gt = g_.data() + t * H;
    double* ct = c_.data() + t * H;
    double* tct = tanh_c_.data() + t * H;
    double* ht = h_.data() + t * H;
    for (std::size_t j = 0; j < H; ++j) {
      it[j] = sigmoid(zi_[j]);
      ft[j] = sigmoid(zf_[j]);
      ot[j] = sigmoid(zo_[j]);
      gt[j] = std::tanh(zg_[j]);
      const double cp = c_prev ? c_prev[j] : 0.0;
      ct[j] = ft[j] * cp + it[j] * gt[j];
      tct[j] = std::tanh(ct[j]);
      ht[j] = ot[j] * tct[j];
    }
    h_prev = ht;
    c_prev = ct;
  }

  const ParamBlock& Wy = B[12];
  const ParamBlock& by = B[13];
  Vec3 logits;
  k.matvec(Wy.val.data(), Wy.rows, Wy.cols, h_.data() + (T - 1) * H, logits.data());
  for (int c = 0; c < kNumClasses; ++c) logits[c] += by.val[c];
  return logits;
}

void LstmModel::backward(const Vec3& dlogits) {
  const auto H = static_cast<std::size_t>(cfg_.hidden_dim);
  const auto D = static_cast<std::size_t>(cfg_.input_dim);
  const auto T = static_cast<std::size_t>(cfg_.seq_len);
  const auto& k = kern::active();
  ParamBlock* B = blocks_.data();

  ParamBlock& Wy = B[12];
  ParamBlock& by = B[13];
  k.ger_acc(Wy.grad.data(), Wy.rows, Wy.cols, dlogits.data(), h_.data() + (T - 1) * H);
  for (int c = 0; c < kNumClasses; ++c) by.grad[c] += dlogits[c];

  std::fill(dh_.begin(), dh_.end(), 0.0);
  std::fill(dc_.begin(), dc_.end(), 0.0);
  k.matvec_t_acc(Wy.val.data(), Wy.rows, Wy.cols, dlogits.data(), dh_.data());

  // dz buffers per gate reuse zi_..zg_ (forward values no longer needed)
  double* dzs[4] = {zi_.data(), zf_.data(), zo_.data(), zg_.data()};

  for (std::size_t t = T; t-- > 0;) {
    const double* it = i_.data() + t * H;
    const double* ft = f_.data() + t * H;
    const double* ot = o_.data() + t * H;
    const double* gt = g_.data() + t * H;
    const double* tct = tanh_c_.data() + t * H;
    const double* c_prev = t > 0 ? c_.data() + (t - 1) * H : nullptr;
    const double* h_prev = t > 0 ? h_.data() + (t - 1) * H : nullptr;
    const double* xt = x_.data() + t * D;

    for (std::size_t j = 0; j < H; ++j) {
      const double do_j = dh_[j] * tct[j];
      const double dct = dc_[j] + dh_[j] * ot[j] * (1.0 - tct[j] * tct[j]);
      const double di = dct * gt[j];
      const double df = dct * (c_prev ? c_prev[j] : 0.0);
      const double dg = dct * it[j];
      dzs[0][j] = di * it[j] * (1.0 - it[j]);
      dzs[1][j] = df * ft[j] * (1.0 - ft[j]);
      dzs[2][j] = do_j * ot[j] * (1.0 - ot[j]);
      dzs[3][j] = dg * (1.0 - gt[j] * gt[j]);
      dc_[j] = dct * ft[j];  // flows to t-1
    }

    std::fill(dh_.begin(), dh_.end(), 0.0);
    for (int gidx = 0; gidx < 4; ++gidx) {
      ParamBlock& W = B[3 * gidx];
      ParamBlock& U = B[3 * gidx + 1];
      ParamBlock& bias = B[3 * gidx + 2];
      k.ger_acc(W.grad.data(), W.rows, W.cols, dzs[gidx], xt);
      if (h_prev) {
        k.ger_acc(U.grad.data(), U.rows, U.cols, dzs[gidx], h_prev);
        k.matvec_t_acc(U.val.data(), U.rows, U.cols, dzs[gidx], dh_.data());
      }
      k.axpy(1.0, dzs[gidx], bias.grad.data(), H);
    }
  }
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

AdamOptimizer::AdamOptimizer(const std::vector<ParamBlock>& blocks, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(blocks.size());
  v_.reserve(blocks.size());
  for (const auto& b : blocks) {
    m_.emplace_back(b.size(), 0.0);
    v_.emplace_back(b.size(), 0.0);
  }
}

bool AdamOptimizer::step(std::vector<ParamBlock>& blocks, double lr) {
  if (blocks.size() != m_.size()) throw PipelineError("Adam state does not match parameter blocks");
  for (const auto& b : blocks)
    for (double g : b.grad)
      if (!std::isfinite(g)) return false;

  ++t_;
  const double c1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const double c2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  const auto& k = kern::active();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& b = blocks[i];
    k.adam_update(b.val.data(), b.grad.data(), m_[i].data(), v_[i].data(), b.size(), lr,
                  cfg_.beta1, cfg_.beta2, cfg_.eps, c1, c2);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta) {
  BinWriter w(path);
  w.magic("TPCK");
  w.u32(1);  // version
  w.u8(meta.kind == ModelKind::kMlp ? 0 : 1);
  w.u8(meta.normalize ? 1 : 0);
  w.u8(meta.output_activation ? 1 : 0);
  w.u8(0);  // pad
  w.f64(meta.negative_slope);
  w.u64(meta.seed);
  w.u32(meta.epoch);
  w.u32(meta.seq_len);
  w.u32(static_cast<std::uint32_t>(model.blocks().size()));
  std::vector<float> buf;
  for (const auto& b : model.blocks()) {
    w.str8(b.name);
    w.u32(static_cast<std::uint32_t>(b.rows));
    w.u32(static_cast<std::uint32_t>(b.cols));
    buf.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) buf[i] = static_cast<float>(b.val[i]);
    w.f32_array(buf.data(), buf.size());
  }
  w.close();
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  BinReader r(path);
  r.expect_magic("TPCK", "checkpoint");
  std::uint32_t version = r.u32();
  if (version != 1) throw PipelineError(path + ": unsupported checkpoint version " + std::to_string(version));

  CheckpointMeta meta;
  std::uint8_t kind = r.u8();
  if (kind > 1) throw PipelineError(path + ": unknown architecture tag");
  meta.kind = kind == 0 ? ModelKind::kMlp : ModelKind::kLstm;
  meta.normalize = r.u8() != 0;
  meta.output_activation = r.u8() != 0;
  r.u8();
  meta.negative_slope = r.f64();
  meta.seed = r.u64();
  meta.epoch = r.u32();
  meta.seq_len = r.u32();

  struct RawBlock {
    std::string name;
    std::size_t rows, cols;
    std::vector<float> data;
  };
  std::uint32_t n_blocks = r.u32();
  std::vector<RawBlock> raw(n_blocks);
  for (auto& b : raw) {
    b.name = r.str8();
    b.rows = r.u32();
    b.cols = r.u32();
    b.data.resize(b.rows * b.cols);
    r.f32_array(b.data.data(), b.data.size());
  }

  LoadedCheckpoint loaded;
  loaded.meta = meta;
  if (meta.kind == ModelKind::kMlp) {
    // Structure is recovered from the weight shapes (W blocks at even slots).
    MlpConfig cfg;
    cfg.negative_slope = meta.negative_slope;
    cfg.output_activation = meta.output_activation;
    cfg.structure.clear();
    for (std::size_t i = 0; i < raw.size(); i += 2) {
      if (cfg.structure.empty()) cfg.structure.push_back(static_cast<int>(raw[i].cols));
      cfg.structure.push_back(static_cast<int>(raw[i].rows));
    }
    loaded.model = std::make_unique<MlpModel>(cfg, meta.seed);
  } else {
    LstmConfig cfg;
    cfg.hidden_dim = static_cast<int>(raw[0].rows);
    cfg.input_dim = static_cast<int>(raw[0].cols);
    cfg.seq_len = static_cast<int>(meta.seq_len);
    loaded.model = std::make_unique<LstmModel>(cfg, meta.seed);
  }

  auto& blocks = loaded.model->blocks();
  if (blocks.size() != raw.size())
    throw PipelineError(path + ": checkpoint block count does not match architecture");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (blocks[i].rows != raw[i].rows || blocks[i].cols != raw[i].cols || blocks[i].name != raw[i].name)
      throw PipelineError(path + ": checkpoint block \"" + raw[i].name + "\" has unexpected shape");
    for (std::size_t j = 0; j < raw[i].data.size(); ++j)
      blocks[i].val[j] = static_cast<double>(raw[i].data[j]);
  }
  return loaded;
}

std::unique_ptr<Model> make_model(ModelKind kind, const MlpConfig& mlp, const LstmConfig& lstm,
                                  std::uint64_t seed) {
  if (kind == ModelKind::kMlp) return std::make_unique<MlpModel>(mlp, seed);
  return std::make_unique<LstmModel>(lstm, seed);
}

}  // namespace tickpred
