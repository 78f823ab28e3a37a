#include "tickpred/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "tickpred/binio.hpp"

namespace tickpred {

std::array<std::size_t, kNumClasses> SampleSet::class_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& s : samples) counts[s.label_idx]++;
  return counts;
}

SampleSet assemble_samples(const FeatureSeries& series, int window, AssembleStats* stats) {
  SampleSet out;
  out.window = window;
  AssembleStats local;
  for (const auto& seg : series.segments) {
    const std::size_t n = seg.rows.size();
    if (n < static_cast<std::size_t>(window)) continue;
    // valid_run[i] = number of consecutive valid rows ending at i
    std::size_t run = 0;
    for (std::size_t i = 0; i < n; ++i) {
      run = seg.rows[i].valid ? run + 1 : 0;
      if (i + 1 < static_cast<std::size_t>(window)) continue;
      if (run < static_cast<std::size_t>(window) || !seg.labels[i].label_valid) {
        ++local.skipped_invalid;
        continue;
      }
      Sample s;
      s.t_end = seg.rows[i].timestamp;
      s.label_idx = static_cast<std::uint8_t>(label_to_index(seg.labels[i].label));
      s.window.resize(static_cast<std::size_t>(window) * kFeatureDim);
      for (int t = 0; t < window; ++t) {
        auto vals = seg.rows[i + 1 - static_cast<std::size_t>(window) + static_cast<std::size_t>(t)].values();
        for (int j = 0; j < kFeatureDim; ++j)
          s.window[static_cast<std::size_t>(t) * kFeatureDim + static_cast<std::size_t>(j)] =
              static_cast<float>(vals[j]);
      }
      out.samples.push_back(std::move(s));
      ++local.emitted;
    }
  }
  if (stats) *stats = local;
  return out;
}

void normalize_window(double* window, int rows, int cols, double sigma_floor) {
  for (int j = 0; j < cols; ++j) {
    double mean = 0.0;
    for (int t = 0; t < rows; ++t) mean += window[t * cols + j];
    mean /= rows;
    double var = 0.0;
    for (int t = 0; t < rows; ++t) {
      double d = window[t * cols + j] - mean;
      var += d * d;
    }
    double sigma = std::sqrt(var / rows);  // population form
    if (sigma < sigma_floor) {
      for (int t = 0; t < rows; ++t) window[t * cols + j] = 0.0;
    } else {
      for (int t = 0; t < rows; ++t) window[t * cols + j] = (window[t * cols + j] - mean) / sigma;
    }
  }
}

std::vector<double> normalized_window(const Sample& s, int rows, int cols) {
  std::vector<double> w(s.window.begin(), s.window.end());
  normalize_window(w.data(), rows, cols);
  return w;
}

SplitIndex chronological_split(const SampleSet& samples) {
  const std::size_t n = samples.samples.size();
  if (n < 10) throw PipelineError("chronological split needs at least 10 samples, got " + std::to_string(n));
  std::size_t n_val = n / 10;
  std::size_t n_test = n / 10;
  std::size_t n_train = n - n_val - n_test;  // remainder goes to train
  SplitIndex idx;
  idx.train_begin = 0;
  idx.train_end = n_train;
  idx.val_begin = n_train;
  idx.val_end = n_train + n_val;
  idx.test_begin = n_train + n_val;
  idx.test_end = n;
  return idx;
}

std::vector<std::size_t> undersample_epoch(const SampleSet& train, std::uint64_t seed, int epoch,
                                           RusMode mode, std::vector<std::string>* warnings) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < train.samples.size(); ++i)
    by_class[train.samples[i].label_idx].push_back(i);

  if (warnings) {
    static const char* names[kNumClasses] = {"-1", "0", "+1"};
    for (int c = 0; c < kNumClasses; ++c)
      if (by_class[c].empty())
        warnings->push_back(std::string("undersample: class ") + names[c] + " has zero samples");
  }

  const std::size_t n_minor = by_class[0].size() + by_class[2].size();
  std::size_t keep0;
  if (mode == RusMode::kBalance) {
    keep0 = (n_minor + 1) / 2;  // ceil of the minority mean
  } else {
    keep0 = by_class[1].size() - by_class[1].size() / 8;  // drop 1/8, keep the rest
  }
  keep0 = std::min(keep0, by_class[1].size());

  Rng rng(derive_seed(seed, /*tag=*/0x5553414DULL, static_cast<std::uint64_t>(epoch)));

  // Partial Fisher-Yates draw of keep0 class-0 indices without replacement.
  std::vector<std::size_t>& zeros = by_class[1];
  for (std::size_t i = 0; i < keep0; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(zeros.size() - i));
    std::swap(zeros[i], zeros[j]);
  }

  std::vector<std::size_t> out;
  out.reserve(by_class[0].size() + keep0 + by_class[2].size());
  out.insert(out.end(), by_class[0].begin(), by_class[0].end());
  out.insert(out.end(), zeros.begin(), zeros.begin() + static_cast<std::ptrdiff_t>(keep0));
  out.insert(out.end(), by_class[2].begin(), by_class[2].end());

  // Shuffle the combined epoch.
  for (std::size_t i = out.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
    std::swap(out[i - 1], out[j]);
  }
  return out;
}

void save_samples(const std::string& path, const SampleSet& set) {
  BinWriter w(path);
  w.magic("TPDS");
  w.u32(1);  // version
  w.u64(set.samples.size());
  w.u32(static_cast<std::uint32_t>(set.window));
  w.u32(static_cast<std::uint32_t>(set.feat_dim));
  w.u8(static_cast<std::uint8_t>(-1 & 0xff));  // label map: index 0 -> -1
  w.u8(0);                                     // index 1 -> 0
  w.u8(1);                                     // index 2 -> +1
  w.u8(0);                                     // pad
  for (const auto& s : set.samples) {
    w.i64(s.t_end);
    w.u8(s.label_idx);
    w.f32_array(s.window.data(), s.window.size());
  }
  w.close();
}

SampleSet load_samples(const std::string& path) {
  BinReader r(path);
  r.expect_magic("TPDS", "sample container");
  std::uint32_t version = r.u32();
  if (version != 1) throw PipelineError(path + ": unsupported container version " + std::to_string(version));
  SampleSet set;
  std::uint64_t n = r.u64();
  set.window = static_cast<int>(r.u32());
  set.feat_dim = static_cast<int>(r.u32());
  if (set.window <= 0 || set.feat_dim != kFeatureDim)
    throw PipelineError(path + ": unexpected window/feature dimensions");
  r.u8();
  r.u8();
  r.u8();
  r.u8();
  set.samples.resize(n);
  const std::size_t wlen = static_cast<std::size_t>(set.window) * static_cast<std::size_t>(set.feat_dim);
  for (auto& s : set.samples) {
    s.t_end = r.i64();
    s.label_idx = r.u8();
    if (s.label_idx >= kNumClasses) throw PipelineError(path + ": bad label index");
    s.window.resize(wlen);
    r.f32_array(s.window.data(), wlen);
  }
  return set;
}

}  // namespace tickpred
