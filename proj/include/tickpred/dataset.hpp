#pragma once

// Rolling 60x13 sample assembly, per-sample normalization, chronological
// 8:1:1 split, per-epoch random undersampling, and the binary container.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tickpred/common.hpp"
#include "tickpred/features.hpp"

namespace tickpred {

/// One training sample: a 60x13 window (row-major, oldest timestep first),
/// stored as float32 to match the container format. label_idx is the class
/// index (0 <-> -1, 1 <-> 0, 2 <-> +1).
struct Sample {
  std::int64_t t_end = 0;
  std::uint8_t label_idx = 1;
  std::vector<float> window;  // kWindowLen * kFeatureDim values
};

struct SampleSet {
  int window = kWindowLen;
  int feat_dim = kFeatureDim;
  std::vector<Sample> samples;

  std::array<std::size_t, kNumClasses> class_counts() const;
};

struct AssembleStats {
  std::size_t emitted = 0;
  std::size_t skipped_invalid = 0;  // endpoints skipped for any validity reason
};

/// One sample per endpoint whose 60-row window lies inside a single segment,
/// touches only valid rows, and has a valid label. Stride 1.
SampleSet assemble_samples(const FeatureSeries& series, int window, AssembleStats* stats = nullptr);

/// Per-feature window z-score (population std, divisor = window length).
/// Columns with std below `sigma_floor` are zeroed.
void normalize_window(double* window, int rows, int cols, double sigma_floor = 1e-8);

/// Convenience: normalized copy of a sample's window, widened to double.
std::vector<double> normalized_window(const Sample& s, int rows, int cols);

struct SplitIndex {
  std::size_t train_begin = 0, train_end = 0;
  std::size_t val_begin = 0, val_end = 0;
  std::size_t test_begin = 0, test_end = 0;
};

/// Chronological 8:1:1 by count; rounding remainder goes to train.
/// Throws for fewer than 10 samples.
SplitIndex chronological_split(const SampleSet& samples);

enum class RusMode {
  kBalance,  // keep class 0 at ceil(mean of the minority counts)
  kLiteral,  // the paper's literal wording: drop 1/8 of class 0 (keep 7/8)
};

/// Per-epoch undersampled index list: minority classes fully included,
/// class 0 subsampled without replacement, output shuffled. Deterministic in
/// (seed, epoch). Classes with zero samples produce a warning string.
std::vector<std::size_t> undersample_epoch(const SampleSet& train, std::uint64_t seed, int epoch,
                                           RusMode mode = RusMode::kBalance,
                                           std::vector<std::string>* warnings = nullptr);

// Binary container ("TPDS"): see README for the byte layout.
void save_samples(const std::string& path, const SampleSet& set);
SampleSet load_samples(const std::string& path);

}  // namespace tickpred
