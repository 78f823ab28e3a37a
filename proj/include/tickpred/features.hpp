#pragma once

// The 13 per-timestamp variables, the forward return over the prediction
// horizon, and the fee-thresholded 3-class label.

#include <array>
#include <cstdint>
#include <vector>

#include "tickpred/common.hpp"
#include "tickpred/tick.hpp"

namespace tickpred {

/// 13 feature values for one grid point. Order (and the sample column order):
/// midPrice, diffBidPrice1..5, diffAskPrice1..5, diffLastPrice, logVolume.
struct FeatureRow {
  std::int64_t timestamp = 0;
  double mid_price = 0.0;
  std::array<double, 5> diff_bid_price{};
  std::array<double, 5> diff_ask_price{};
  double diff_last_price = 0.0;
  double log_volume = 0.0;
  bool valid = true;  // false for fill-invalid, crossed, or bad level-1 rows

  std::array<double, kFeatureDim> values() const;
};

struct LabeledPoint {
  std::int64_t timestamp = 0;
  double forward_return = 0.0;
  int label = 0;  // in {-1, 0, +1}
  bool label_valid = false;
};

/// Eq.-style per-record construction. Rows with non-positive level-1 prices,
/// crossed books, or fill-invalid slots come back with valid=false.
FeatureRow compute_features(const GridRow& row);

/// Forward return of the window ending at t: (mid[t+h] - mid[t]) / mid[t].
/// Returns false (label invalid) when t+h is outside the series.
bool compute_return(const std::vector<double>& mid_series, std::size_t t, int horizon,
                    double& out);

/// Fee-thresholded 3-class label: +1 if r > fee, -1 if r < -fee, else 0.
int label_return(double forward_return, double fee);

/// Map a label in {-1,0,+1} to the class index {0,1,2} and back.
inline int label_to_index(int label) { return label + 1; }
inline int index_to_label(int idx) { return idx - 1; }

struct FeatureSegment {
  int schedule_window = 0;
  std::int64_t day = 0;
  std::vector<FeatureRow> rows;
  std::vector<LabeledPoint> labels;  // aligned with rows
};

struct FeatureSeries {
  std::vector<FeatureSegment> segments;
};

/// Full per-segment featurization: features, forward returns over `horizon`,
/// labels at `fee`, with warm-up and horizon validity folded into label_valid.
FeatureSeries featurize(const TickSeries& ticks, double fee, int horizon, int warmup_len);

}  // namespace tickpred
