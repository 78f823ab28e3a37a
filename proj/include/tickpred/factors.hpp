#pragma once

// The 8 diagnostic factors and the accumulated factor-times-return series.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tickpred/common.hpp"
#include "tickpred/features.hpp"
#include "tickpred/tick.hpp"

namespace tickpred {

inline constexpr int kNumFactors = 8;

/// Factor column order for files and the accumulation stage.
const std::array<std::string, kNumFactors>& factor_names();

struct FactorRow {
  std::int64_t timestamp = 0;
  // moments of midPrice over the past 60 grid points (30 s)
  double mid_price_mean = 0.0;
  double mid_price_std = 0.0;
  double mid_price_skew = 0.0;
  double mid_price_kurt = 0.0;  // excess kurtosis
  double volume_pct = 0.0;      // 30 s volume / 5 min volume
  double prop_quoted_spread = 0.0;
  double beta = 0.0;         // OLS slope of per-step returns on volume, 60 steps
  double illiquidity = 0.0;  // |30 s return| / 30 s volume
  std::array<bool, kNumFactors> valid{};  // per-factor validity

  double value(int i) const;
};

/// Factors at index t of one segment. Requires >= 600 points of history
/// inside the segment (rows [t-600, t] all present); returns nullopt below
/// that. Degenerate inputs (zero volume, zero variance) invalidate only the
/// affected factors.
std::optional<FactorRow> compute_factors(const Segment& seg, const std::vector<double>& mids,
                                         std::size_t t);

struct FactorSeries {
  std::vector<FactorRow> rows;  // concatenated over segments, time-ordered
};

FactorSeries compute_factor_series(const TickSeries& ticks);

/// Cumulative sum of (full-span z-scored factor) x (forward return) over the
/// points where both are valid. Returns one (timestamp, cumsum) series.
struct AccumulatedFactor {
  std::vector<std::int64_t> timestamps;
  std::vector<double> cumsum;
};

AccumulatedFactor accumulate_factor_return(const std::vector<std::int64_t>& timestamps,
                                           const std::vector<double>& factor,
                                           const std::vector<std::uint8_t>& factor_valid,
                                           const std::vector<double>& forward_return,
                                           const std::vector<std::uint8_t>& return_valid);

}  // namespace tickpred
