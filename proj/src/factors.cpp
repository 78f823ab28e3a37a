#include "tickpred/factors.hpp"

#include <cmath>

namespace tickpred {

namespace {
constexpr int kMomentWindow = 60;   // 30 s at 0.5 s
constexpr int kLongWindow = 600;    // 5 min
}  // namespace

const std::array<std::string, kNumFactors>& factor_names() {
  static const std::array<std::string, kNumFactors> names = {
      "mid_price_mean", "mid_price_std", "mid_price_skew", "mid_price_kurt",
      "volume_pct",     "prop_quoted_spread", "beta",       "illiquidity"};
  return names;
}

double FactorRow::value(int i) const {
  switch (i) {
    case 0: return mid_price_mean;
    case 1: return mid_price_std;
    case 2: return mid_price_skew;
    case 3: return mid_price_kurt;
    case 4: return volume_pct;
    case 5: return prop_quoted_spread;
    case 6: return beta;
    case 7: return illiquidity;
  }
  throw PipelineError("factor index out of range");
}

std::optional<FactorRow> compute_factors(const Segment& seg, const std::vector<double>& mids,
                                         std::size_t t) {
  // Needs the 5-minute volume window and one extra point for returns.
  if (t < static_cast<std::size_t>(kLongWindow) || t >= seg.rows.size()) return std::nullopt;
  for (std::size_t k = t - kLongWindow; k <= t; ++k)
    if (!seg.rows[k].valid || seg.rows[k].crossed) return std::nullopt;

  FactorRow out;
  out.timestamp = seg.rows[t].rec.timestamp;
  out.valid.fill(true);

  // Moments over the trailing 60 mids (window [t-59, t]).
  const std::size_t m0 = t - (kMomentWindow - 1);
  double mean = 0.0;
  for (std::size_t k = m0; k <= t; ++k) mean += mids[k];
  mean /= kMomentWindow;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, ss = 0.0;
  for (std::size_t k = m0; k <= t; ++k) {
    const double d = mids[k] - mean;
    const double d2 = d * d;
    ss += d2;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= kMomentWindow;
  m3 /= kMomentWindow;
  m4 /= kMomentWindow;
  out.mid_price_mean = mean;
  out.mid_price_std = std::sqrt(ss / (kMomentWindow - 1));  // sample std
  if (m2 > 0.0) {
    out.mid_price_skew = m3 / std::pow(m2, 1.5);
    out.mid_price_kurt = m4 / (m2 * m2) - 3.0;
  } else {
    out.valid[2] = out.valid[3] = false;
  }

  // Volume sums.
  double vol_short = 0.0, vol_long = 0.0;
  for (std::size_t k = m0; k <= t; ++k) vol_short += seg.rows[k].rec.volume;
  for (std::size_t k = t - (kLongWindow - 1); k <= t; ++k) vol_long += seg.rows[k].rec.volume;
  if (vol_long > 0.0) {
    out.volume_pct = vol_short / vol_long;
  } else {
    out.valid[4] = false;
  }

  const TickRecord& rec = seg.rows[t].rec;
  const double mid = mids[t];
  out.prop_quoted_spread = (rec.ask_price[0] - rec.bid_price[0]) / mid;

  // OLS slope of per-step returns on per-step volume over the past 60 steps:
  // observations k in [t-59, t], r_k = mid_k / mid_{k-1} - 1, v_k = volume_k.
  double rv_mean = 0.0, v_mean = 0.0;
  std::array<double, kMomentWindow> rs, vs;
  for (int j = 0; j < kMomentWindow; ++j) {
    const std::size_t k = m0 + static_cast<std::size_t>(j);
    rs[j] = (mids[k] - mids[k - 1]) / mids[k - 1];
    vs[j] = seg.rows[k].rec.volume;
    rv_mean += rs[j];
    v_mean += vs[j];
  }
  rv_mean /= kMomentWindow;
  v_mean /= kMomentWindow;
  double cov = 0.0, var_v = 0.0;
  for (int j = 0; j < kMomentWindow; ++j) {
    cov += (rs[j] - rv_mean) * (vs[j] - v_mean);
    var_v += (vs[j] - v_mean) * (vs[j] - v_mean);
  }
  if (var_v > 0.0) {
    out.beta = cov / var_v;
  } else {
    out.valid[6] = false;
  }

  // Amihud-style: |30 s return| / 30 s volume.
  const double ret30 = (mids[t] - mids[m0 - 1]) / mids[m0 - 1];
  if (vol_short > 0.0) {
    out.illiquidity = std::fabs(ret30) / vol_short;
  } else {
    out.valid[7] = false;
  }

  return out;
}

FactorSeries compute_factor_series(const TickSeries& ticks) {
  FactorSeries out;
  for (const auto& seg : ticks.segments) {
    std::vector<double> mids(seg.rows.size(), 0.0);
    for (std::size_t i = 0; i < seg.rows.size(); ++i) {
      const auto& r = seg.rows[i].rec;
      mids[i] = (r.bid_price[0] + r.ask_price[0]) / 2.0;
    }
    for (std::size_t t = 0; t < seg.rows.size(); ++t) {
      auto row = compute_factors(seg, mids, t);
      if (row) out.rows.push_back(*row);
    }
  }
  return out;
}

AccumulatedFactor accumulate_factor_return(const std::vector<std::int64_t>& timestamps,
                                           const std::vector<double>& factor,
                                           const std::vector<std::uint8_t>& factor_valid,
                                           const std::vector<double>& forward_return,
                                           const std::vector<std::uint8_t>& return_valid) {
  const std::size_t n = timestamps.size();
  if (factor.size() != n || factor_valid.size() != n || forward_return.size() != n ||
      return_valid.size() != n)
    throw PipelineError("accumulate_factor_return: input series are not aligned");

  // Full-span z-score over the jointly valid points.
  double mean = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (factor_valid[i] && return_valid[i]) {
      mean += factor[i];
      ++m;
    }
  AccumulatedFactor out;
  if (m == 0) return out;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (factor_valid[i] && return_valid[i]) {
      const double d = factor[i] - mean;
      var += d * d;
    }
  const double sigma = std::sqrt(var / static_cast<double>(m));

  double acc = 0.0;
  out.timestamps.reserve(m);
  out.cumsum.reserve(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (!factor_valid[i] || !return_valid[i]) continue;
    const double z = sigma > 0.0 ? (factor[i] - mean) / sigma : 0.0;
    acc += z * forward_return[i];
    out.timestamps.push_back(timestamps[i]);
    out.cumsum.push_back(acc);
  }
  return out;
}

}  // namespace tickpred
