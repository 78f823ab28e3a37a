#include "tickpred/features.hpp"

#include <cmath>

namespace tickpred {

std::array<double, kFeatureDim> FeatureRow::values() const {
  std::array<double, kFeatureDim> v;
  v[0] = mid_price;
  for (int i = 0; i < 5; ++i) v[1 + i] = diff_bid_price[i];
  for (int i = 0; i < 5; ++i) v[6 + i] = diff_ask_price[i];
  v[11] = diff_last_price;
  v[12] = log_volume;
  return v;
}

FeatureRow compute_features(const GridRow& row) {
  FeatureRow f;
  f.timestamp = row.rec.timestamp;
  if (!row.valid || row.crossed || row.rec.bid_price[0] <= 0.0 || row.rec.ask_price[0] <= 0.0) {
    f.valid = false;
    return f;
  }
  const TickRecord& r = row.rec;
  f.mid_price = (r.bid_price[0] + r.ask_price[0]) / 2.0;
  for (int i = 0; i < 5; ++i) {
    f.diff_bid_price[i] = r.bid_price[i] - f.mid_price;
    f.diff_ask_price[i] = r.ask_price[i] - f.mid_price;
  }
  f.diff_last_price = r.last_price - f.mid_price;
  f.log_volume = r.volume > 0.0 ? std::log(r.volume) : 0.0;
  return f;
}

bool compute_return(const std::vector<double>& mid_series, std::size_t t, int horizon,
                    double& out) {
  std::size_t end = t + static_cast<std::size_t>(horizon);
  if (horizon <= 0 || end >= mid_series.size()) return false;
  double base = mid_series[t];
  if (base <= 0.0) return false;
  out = (mid_series[end] - base) / base;
  return true;
}

int label_return(double forward_return, double fee) {
  if (forward_return > fee) return 1;
  if (forward_return < -fee) return -1;
  return 0;
}

FeatureSeries featurize(const TickSeries& ticks, double fee, int horizon, int warmup_len) {
  auto warmup = mark_warmup(ticks, warmup_len);
  FeatureSeries out;
  out.segments.reserve(ticks.segments.size());
  for (std::size_t s = 0; s < ticks.segments.size(); ++s) {
    const Segment& seg = ticks.segments[s];
    FeatureSegment fseg;
    fseg.schedule_window = seg.schedule_window;
    fseg.day = seg.day;
    fseg.rows.reserve(seg.rows.size());

    std::vector<double> mids(seg.rows.size(), 0.0);
    for (std::size_t i = 0; i < seg.rows.size(); ++i) {
      FeatureRow f = compute_features(seg.rows[i]);
      mids[i] = f.mid_price;
      fseg.rows.push_back(f);
    }

    fseg.labels.resize(seg.rows.size());
    for (std::size_t i = 0; i < seg.rows.size(); ++i) {
      LabeledPoint& lp = fseg.labels[i];
      lp.timestamp = seg.rows[i].rec.timestamp;
      double r = 0.0;
      bool ok = warmup[s][i] != 0 && fseg.rows[i].valid && compute_return(mids, i, horizon, r);
      if (ok) {
        std::size_t end = i + static_cast<std::size_t>(horizon);
        ok = fseg.rows[end].valid;
      }
      if (ok) {
        lp.forward_return = r;
        lp.label = label_return(r, fee);
        lp.label_valid = true;
      }
    }
    out.segments.push_back(std::move(fseg));
  }
  return out;
}

}  // namespace tickpred
