#pragma once

// Synthetic L5 tick stream generator with a controllable predictive signal
// and label-imbalance target. The mid price is a pure random walk (so the
// price path itself carries no forward information); the future 59-step move
// is encoded, saturated and noised, into book-volume imbalance and trade-side
// prints with strength s in [0, 1].

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tickpred/common.hpp"
#include "tickpred/tick.hpp"

namespace tickpred {

struct SynthConfig {
  std::uint64_t seed = 1;
  int days = 1;
  SessionSchedule sessions = SessionSchedule::defaults();
  double mid0 = 5000.0;       // initial mid, price units
  double tick = 1.0;          // price units per tick
  double signal = 1.0;        // s in [0, 1]
  std::array<double, kNumClasses> ratio = {0.1, 0.8, 0.1};  // target shares (-1, 0, +1)
  double fee = 0.0;           // 0 => calibrate from ratio
  int horizon = kDefaultHorizon;
  std::string instrument = "SYNTH";

  // mid-price walk
  double move_prob = 0.55;        // P(mid moves in a step)
  double jump_geom = 0.35;        // move size = 1 + Geometric(jump_geom) ticks
  double spread_change_prob = 0.08;

  // signal encoding
  double noise_rho = 0.9917;   // AR(1) persistence of the encoding noise
  double noise_scale = 1.0;    // sigma_noise / sigma_D
  double cap_scale = 2.0;      // encoding saturates at cap_scale * sigma_D
  double volume_imbalance = 0.6;
  double side_bias = 0.9;      // trade-side print gain
  double size_gain = 0.4;      // trade-size modulation by |signal|
  double trade_prob = 0.85;
  double depth_base = 25.0;    // mean level-volume scale

  static SynthConfig from_file(const std::string& path);
  void validate() const;
};

struct SynthReport {
  double fee = 0.0;  // calibrated (or echoed) fee, return units
  std::array<double, kNumClasses> achieved_shares{};
  std::array<std::int64_t, kNumClasses> label_counts{};
  std::size_t rows = 0;
  std::size_t labeled_points = 0;
};

/// Generate the stream and write it as a canonical tick CSV.
SynthReport generate_ticks(const SynthConfig& cfg, const std::string& out_csv);

}  // namespace tickpred
