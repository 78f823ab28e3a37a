#include "tickpred/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tickpred/csv.hpp"

namespace tickpred {

namespace {

constexpr std::int64_t kMsPerMin = 60'000;
constexpr std::int64_t kMsPerDay = 86'400'000;
constexpr std::int64_t kBaseDay = 19482;  // 2023-05-05; night sessions land on the 4th

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

SynthConfig SynthConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open synth config: " + path);
  SynthConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw PipelineError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    try {
      if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "days") cfg.days = std::stoi(val);
      else if (key == "sessions") cfg.sessions = SessionSchedule::parse(val);
      else if (key == "mid0") cfg.mid0 = std::stod(val);
      else if (key == "tick") cfg.tick = std::stod(val);
      else if (key == "signal") cfg.signal = std::stod(val);
      else if (key == "fee") cfg.fee = std::stod(val);
      else if (key == "horizon") cfg.horizon = std::stoi(val);
      else if (key == "instrument") cfg.instrument = val;
      else if (key == "move_prob") cfg.move_prob = std::stod(val);
      else if (key == "jump_geom") cfg.jump_geom = std::stod(val);
      else if (key == "spread_change_prob") cfg.spread_change_prob = std::stod(val);
      else if (key == "noise_rho") cfg.noise_rho = std::stod(val);
      else if (key == "noise_scale") cfg.noise_scale = std::stod(val);
      else if (key == "cap_scale") cfg.cap_scale = std::stod(val);
      else if (key == "volume_imbalance") cfg.volume_imbalance = std::stod(val);
      else if (key == "side_bias") cfg.side_bias = std::stod(val);
      else if (key == "size_gain") cfg.size_gain = std::stod(val);
      else if (key == "trade_prob") cfg.trade_prob = std::stod(val);
      else if (key == "depth_base") cfg.depth_base = std::stod(val);
      else if (key == "ratio") {
        if (std::sscanf(val.c_str(), "%lf,%lf,%lf", &cfg.ratio[0], &cfg.ratio[1], &cfg.ratio[2]) != 3)
          throw PipelineError("want three comma-separated shares");
      } else {
        throw PipelineError("unknown key \"" + key + "\"");
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(path + ":" + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  return cfg;
}

void SynthConfig::validate() const {
  if (days < 1) throw PipelineError("synth: days must be >= 1");
  if (signal < 0.0 || signal > 1.0) throw PipelineError("synth: signal must be in [0, 1]");
  if (mid0 <= 0.0 || tick <= 0.0) throw PipelineError("synth: mid0 and tick must be positive");
  double rs = ratio[0] + ratio[1] + ratio[2];
  if (std::fabs(rs - 1.0) > 1e-9 || ratio[0] < 0 || ratio[1] <= 0 || ratio[2] < 0)
    throw PipelineError("synth: ratio must be three non-negative shares summing to 1");
  if (horizon < 1) throw PipelineError("synth: horizon must be >= 1");
  if (trade_prob < 0.0 || trade_prob > 1.0) throw PipelineError("synth: trade_prob must be in [0, 1]");
}

namespace {

struct Occurrence {
  std::int64_t start_ms = 0;
  std::int64_t n_slots = 0;
};

// Chronological session occurrences over the configured trading days.
// Windows starting at or after 18:00 belong to the evening before their
// trading day.
std::vector<Occurrence> build_occurrences(const SynthConfig& cfg) {
  std::vector<Occurrence> occ;
  for (int d = 0; d < cfg.days; ++d) {
    for (const auto& w : cfg.sessions.windows) {
      std::int64_t day = kBaseDay + d - (w.start_min >= 18 * 60 ? 1 : 0);
      Occurrence o;
      o.start_ms = day * kMsPerDay + static_cast<std::int64_t>(w.start_min) * kMsPerMin;
      o.n_slots = static_cast<std::int64_t>(w.dur_min) * kMsPerMin / kGridStepMs;
      occ.push_back(o);
    }
  }
  std::sort(occ.begin(), occ.end(),
            [](const Occurrence& a, const Occurrence& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 1; i < occ.size(); ++i) {
    if (occ[i].start_ms < occ[i - 1].start_ms + occ[i - 1].n_slots * kGridStepMs)
      throw PipelineError("synth: session windows overlap");
  }
  return occ;
}

double quantile_inplace(std::vector<double>& v, double q) {
  if (v.empty()) throw PipelineError("synth: no labeled points to calibrate the fee on");
  std::size_t k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

SynthReport generate_ticks(const SynthConfig& cfg, const std::string& out_csv) {
  cfg.validate();
  auto occ = build_occurrences(cfg);

  std::size_t total_slots = 0;
  for (const auto& o : occ) total_slots += static_cast<std::size_t>(o.n_slots);

  Rng rng(derive_seed(cfg.seed, /*tag=*/0x53594E54ULL));

  // Pass 1: mid-price path (bid ticks + spread), martingale by construction.
  std::vector<std::int64_t> bid_ticks(total_slots);
  std::vector<int> spreads(total_slots);
  std::vector<double> noise(total_slots);  // AR(1) encoding noise, sigma ~ 1

  std::int64_t bid = static_cast<std::int64_t>(std::llround(cfg.mid0 / cfg.tick)) - 1;
  int spread = 2;
  double nu = 0.0;
  const double rho = cfg.noise_rho;
  const double nu_innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::size_t t = 0; t < total_slots; ++t) {
    if (rng.bernoulli(cfg.move_prob)) {
      int size = 1;
      while (rng.uniform() > cfg.jump_geom && size < 50) ++size;
      bid += rng.bernoulli(0.5) ? size : -size;
      if (bid < 100) bid = 200 - bid;  // reflect; keeps prices positive
    }
    if (rng.bernoulli(cfg.spread_change_prob)) {
      double u = rng.uniform();
      spread = u < 0.6 ? 1 : (u < 0.9 ? 2 : 3);
    }
    nu = rho * nu + nu_innov * rng.normal();
    bid_ticks[t] = bid;
    spreads[t] = spread;
    noise[t] = nu;
  }

  // Per-slot mid prices and future moves within each occurrence.
  std::vector<double> mids(total_slots);
  for (std::size_t t = 0; t < total_slots; ++t)
    mids[t] = (static_cast<double>(bid_ticks[t]) + spreads[t] * 0.5) * cfg.tick;

  std::vector<double> future_move(total_slots, 0.0);  // price units
  std::vector<std::uint8_t> has_future(total_slots, 0);
  {
    std::size_t base = 0;
    for (const auto& o : occ) {
      const std::size_t n = static_cast<std::size_t>(o.n_slots);
      for (std::size_t i = 0; i + static_cast<std::size_t>(cfg.horizon) < n; ++i) {
        future_move[base + i] = mids[base + i + cfg.horizon] - mids[base + i];
        has_future[base + i] = 1;
      }
      base += n;
    }
  }

  // Scale of the future move, for the encoding saturation.
  double sigma_d = 0.0;
  {
    double ss = 0.0;
    std::size_t m = 0;
    for (std::size_t t = 0; t < total_slots; ++t)
      if (has_future[t]) {
        ss += future_move[t] * future_move[t];
        ++m;
      }
    sigma_d = m > 0 ? std::sqrt(ss / static_cast<double>(m)) : 1.0;
    if (sigma_d <= 0.0) sigma_d = 1.0;
  }

  // Fee calibration over label-eligible endpoints (warm-up and horizon valid).
  SynthReport report;
  {
    std::vector<double> abs_R;
    std::size_t base = 0;
    for (const auto& o : occ) {
      const std::size_t n = static_cast<std::size_t>(o.n_slots);
      for (std::size_t i = static_cast<std::size_t>(cfg.horizon); i + static_cast<std::size_t>(cfg.horizon) < n; ++i)
        abs_R.push_back(std::fabs(future_move[base + i] / mids[base + i]));
      base += n;
    }
    report.labeled_points = abs_R.size();
    double fee;
    if (cfg.fee > 0.0) {
      fee = cfg.fee;
    } else {
      std::vector<double> tmp = abs_R;
      fee = quantile_inplace(tmp, cfg.ratio[1]);
    }
    std::size_t zeros = 0;
    for (double r : abs_R) zeros += (r <= fee) ? 1 : 0;
    double zero_share = abs_R.empty() ? 0.0 : static_cast<double>(zeros) / static_cast<double>(abs_R.size());
    if (cfg.fee > 0.0 && std::fabs(zero_share - cfg.ratio[1]) > 0.05) {
      std::vector<double> lo = abs_R, hi = abs_R;
      double fee_lo = quantile_inplace(lo, std::max(0.0, cfg.ratio[1] - 0.02));
      double fee_hi = quantile_inplace(hi, std::min(1.0, cfg.ratio[1] + 0.02));
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "synth: fee %.6g gives class-0 share %.3f (target %.3f); achievable fee range "
                    "[%.6g, %.6g]",
                    cfg.fee, zero_share, cfg.ratio[1], fee_lo, fee_hi);
      throw PipelineError(buf);
    }
    report.fee = fee;
  }

  // Pass 2: books, trades, CSV emission.
  CsvWriter csv(out_csv, tick_csv_header());

  double last_price = static_cast<double>(bid_ticks[0]) * cfg.tick;
  double cum_amount = 0.0;
  double cum_volume = 0.0;
  std::int64_t prev_trading_day = -1;

  std::array<std::int64_t, kNumClasses> label_counts{};
  std::size_t slot = 0;
  for (const auto& o : occ) {
    // cumulative fields reset at the first session of each trading day
    std::int64_t trading_day = (o.start_ms / kMsPerDay) +
                               (((o.start_ms % kMsPerDay) / kMsPerMin) >= 18 * 60 ? 1 : 0);
    if (trading_day != prev_trading_day) {
      cum_amount = 0.0;
      cum_volume = 0.0;
      prev_trading_day = trading_day;
    }
    for (std::int64_t i = 0; i < o.n_slots; ++i, ++slot) {
      const std::int64_t ts = o.start_ms + i * kGridStepMs;
      const double bid1 = static_cast<double>(bid_ticks[slot]) * cfg.tick;
      const double ask1 = bid1 + spreads[slot] * cfg.tick;

      // Saturated, noised encoding of the future move.
      const double cap = cfg.cap_scale * sigma_d;
      double e = (future_move[slot] + cfg.noise_scale * sigma_d * noise[slot]) / cap;
      e = std::clamp(e, -1.0, 1.0);

      // Trade fields.
      double volume = 0.0;
      if (rng.bernoulli(cfg.trade_prob)) {
        double p_ask = std::clamp(0.5 * (1.0 + cfg.side_bias * cfg.signal * e), 0.02, 0.98);
        bool at_ask = rng.bernoulli(p_ask);
        last_price = at_ask ? ask1 : bid1;
        double u = rng.uniform();
        if (u < 1e-12) u = 1e-12;
        double size = -std::log(u) * 3.0 * (1.0 + cfg.size_gain * cfg.signal * std::fabs(e));
        volume = std::min(500.0, std::floor(size) + 1.0);
      }
      cum_volume += volume;
      cum_amount += volume * last_price;

      csv.begin_row();
      csv.add_int(ts);
      csv.add_fixed(last_price, 4);
      csv.add_fixed(volume, 4);
      csv.add_fixed(cum_amount, 4);
      csv.add_fixed(cum_volume, 4);

      // Level prices: dense ladders off the best quotes.
      for (int lvl = 0; lvl < 5; ++lvl) csv.add_fixed(bid1 - lvl * cfg.tick, 4);
      // Level volumes carry the imbalance channel (invisible to the 13
      // features, which use price diffs only).
      for (int lvl = 0; lvl < 5; ++lvl) {
        double base_v = cfg.depth_base * (1.0 + 0.6 * rng.uniform()) * std::pow(0.85, lvl);
        double v = base_v * (1.0 + cfg.volume_imbalance * cfg.signal * e);
        csv.add_fixed(std::max(1.0, std::floor(v)), 4);
      }
      for (int lvl = 0; lvl < 5; ++lvl) csv.add_fixed(ask1 + lvl * cfg.tick, 4);
      for (int lvl = 0; lvl < 5; ++lvl) {
        double base_v = cfg.depth_base * (1.0 + 0.6 * rng.uniform()) * std::pow(0.85, lvl);
        double v = base_v * (1.0 - cfg.volume_imbalance * cfg.signal * e);
        csv.add_fixed(std::max(1.0, std::floor(v)), 4);
      }
      csv.end_row();
    }
  }
  csv.close();

  // Achieved label shares at the final fee.
  {
    std::size_t base = 0;
    for (const auto& o : occ) {
      const std::size_t n = static_cast<std::size_t>(o.n_slots);
      for (std::size_t i = static_cast<std::size_t>(cfg.horizon); i + static_cast<std::size_t>(cfg.horizon) < n; ++i) {
        double r = future_move[base + i] / mids[base + i];
        int lbl = r > report.fee ? 1 : (r < -report.fee ? -1 : 0);
        label_counts[static_cast<std::size_t>(lbl + 1)]++;
      }
      base += n;
    }
  }
  report.label_counts = label_counts;
  std::int64_t total_labeled = label_counts[0] + label_counts[1] + label_counts[2];
  for (int c = 0; c < kNumClasses; ++c)
    report.achieved_shares[c] =
        total_labeled > 0 ? static_cast<double>(label_counts[c]) / static_cast<double>(total_labeled) : 0.0;
  report.rows = total_slots;
  return report;
}

}  // namespace tickpred
