#include "tickpred/tick.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>

#include "tickpred/csv.hpp"

namespace tickpred {

namespace {
constexpr std::int64_t kMsPerMin = 60'000;
constexpr std::int64_t kMsPerDay = 86'400'000;
}  // namespace

bool book_is_sane(const TickRecord& r) {
  if (!(r.bid_price[0] < r.ask_price[0])) return false;
  for (int i = 0; i < 4; ++i) {
    if (!(r.bid_price[i] > r.bid_price[i + 1])) return false;
    if (!(r.ask_price[i] < r.ask_price[i + 1])) return false;
  }
  return r.bid_price[4] > 0.0;
}

SessionSchedule SessionSchedule::defaults() {
  return SessionSchedule{{{23 * 60, 120}, {9 * 60, 75}, {10 * 60 + 30, 60}, {13 * 60 + 30, 90}}};
}

SessionSchedule SessionSchedule::parse(const std::string& spec) {
  SessionSchedule out;
  std::size_t start = 0;
  while (start < spec.size()) {
    std::size_t end = spec.find(';', start);
    if (end == std::string::npos) end = spec.size();
    std::string part = spec.substr(start, end - start);
    int h = 0, m = 0, dur = 0;
    if (std::sscanf(part.c_str(), "%d:%d+%d", &h, &m, &dur) != 3 || h < 0 || h > 23 ||
        m < 0 || m > 59 || dur <= 0 || dur > 1440) {
      throw PipelineError("bad session window \"" + part + "\" (want HH:MM+minutes)");
    }
    out.windows.push_back({h * 60 + m, dur});
    start = end + 1;
  }
  if (out.windows.empty()) throw PipelineError("empty session schedule");
  return out;
}

std::string SessionSchedule::to_string() const {
  std::string s;
  for (const auto& w : windows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d:%02d+%d", w.start_min / 60, w.start_min % 60, w.dur_min);
    if (!s.empty()) s += ';';
    s += buf;
  }
  return s;
}

std::optional<int> SessionSchedule::window_at(int minute_of_day) const {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    int rel = minute_of_day - windows[i].start_min;
    if (rel < 0) rel += 1440;  // windows may wrap past midnight
    if (rel < windows[i].dur_min) return static_cast<int>(i);
  }
  return std::nullopt;
}

const std::vector<std::string>& tick_csv_header() {
  static const std::vector<std::string> header = [] {
    std::vector<std::string> h = {"timestamp", "lastPrice", "volume", "cumAmount", "cumVolume"};
    for (int i = 1; i <= 5; ++i) h.push_back("bidPrice" + std::to_string(i));
    for (int i = 1; i <= 5; ++i) h.push_back("bidVolume" + std::to_string(i));
    for (int i = 1; i <= 5; ++i) h.push_back("askPrice" + std::to_string(i));
    for (int i = 1; i <= 5; ++i) h.push_back("askVolume" + std::to_string(i));
    return h;
  }();
  return header;
}

std::vector<ParsedTick> parse_tick_file(const std::string& path, ParseReport& report,
                                        const std::string& instrument) {
  CsvReader reader(path, tick_csv_header());
  std::string inst = instrument.empty() ? std::filesystem::path(path).stem().string() : instrument;

  std::vector<ParsedTick> out;
  std::vector<std::string_view> f;
  std::int64_t prev_ts = INT64_MIN;
  while (true) {
    bool more = false;
    try {
      more = reader.next_row(f);
    } catch (const PipelineError& e) {
      report.malformed.push_back(e.what());
      continue;  // wrong column count: report and skip the row
    }
    if (!more) break;

    TickRecord r;
    try {
      r.timestamp = reader.parse_int(f[0], 0);
      r.last_price = reader.parse_double(f[1], 1);
      r.volume = reader.parse_double(f[2], 2);
      r.cum_amount = reader.parse_double(f[3], 3);
      r.cum_volume = reader.parse_double(f[4], 4);
      for (int i = 0; i < 5; ++i) r.bid_price[i] = reader.parse_double(f[5 + i], 5 + i);
      for (int i = 0; i < 5; ++i) r.bid_volume[i] = reader.parse_double(f[10 + i], 10 + i);
      for (int i = 0; i < 5; ++i) r.ask_price[i] = reader.parse_double(f[15 + i], 15 + i);
      for (int i = 0; i < 5; ++i) r.ask_volume[i] = reader.parse_double(f[20 + i], 20 + i);
    } catch (const PipelineError& e) {
      report.malformed.push_back(e.what());
      continue;
    }
    r.instrument = inst;

    if (r.timestamp <= prev_ts) {
      throw PipelineError(path + ":" + std::to_string(reader.line_number()) +
                          ": non-monotonic timestamp " + std::to_string(r.timestamp) +
                          " after " + std::to_string(prev_ts));
    }
    prev_ts = r.timestamp;

    if (r.timestamp % kGridStepMs != 0) {
      report.malformed.push_back(path + ":" + std::to_string(reader.line_number()) +
                                 ": timestamp not on the 0.5 s grid");
      continue;
    }
    if (r.volume < 0.0) {
      report.malformed.push_back(path + ":" + std::to_string(reader.line_number()) +
                                 ": negative volume");
      continue;
    }

    ParsedTick t;
    t.rec = std::move(r);
    t.crossed = !book_is_sane(t.rec);
    if (t.crossed)
      ++report.rows_crossed;
    else
      ++report.rows_ok;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

struct SegmentKey {
  int window;
  std::int64_t day;
  bool operator<(const SegmentKey& o) const {
    return day != o.day ? day < o.day : window < o.window;
  }
};

// Map a timestamp to its session occurrence. Shifting by the window start
// makes each occurrence (including midnight-wrapping night sessions) land in
// a single shifted day, which serves as the trading-day index.
std::optional<SegmentKey> occurrence_of(std::int64_t ts, const SessionSchedule& sched) {
  int minute_of_day = static_cast<int>((ts / kMsPerMin) % 1440);
  auto w = sched.window_at(minute_of_day);
  if (!w) return std::nullopt;
  std::int64_t shifted = ts - static_cast<std::int64_t>(sched.windows[*w].start_min) * kMsPerMin;
  std::int64_t day = shifted >= 0 ? shifted / kMsPerDay : (shifted - kMsPerDay + 1) / kMsPerDay;
  return SegmentKey{*w, day};
}

}  // namespace

TickSeries forward_fill(const std::vector<ParsedTick>& records, const SessionSchedule& schedule,
                        ParseReport& report) {
  std::map<SegmentKey, std::vector<const ParsedTick*>> buckets;
  for (const auto& t : records) {
    auto key = occurrence_of(t.rec.timestamp, schedule);
    if (!key) {
      ++report.rows_outside_session;
      continue;
    }
    buckets[*key].push_back(&t);
  }

  TickSeries series;
  for (auto& [key, ticks] : buckets) {
    const auto& win = schedule.windows[static_cast<std::size_t>(key.window)];
    std::int64_t start = key.day * kMsPerDay + static_cast<std::int64_t>(win.start_min) * kMsPerMin;
    std::int64_t n_slots = static_cast<std::int64_t>(win.dur_min) * kMsPerMin / kGridStepMs;

    Segment seg;
    seg.schedule_window = key.window;
    seg.day = key.day;
    seg.start_ms = start;
    seg.rows.resize(static_cast<std::size_t>(n_slots));

    std::size_t next_tick = 0;
    const ParsedTick* last = nullptr;
    bool last_crossed = false;
    for (std::int64_t i = 0; i < n_slots; ++i) {
      std::int64_t ts = start + i * kGridStepMs;
      GridRow& row = seg.rows[static_cast<std::size_t>(i)];
      if (next_tick < ticks.size() && ticks[next_tick]->rec.timestamp == ts) {
        row.rec = ticks[next_tick]->rec;
        row.crossed = ticks[next_tick]->crossed;
        last = ticks[next_tick];
        last_crossed = row.crossed;
        ++next_tick;
      } else if (last != nullptr) {
        row.rec = last->rec;
        row.rec.timestamp = ts;
        row.rec.volume = 0.0;  // no trades in a filled slot
        row.filled = true;
        row.crossed = last_crossed;
      } else {
        // No prior record in this session: invalid, not filled.
        row.rec.timestamp = ts;
        row.valid = false;
        row.filled = true;
      }
    }
    series.segments.push_back(std::move(seg));
  }
  return series;
}

std::vector<std::vector<std::uint8_t>> mark_warmup(const TickSeries& series, int warmup_len) {
  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(series.segments.size());
  for (const auto& seg : series.segments) {
    std::vector<std::uint8_t> mask(seg.rows.size(), 1);
    std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(warmup_len), mask.size());
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(cut), 0);
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace tickpred
