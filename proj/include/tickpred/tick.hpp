#pragma once

// Tick-file parsing, 0.5 s grid forward-fill, session segmentation and
// warm-up masking.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tickpred/common.hpp"

namespace tickpred {

/// One L5 order-book snapshot with trade fields.
struct TickRecord {
  std::int64_t timestamp = 0;  // ms since epoch, UTC, multiple of 500
  double last_price = 0.0;
  double volume = 0.0;      // contracts traded in the preceding 0.5 s
  double cum_amount = 0.0;  // currency
  double cum_volume = 0.0;  // contracts
  std::array<double, 5> bid_price{};
  std::array<double, 5> bid_volume{};
  std::array<double, 5> ask_price{};
  std::array<double, 5> ask_volume{};
  std::string instrument;
};

/// Book integrity: best bid below best ask and strictly monotone levels.
bool book_is_sane(const TickRecord& r);

/// One trading-session window (time of day). Windows may wrap past midnight.
struct SessionWindow {
  int start_min = 0;  // minutes from midnight, [0, 1440)
  int dur_min = 0;
};

struct SessionSchedule {
  std::vector<SessionWindow> windows;

  /// Paper defaults: 23:00 (prev day), 09:00, 10:30, 13:30 segment starts.
  static SessionSchedule defaults();
  /// Parse "HH:MM+minutes;HH:MM+minutes;...".
  static SessionSchedule parse(const std::string& spec);
  std::string to_string() const;

  /// Index of the window containing the given minute of day, if any.
  std::optional<int> window_at(int minute_of_day) const;
};

struct ParseReport {
  std::vector<std::string> malformed;  // human-readable, with line numbers
  std::size_t rows_ok = 0;
  std::size_t rows_crossed = 0;
  std::size_t rows_outside_session = 0;
};

/// Canonical tick CSV column names, in order.
const std::vector<std::string>& tick_csv_header();

struct ParsedTick {
  TickRecord rec;
  bool crossed = false;
};

/// Parse the canonical tick CSV. Records come back sorted check: timestamps
/// must be strictly increasing (error naming the offending line otherwise).
/// Crossed / malformed books are flagged, not dropped.
std::vector<ParsedTick> parse_tick_file(const std::string& path, ParseReport& report,
                                        const std::string& instrument = "");

/// One grid slot after forward-fill.
struct GridRow {
  TickRecord rec;
  bool filled = false;   // synthesized by forward-fill
  bool crossed = false;  // book integrity flag carried from parse
  bool valid = true;     // false for leading slots with no prior record
};

/// A contiguous run of grid slots inside one session occurrence.
struct Segment {
  int schedule_window = 0;  // index into SessionSchedule.windows
  std::int64_t day = 0;     // trading-day index (night session attaches forward)
  std::int64_t start_ms = 0;  // first grid timestamp
  std::vector<GridRow> rows;
};

struct TickSeries {
  std::vector<Segment> segments;
};

/// Assign records to session occurrences and fill every 0.5 s grid slot.
/// Filled rows copy the most recent record with volume = 0; slots before the
/// first record of a session are marked invalid instead of filled.
/// Records outside any session window are dropped and counted in `report`.
TickSeries forward_fill(const std::vector<ParsedTick>& records, const SessionSchedule& schedule,
                        ParseReport& report);

/// Per-segment label-validity mask: the first `warmup_len` grid points of each
/// segment are label-invalid; a segment shorter than that is entirely invalid.
std::vector<std::vector<std::uint8_t>> mark_warmup(const TickSeries& series, int warmup_len);

}  // namespace tickpred
