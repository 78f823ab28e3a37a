#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "tickpred/common.hpp"

namespace tickpred {

/// Minimal comma-separated reader with a checked header row and line-numbered
/// parse errors. Fields are parsed with std::from_chars (locale-free).
class CsvReader {
 public:
  CsvReader(const std::string& path, const std::vector<std::string>& expected_header);

  /// Read the next data row into `fields`. Returns false at EOF.
  /// Throws PipelineError on a row with the wrong column count.
  bool next_row(std::vector<std::string_view>& fields);

  std::size_t line_number() const { return line_no_; }
  const std::string& path() const { return path_; }

  double parse_double(std::string_view s, std::size_t col) const;
  std::int64_t parse_int(std::string_view s, std::size_t col) const;

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t n_cols_ = 0;
  std::size_t line_no_ = 0;

  [[noreturn]] void fail(const std::string& what, std::size_t col) const;
};

std::vector<std::string> split_csv_header(const std::string& line);

/// Buffered writer with locale-free numeric formatting.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  void begin_row();
  void add_int(std::int64_t v);
  void add_fixed(double v, int decimals);  // printf %.Nf
  void add_general(double v);              // printf %.10g
  void add_str(std::string_view s);
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::string row_;
  bool first_field_ = true;
};

}  // namespace tickpred
