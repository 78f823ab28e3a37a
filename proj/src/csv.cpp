#include "tickpred/csv.hpp"

#include <cstdio>

namespace tickpred {

std::vector<std::string> split_csv_header(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
    : path_(path), in_(path) {
  if (!in_) throw PipelineError("cannot open file: " + path);
  std::string header_line;
  if (!std::getline(in_, header_line)) throw PipelineError(path + ": empty file, missing header");
  ++line_no_;
  auto header = split_csv_header(header_line);
  if (header != expected_header) {
    std::string want;
    for (const auto& h : expected_header) {
      if (!want.empty()) want += ',';
      want += h;
    }
    throw PipelineError(path + ": header mismatch; expected \"" + want + "\" got \"" + header_line + "\"");
  }
  n_cols_ = expected_header.size();
}

bool CsvReader::next_row(std::vector<std::string_view>& fields) {
  if (!std::getline(in_, line_)) return false;
  ++line_no_;
  if (!line_.empty() && line_.back() == '\r') line_.pop_back();
  fields.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line_.find(',', start);
    if (pos == std::string::npos) {
      fields.emplace_back(line_.data() + start, line_.size() - start);
      break;
    }
    fields.emplace_back(line_.data() + start, pos - start);
    start = pos + 1;
  }
  if (fields.size() != n_cols_) {
    throw PipelineError(path_ + ":" + std::to_string(line_no_) + ": expected " +
                        std::to_string(n_cols_) + " columns, got " + std::to_string(fields.size()));
  }
  return true;
}

void CsvReader::fail(const std::string& what, std::size_t col) const {
  throw PipelineError(path_ + ":" + std::to_string(line_no_) + ": column " +
                      std::to_string(col + 1) + ": " + what);
}

double CsvReader::parse_double(std::string_view s, std::size_t col) const {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) fail("bad number \"" + std::string(s) + "\"", col);
  return v;
}

std::int64_t CsvReader::parse_int(std::string_view s, std::size_t col) const {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) fail("bad integer \"" + std::string(s) + "\"", col);
  return v;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
  if (!out_) throw PipelineError("cannot open file for writing: " + path);
  std::string line;
  for (const auto& h : header) {
    if (!line.empty()) line += ',';
    line += h;
  }
  line += '\n';
  out_ << line;
}

CsvWriter::~CsvWriter() { close(); }

void CsvWriter::begin_row() {
  row_.clear();
  first_field_ = true;
}

void CsvWriter::add_int(std::int64_t v) {
  char buf[24];
  int n = std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  if (!first_field_) row_ += ',';
  row_.append(buf, static_cast<std::size_t>(n));
  first_field_ = false;
}

void CsvWriter::add_fixed(double v, int decimals) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  if (!first_field_) row_ += ',';
  row_.append(buf, static_cast<std::size_t>(n));
  first_field_ = false;
}

void CsvWriter::add_general(double v) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%.10g", v);
  if (!first_field_) row_ += ',';
  row_.append(buf, static_cast<std::size_t>(n));
  first_field_ = false;
}

void CsvWriter::add_str(std::string_view s) {
  if (!first_field_) row_ += ',';
  row_.append(s);
  first_field_ = false;
}

void CsvWriter::end_row() {
  row_ += '\n';
  out_ << row_;
}

void CsvWriter::close() {
  if (out_.is_open()) out_.close();
}

}  // namespace tickpred
