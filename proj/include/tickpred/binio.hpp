#pragma once

// Little-endian binary record helpers for the dataset container and
// checkpoint formats. Layouts are documented in the README.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tickpred/common.hpp"

namespace tickpred {

class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw PipelineError("cannot open file for writing: " + path);
  }

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f32(float v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void magic(const char tag[4]) { raw(tag, 4); }

  void f32_array(const float* p, std::size_t n) { raw(p, n * 4); }

  void str8(const std::string& s) {
    if (s.size() > 255) throw PipelineError("string too long for str8: " + s);
    u8(static_cast<std::uint8_t>(s.size()));
    raw(s.data(), s.size());
  }

  void close() { out_.close(); }

 private:
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw PipelineError("write failed: " + path_);
  }
  std::string path_;
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw PipelineError("cannot open file: " + path);
  }

  std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
  std::int64_t i64() { std::int64_t v; raw(&v, 8); return v; }
  float f32() { float v; raw(&v, 4); return v; }
  double f64() { double v; raw(&v, 8); return v; }

  void expect_magic(const char tag[4], const std::string& what) {
    char got[4];
    raw(got, 4);
    if (std::memcmp(got, tag, 4) != 0)
      throw PipelineError(path_ + ": not a " + what + " file (bad magic)");
  }

  void f32_array(float* p, std::size_t n) { raw(p, n * 4); }

  std::string str8() {
    std::uint8_t n = u8();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  const std::string& path() const { return path_; }

 private:
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw PipelineError(path_ + ": truncated or unreadable");
  }
  std::string path_;
  std::ifstream in_;
};

}  // namespace tickpred
