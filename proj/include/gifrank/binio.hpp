#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "gifrank/common.hpp"

namespace gifrank {

// Little-endian binary writer used by every model file.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }

  void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

  void put_string(std::string_view s) {
    put_u64(s.size());
    buf_.append(s.data(), s.size());
  }

  void put_raw(std::string_view s) { buf_.append(s.data(), s.size()); }

  template <typename Derived>
  void put_matrix(const Eigen::MatrixBase<Derived>& m) {
    put_u64(static_cast<std::uint64_t>(m.rows()));
    put_u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(m(r, c));
    }
  }

  void put_header(std::string_view magic, std::uint32_t version) {
    put_raw(magic);
    put_u32(version);
  }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t get_u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(get_u8()) << (8 * i);
    return v;
  }

  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(get_u8()) << (8 * i);
    return v;
  }

  std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }

  double get_f64() { return std::bit_cast<double>(get_u64()); }

  std::string get_string() {
    const std::uint64_t n = get_u64();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  Eigen::MatrixXd get_matrix() {
    const std::uint64_t rows = get_u64();
    const std::uint64_t cols = get_u64();
    if (cols != 0 && rows > (remaining() / 8) / cols) {
      throw ParseError("truncated binary data: matrix larger than remaining bytes");
    }
    Eigen::MatrixXd m(rows, cols);
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) m(r, c) = get_f64();
    }
    return m;
  }

  // Checks magic bytes and an exact version match.
  void expect_header(std::string_view magic, std::uint32_t version) {
    need(magic.size());
    if (data_.substr(pos_, magic.size()) != magic) {
      throw ParseError("bad magic bytes: not a " + std::string(magic) + " file");
    }
    pos_ += magic.size();
    const std::uint32_t found = get_u32();
    if (found != version) {
      throw VersionError("format version " + std::to_string(found) + " of " + std::string(magic) +
                         " file is not supported (expected " + std::to_string(version) + ")");
    }
  }

  std::size_t remaining() const { return data_.size() - pos_; }

  void expect_end() const {
    if (pos_ != data_.size()) throw ParseError("trailing bytes after binary payload");
  }

 private:
  void need(std::uint64_t n) const {
    if (n > data_.size() - pos_) throw ParseError("truncated binary data");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace gifrank
