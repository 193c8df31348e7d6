#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "gridtrade/errors.hpp"
#include "gridtrade/types.hpp"

namespace gridtrade {

// Canonical byte layout, shared by message signing, transaction ids, block
// hashing, and the chain dump format. This layout is normative:
//   - integers are fixed-width 8-byte big-endian,
//   - byte strings are length-prefixed with a 4-byte big-endian length,
//   - doubles are their IEEE-754 bit pattern, big-endian,
//   - fields appear in their declared order.

class WireWriter {
 public:
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void bytes(std::span<const std::uint8_t> b);
  void bytes(const Hash32& h) { bytes(std::span<const std::uint8_t>(h.data(), h.size())); }
  void bytes(std::string_view s);

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class WireReader {
 public:
  explicit WireReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  Bytes bytes();
  Hash32 hash32();
  std::string string();

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace gridtrade
