#include "gridtrade/wire.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace gridtrade {

void WireWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
  }
}

void WireWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void WireWriter::bytes(std::span<const std::uint8_t> b) {
  if (b.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw WireError("byte string too long");
  }
  const auto n = static_cast<std::uint32_t>(b.size());
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>((n >> shift) & 0xff));
  }
  buf_.insert(buf_.end(), b.begin(), b.end());
}

void WireWriter::bytes(std::string_view s) {
  bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void WireReader::need(std::size_t n) const {
  if (remaining() < n) throw WireError("truncated stream");
}

std::uint64_t WireReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

double WireReader::f64() { return std::bit_cast<double>(u64()); }

Bytes WireReader::bytes() {
  need(4);
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | data_[pos_++];
  need(n);
  Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

Hash32 WireReader::hash32() {
  Bytes b = bytes();
  if (b.size() != 32) throw WireError("expected 32-byte string");
  Hash32 h{};
  std::memcpy(h.data(), b.data(), 32);
  return h;
}

std::string WireReader::string() {
  Bytes b = bytes();
  return std::string(b.begin(), b.end());
}

}  // namespace gridtrade
