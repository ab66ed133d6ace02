#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include <zlib.h>

// Small formatting helpers for the CSV outputs: shortest-round-trip doubles
// (so files are byte-stable across runs and platforms) and a CRC-32 for the
// run manifest's artifact checksums.

namespace netfuse {

inline std::string fmt_double(double x) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

inline std::string fmt_int(long long x) {
  char buf[32];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::uint32_t crc32_of(const std::string& bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace netfuse
