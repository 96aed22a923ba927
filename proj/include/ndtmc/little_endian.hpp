// Copyright 2026 The ndtmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "ndtmc/errors.hpp"

// Byte-order-explicit primitives for the binary file formats. All on-disk
// multi-byte fields are little-endian; floating point fields round-trip
// bit-exactly through the uint casts.

namespace ndtmc::io {

inline void write_bytes_le(std::ostream& out, std::uint64_t value, int n_bytes) {
  char buf[8];
  for (int i = 0; i < n_bytes; ++i) {
    buf[i] = static_cast<char>((value >> (8 * i)) & 0xffu);
  }
  out.write(buf, n_bytes);
}

inline std::uint64_t read_bytes_le(std::istream& in, int n_bytes) {
  char buf[8];
  in.read(buf, n_bytes);
  if (!in) {
    throw FormatError("unexpected end of file while reading binary record");
  }
  std::uint64_t value = 0;
  for (int i = 0; i < n_bytes; ++i) {
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  }
  return value;
}

inline void write_u16(std::ostream& out, std::uint16_t v) { write_bytes_le(out, v, 2); }
inline void write_u32(std::ostream& out, std::uint32_t v) { write_bytes_le(out, v, 4); }
inline void write_u64(std::ostream& out, std::uint64_t v) { write_bytes_le(out, v, 8); }
inline void write_u8(std::ostream& out, std::uint8_t v) { write_bytes_le(out, v, 1); }

inline void write_i32(std::ostream& out, std::int32_t v) {
  write_bytes_le(out, static_cast<std::uint32_t>(v), 4);
}

inline void write_f32(std::ostream& out, float v) {
  write_bytes_le(out, std::bit_cast<std::uint32_t>(v), 4);
}

inline void write_f64(std::ostream& out, double v) {
  write_bytes_le(out, std::bit_cast<std::uint64_t>(v), 8);
}

inline std::uint8_t read_u8(std::istream& in) { return static_cast<std::uint8_t>(read_bytes_le(in, 1)); }
inline std::uint16_t read_u16(std::istream& in) { return static_cast<std::uint16_t>(read_bytes_le(in, 2)); }
inline std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(read_bytes_le(in, 4)); }
inline std::uint64_t read_u64(std::istream& in) { return read_bytes_le(in, 8); }

inline std::int32_t read_i32(std::istream& in) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(read_bytes_le(in, 4)));
}

inline float read_f32(std::istream& in) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(read_bytes_le(in, 4)));
}

inline double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_bytes_le(in, 8));
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw FormatError("bad magic in " + what + ": expected \"" + magic + "\"");
  }
}

}  // namespace ndtmc::io
