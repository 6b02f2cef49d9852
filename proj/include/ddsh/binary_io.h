// Copyright 2026 The DDSH Authors.
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

#ifndef DDSH_BINARY_IO_H_
#define DDSH_BINARY_IO_H_

// Little-endian primitives shared by the feature, model and code file formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "ddsh/errors.h"

namespace ddsh::binary_io {

template <typename UInt>
void WriteUnsigned(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes;
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt ReadUnsigned(std::istream& in, std::string_view what) {
  std::array<unsigned char, sizeof(UInt)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("truncated file while reading " + std::string(what));
  UInt value = 0;
  for (size_t i = 0; i < sizeof(UInt); ++i) {
    value |= static_cast<UInt>(bytes[i]) << (8 * i);
  }
  return value;
}

inline void WriteF32(std::ostream& out, float v) {
  WriteUnsigned<uint32_t>(out, std::bit_cast<uint32_t>(v));
}
inline float ReadF32(std::istream& in, std::string_view what) {
  return std::bit_cast<float>(ReadUnsigned<uint32_t>(in, what));
}
inline void WriteF64(std::ostream& out, double v) {
  WriteUnsigned<uint64_t>(out, std::bit_cast<uint64_t>(v));
}
inline double ReadF64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(ReadUnsigned<uint64_t>(in, what));
}

inline void WriteMagic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != magic) {
    throw DataError("bad magic: expected \"" + std::string(magic) + "\"");
  }
}

inline void ExpectVersion(std::istream& in, uint32_t expected) {
  const auto version = ReadUnsigned<uint32_t>(in, "version");
  if (version != expected) {
    throw DataError("unsupported format version " + std::to_string(version));
  }
}

}  // namespace ddsh::binary_io

#endif  // DDSH_BINARY_IO_H_
