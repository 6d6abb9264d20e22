// Copyright 2026 The AM-MTEEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMMTEEG_SRC_BINARY_IO_H_
#define AMMTEEG_SRC_BINARY_IO_H_

// Little-endian primitives shared by the checkpoint, memory and trial-bundle
// formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace ammteeg::binary {

template <typename UInt>
void WriteUInt(std::ostream& out, UInt value) {
  unsigned char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) {
    bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(UInt));
}

inline void WriteF64(std::ostream& out, double value) {
  WriteUInt(out, std::bit_cast<std::uint64_t>(value));
}

inline void WriteF32(std::ostream& out, float value) {
  WriteUInt(out, std::bit_cast<std::uint32_t>(value));
}

inline void WriteString(std::ostream& out, const std::string& s) {
  WriteUInt<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Reads the same primitives, throwing ErrorT on truncation.
template <typename ErrorT>
class Reader {
 public:
  Reader(std::istream& in, std::string context)
      : in_(in), context_(std::move(context)) {}

  template <typename UInt>
  UInt ReadUInt(const char* what) {
    unsigned char bytes[sizeof(UInt)];
    Fill(bytes, sizeof(UInt), what);
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      value |= static_cast<UInt>(bytes[i]) << (8 * i);
    }
    return value;
  }

  double ReadF64(const char* what) {
    return std::bit_cast<double>(ReadUInt<std::uint64_t>(what));
  }

  float ReadF32(const char* what) {
    return std::bit_cast<float>(ReadUInt<std::uint32_t>(what));
  }

  std::string ReadString(const char* what, std::uint32_t max_length = 4096) {
    const auto length = ReadUInt<std::uint32_t>(what);
    if (length > max_length) Fail(std::string(what) + " length is implausible");
    std::string s(length, '\0');
    if (length > 0) Fill(s.data(), length, what);
    return s;
  }

  void ReadBytes(void* dst, std::size_t n, const char* what) {
    Fill(dst, n, what);
  }

  bool AtEnd() { return in_.peek() == std::char_traits<char>::eof(); }

  [[noreturn]] void Fail(const std::string& message) const {
    throw ErrorT(context_ + ": " + message);
  }

 private:
  void Fill(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      Fail(std::string("truncated while reading ") + what);
    }
  }

  std::istream& in_;
  std::string context_;
};

}  // namespace ammteeg::binary

#endif  // AMMTEEG_SRC_BINARY_IO_H_
