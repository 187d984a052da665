/* Copyright 2026 The lbnseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Binary weight file, little-endian throughout:
//
//   "LBNW"            4-byte magic
//   u32 version       currently 1
//   u32 count         number of entries
//   count x entry:
//     u32 name_len, name bytes
//     u32 rank (1..4), u32 dims[rank]
//     u8  dtype       1 = float32
//     u64 offset      absolute file offset of the entry's data
//   float32 data blocks
//
// Tensors of rank < 4 are left-padded with unit dimensions on load.

#ifndef LBNSEG_IO_WEIGHT_FILE_HPP_
#define LBNSEG_IO_WEIGHT_FILE_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lbnseg/error.hpp"
#include "lbnseg/tensor.hpp"
#include "lbnseg/weights.hpp"

namespace lbnseg::io {

inline constexpr std::array<char, 4> kWeightMagic{'L', 'B', 'N', 'W'};
inline constexpr std::uint32_t kWeightVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::uint32_t kMaxNameLength = 4096;

struct WeightEntryHeader {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::uint8_t dtype = kDtypeFloat32;
  std::uint64_t offset = 0;

  std::uint64_t byte_size() const {
    std::uint64_t n = 4;
    for (auto d : dims) n *= d;
    return n;
  }
};

struct WeightFileHeader {
  std::uint32_t version = kWeightVersion;
  std::vector<WeightEntryHeader> entries;
};

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::size_t size() const { return bytes_.size(); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }
  void patch_u64(std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("weight file truncated in header at byte " +
                        std::to_string(pos_));
    }
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_weights(const WeightStore& store) {
  detail::ByteWriter w;
  for (char c : kWeightMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kWeightVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  std::vector<std::size_t> offset_slots;
  for (const auto& [name, tensor] : store) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.raw(name);
    const Shape s = tensor.shape();
    w.u32(4);
    for (int d : {s.n, s.c, s.h, s.w}) w.u32(static_cast<std::uint32_t>(d));
    w.u8(kDtypeFloat32);
    offset_slots.push_back(w.size());
    w.u64(0);
  }
  std::size_t i = 0;
  for (const auto& [name, tensor] : store) {
    w.patch_u64(offset_slots[i++], w.size());
    for (float v : tensor.data()) w.f32(v);
  }
  return std::move(w.bytes());
}

// Parses and validates the header: magic, version, unique names, dtype,
// and data blocks that are in bounds and pairwise disjoint.
inline WeightFileHeader decode_weight_header(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes);
  const std::string magic = r.str(4);
  if (!std::equal(magic.begin(), magic.end(), kWeightMagic.begin())) {
    throw FormatError("not a weight file (bad magic)");
  }
  WeightFileHeader header;
  header.version = r.u32();
  if (header.version != kWeightVersion) {
    throw FormatError("unknown weight file version " + std::to_string(header.version));
  }
  const std::uint32_t count = r.u32();
  std::set<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    WeightEntryHeader e;
    const std::uint32_t len = r.u32();
    if (len == 0 || len > kMaxNameLength) {
      throw FormatError("corrupt header: entry " + std::to_string(i) +
                        " name length " + std::to_string(len));
    }
    e.name = r.str(len);
    if (!names.insert(e.name).second) {
      throw FormatError("duplicate weight name '" + e.name + "'");
    }
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 4) {
      throw FormatError("corrupt header: '" + e.name + "' has rank " +
                        std::to_string(rank));
    }
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint32_t dim = r.u32();
      if (dim == 0 || dim > (1u << 30)) {
        throw FormatError("corrupt header: '" + e.name + "' has dimension " +
                          std::to_string(dim));
      }
      e.dims.push_back(dim);
    }
    e.dtype = r.u8();
    if (e.dtype != kDtypeFloat32) {
      throw FormatError("unsupported element type " + std::to_string(e.dtype) +
                        " for '" + e.name + "'");
    }
    e.offset = r.u64();
    header.entries.push_back(std::move(e));
  }
  const std::uint64_t header_end = r.pos();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (const WeightEntryHeader& e : header.entries) {
    if (e.offset < header_end) {
      throw FormatError("corrupt header: '" + e.name + "' data overlaps header");
    }
    if (e.offset > bytes.size() || e.byte_size() > bytes.size() - e.offset) {
      throw FormatError("weight file truncated: data of '" + e.name +
                        "' extends past end of file");
    }
    ranges.emplace_back(e.offset, e.offset + e.byte_size());
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].first < ranges[i - 1].second) {
      throw FormatError("corrupt header: overlapping data blocks");
    }
  }
  return header;
}

inline WeightStore decode_weights(const std::vector<std::uint8_t>& bytes) {
  const WeightFileHeader header = decode_weight_header(bytes);
  WeightStore store;
  for (const WeightEntryHeader& e : header.entries) {
    std::array<int, 4> dims{1, 1, 1, 1};
    std::copy(e.dims.begin(), e.dims.end(), dims.end() - e.dims.size());
    const Shape shape{dims[0], dims[1], dims[2], dims[3]};
    std::vector<float> data(shape.count());
    const std::uint8_t* p = bytes.data() + e.offset;
    for (std::size_t i = 0; i < data.size(); ++i, p += 4) {
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 static_cast<std::uint32_t>(p[1]) << 8 |
                                 static_cast<std::uint32_t>(p[2]) << 16 |
                                 static_cast<std::uint32_t>(p[3]) << 24;
      data[i] = std::bit_cast<float>(bits);
    }
    store.set(e.name, Tensor(shape, std::move(data)));
  }
  return store;
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

inline void save_weights(const WeightStore& store, const std::string& path) {
  write_file(path, encode_weights(store));
}

inline WeightStore load_weights(const std::string& path) {
  return decode_weights(read_file(path));
}

}  // namespace lbnseg::io

#endif  // LBNSEG_IO_WEIGHT_FILE_HPP_
