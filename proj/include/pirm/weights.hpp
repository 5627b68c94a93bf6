/* Copyright 2026 The pirm-bench Authors. All Rights Reserved.

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
#pragma once

// Named tensor collection and its "PIRMW1" binary container.
//
// Layout (all integers little-endian):
//   magic    "PIRMW1" (50 49 52 4D 57 31)
//   u32      tensor count
//   per tensor:
//     u16    name length, then UTF-8 name bytes
//     u8     ndim, then ndim x u32 dims
//     f32    payload, product(dims) values in canonical row-major order
//
// Convolution parameters are stored as "<node id>.weight" and
// "<node id>.bias".

#include <bit>
#include <cerrno>
#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pirm/error.hpp"
#include "pirm/tensor.hpp"

namespace pirm {

inline constexpr std::string_view kWeightMagic = "PIRMW1";

struct WeightBlob {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  bool operator==(const WeightBlob&) const = default;
};

class WeightStore {
 public:
  void insert(std::string name, WeightBlob blob) {
    std::int64_t count = 1;
    for (std::uint32_t d : blob.dims) {
      count *= d;
      if (count > kMaxTensorElements) throw FormatError("tensor '" + name + "' too large");
    }
    if (static_cast<std::int64_t>(blob.values.size()) != count) {
      throw FormatError("tensor '" + name + "' payload length " +
                        std::to_string(blob.values.size()) + " != " + std::to_string(count));
    }
    if (!entries_.emplace(name, std::move(blob)).second) {
      throw FormatError("duplicate tensor name '" + name + "'");
    }
  }

  void insert_weight(const std::string& node_id, const Tensor& t) {
    insert(node_id + ".weight",
           {{static_cast<std::uint32_t>(t.n()), static_cast<std::uint32_t>(t.c()),
             static_cast<std::uint32_t>(t.h()), static_cast<std::uint32_t>(t.w())},
            {t.begin(), t.end()}});
  }

  void insert_bias(const std::string& node_id, std::vector<float> bias) {
    const auto len = static_cast<std::uint32_t>(bias.size());
    insert(node_id + ".bias", {{len}, std::move(bias)});
  }

  const WeightBlob* find(std::string_view name) const {
    auto it = entries_.find(std::string(name));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Sorted by name, which makes serialization canonical.
  const std::map<std::string, WeightBlob>& entries() const { return entries_; }

  bool operator==(const WeightStore&) const = default;

 private:
  std::map<std::string, WeightBlob> entries_;
};

namespace detail {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated weight file while reading ") + what +
                        " at offset " + std::to_string(pos_));
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  std::uint16_t u16(const char* what) {
    auto b = take(2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace detail

inline WeightStore load_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes);
  auto magic = in.take(kWeightMagic.size(), "magic");
  if (!std::equal(magic.begin(), magic.end(), kWeightMagic.begin())) {
    throw FormatError("bad weight file magic, expected \"PIRMW1\"");
  }
  WeightStore store;
  const std::uint32_t count = in.u32("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint16_t name_len = in.u16("name length");
    auto name_bytes = in.take(name_len, "name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint8_t ndim = in.u8("ndim");
    WeightBlob blob;
    std::uint64_t elems = 1;
    for (std::uint8_t d = 0; d < ndim; ++d) {
      blob.dims.push_back(in.u32("dims"));
      elems *= blob.dims.back();
      if (elems > static_cast<std::uint64_t>(kMaxTensorElements)) {
        throw FormatError("tensor '" + name + "' exceeds 2^31 elements");
      }
    }
    auto payload = in.take(static_cast<std::size_t>(elems) * 4, "payload");
    blob.values.resize(static_cast<std::size_t>(elems));
    for (std::size_t i = 0; i < blob.values.size(); ++i) {
      const auto* b = payload.data() + 4 * i;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                 (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      blob.values[i] = std::bit_cast<float>(bits);
    }
    store.insert(std::move(name), std::move(blob));
  }
  if (!in.done()) {
    throw FormatError("trailing bytes after tensor " + std::to_string(count) +
                      " at offset " + std::to_string(in.pos()));
  }
  return store;
}

inline std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  std::vector<std::uint8_t> out(kWeightMagic.begin(), kWeightMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, blob] : store.entries()) {
    if (name.size() > 0xffff) throw FormatError("tensor name too long: " + name.substr(0, 32));
    if (blob.dims.size() > 0xff) throw FormatError("too many dims for '" + name + "'");
    detail::put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(blob.dims.size()));
    for (std::uint32_t d : blob.dims) detail::put_u32(out, d);
    for (float v : blob.values) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed for '" + path + "'");
  return bytes;
}

inline void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  f.flush();
  if (!f) throw IoError("write failed for '" + path + "': " + std::strerror(errno));
}

inline WeightStore load_weights_file(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return load_weights(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.detail());
  }
}

inline void save_weights_file(const WeightStore& store, const std::string& path) {
  write_file_bytes(path, serialize_weights(store));
}

}  // namespace pirm
