// Tensor container file format, shared by feature dumps, weight files and
// attention stacks.
//
// Layout (all integers little-endian):
//   magic        4 bytes  "BKTC"
//   version      u32      = 1
//   little_end   u8       = 1
//   reserved     3 bytes  = 0
//   count        u32      number of tensors
//   per tensor:  name_len u32, name bytes (UTF-8),
//                dtype u8 (0 = float32), rank u32, dims u64 x rank
//   payloads     float32 little-endian, tensors in header order,
//                row-major, no padding

#ifndef BINDERKIT_CORE_CONTAINER_HPP_
#define BINDERKIT_CORE_CONTAINER_HPP_

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ndarray.hpp"

namespace binderkit {

inline constexpr std::uint32_t kContainerVersion = 1;

struct NamedTensor {
  std::string name;
  NdArray<float> value;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t u8() { need(1); return static_cast<std::uint8_t>(data_[pos_++]); }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size())
      fail(ErrorKind::Parse, "tensor container truncated at byte " + std::to_string(pos_));
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

} // namespace detail

inline std::string encode_container(const std::vector<NamedTensor>& tensors) {
  std::string out = "BKTC";
  detail::put_u32(out, kContainerVersion);
  out.push_back(1);
  out.append(3, '\0');
  detail::put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    out.push_back(0);
    detail::put_u32(out, static_cast<std::uint32_t>(t.value.shape.size()));
    for (std::int64_t d : t.value.shape)
      detail::put_u64(out, static_cast<std::uint64_t>(d));
  }
  for (const NamedTensor& t : tensors)
    for (float f : t.value.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_u32(out, bits);
    }
  return out;
}

inline std::vector<NamedTensor> decode_container(std::string_view data) {
  detail::Reader rd(data);
  if (rd.bytes(4) != "BKTC")
    fail(ErrorKind::Parse, "not a tensor container (bad magic)");
  std::uint32_t version = rd.u32();
  if (version != kContainerVersion)
    fail(ErrorKind::Parse, "unsupported container version " + std::to_string(version));
  if (rd.u8() != 1)
    fail(ErrorKind::Parse, "container is not little-endian");
  rd.bytes(3);
  std::uint32_t count = rd.u32();
  std::vector<NamedTensor> out(count);
  for (NamedTensor& t : out) {
    std::uint32_t len = rd.u32();
    t.name = std::string(rd.bytes(len));
    std::uint8_t dtype = rd.u8();
    if (dtype != 0)
      fail(ErrorKind::Parse, "tensor '" + t.name + "' has unsupported dtype " + std::to_string(dtype));
    std::uint32_t rank = rd.u32();
    for (std::uint32_t r = 0; r < rank; ++r)
      t.value.shape.push_back(static_cast<std::int64_t>(rd.u64()));
  }
  for (NamedTensor& t : out) {
    std::int64_t n = shape_numel(t.value.shape);
    if (static_cast<std::uint64_t>(n) * 4 > rd.remaining())
      fail(ErrorKind::Parse, "tensor '" + t.name + "' payload truncated");
    t.value.data.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      std::uint32_t bits = rd.u32();
      std::memcpy(&t.value.data[i], &bits, 4);
    }
  }
  if (rd.remaining() != 0)
    fail(ErrorKind::Parse, "trailing bytes after tensor payloads");
  return out;
}

inline const NamedTensor* find_tensor(const std::vector<NamedTensor>& ts, std::string_view name) {
  for (const NamedTensor& t : ts)
    if (t.name == name)
      return &t;
  return nullptr;
}

} // namespace binderkit

#endif
