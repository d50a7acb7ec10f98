#pragma once

// Binary checkpoint: "ALPCKPT\0", u32 version, u64 adam step, u64 parameter
// count, then per parameter: u32 name length, name bytes, u32 rank, u64 dims,
// and value, m, v payloads as little-endian IEEE doubles. A trailing u64
// FNV-1a hash covers everything before it.

#include <bit>
#include <type_traits>
#include <iterator>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "alp/nn/parameters.hpp"

namespace alp::nn {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'A', 'L', 'P', 'C', 'K', 'P', 'T', '\0'};

namespace detail {

inline std::uint64_t fnv1a(const std::string& bytes, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

template <class T>
void put_le(std::string& out, T v) {
  std::uint64_t u = 0;
  if constexpr (std::is_same_v<T, double>) u = std::bit_cast<std::uint64_t>(v);
  else u = static_cast<std::uint64_t>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& data, std::size_t end) : data_(data), end_(end) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) return std::bit_cast<double>(u);
    else return static_cast<T>(u);
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw CheckpointError("checkpoint payload is truncated or corrupt");
  }
  const std::string& data_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const ParameterStore& store) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint64_t>(out, store.adam_step());
  detail::put_le<std::uint64_t>(out, store.size());
  for (const Parameter& p : store) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) detail::put_le<std::uint64_t>(out, d);
    for (const Tensor* t : {&p.value, &p.m, &p.v})
      for (double x : t->values()) detail::put_le<double>(out, x);
  }
  detail::put_le<std::uint64_t>(out, detail::fnv1a(out, out.size()));
  return out;
}

inline ParameterStore deserialize_checkpoint(const std::string& data) {
  if (data.size() < sizeof(kCheckpointMagic) + 4 + 8 ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  const std::size_t body = data.size() - 8;
  detail::Reader r(data, data.size());
  r.bytes(sizeof(kCheckpointMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  {
    detail::Reader h(data, data.size());
    h.bytes(body);
    if (h.get<std::uint64_t>() != detail::fnv1a(data, body))
      throw CheckpointError("checkpoint payload is truncated or corrupt (checksum mismatch)");
  }
  detail::Reader in(data, body);
  in.bytes(sizeof(kCheckpointMagic) + 4);
  ParameterStore store;
  store.set_adam_step(in.get<std::uint64_t>());
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = in.get<std::uint32_t>();
    std::string name = in.bytes(len);
    const auto rank = in.get<std::uint32_t>();
    if (rank > 3) throw CheckpointError("checkpoint payload is corrupt (rank > 3)");
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>()));
      total *= shape.back();
    }
    if (total * 24 > body) throw CheckpointError("checkpoint payload is corrupt (shape too large)");
    Parameter& p = store.add(name, Tensor(shape, 0.0));
    for (Tensor* t : {&p.value, &p.m, &p.v})
      for (auto& x : t->values()) x = in.get<double>();
  }
  if (in.pos() != body) throw CheckpointError("checkpoint payload is corrupt (trailing bytes)");
  return store;
}

inline void save_checkpoint(const ParameterStore& store, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(store);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing checkpoint " + path.string());
}

inline ParameterStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace alp::nn
