// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint layout (all integers little-endian):
//
//   "QPCK" | version u32 | tensor*
//   tensor := name_len u32 | name bytes | rank u32 | dims u64[rank] | f64[prod(dims)]
//
// Model tensors come first. Optimizer state, when present, follows with the
// same encoding under the names "optim.m.<tensor>", "optim.v.<tensor>" and
// "optim.step" (a single f64).

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadpool/classifier.hpp"
#include "quadpool/error.hpp"

namespace quadpool {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::optional<OptimState> optim;
};

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    bits = std::bit_cast<std::uint64_t>(static_cast<double>(value));
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline void put_tensor(std::vector<std::uint8_t>& out, const std::string& name, const std::vector<std::size_t>& dims,
                       const std::vector<double>& values) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_le<std::uint64_t>(out, d);
  for (double v : values) put_le<double>(out, v);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint64_t uint(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("truncated checkpoint");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params, const OptimState* optim = nullptr) {
  std::vector<std::uint8_t> out{'Q', 'P', 'C', 'K'};
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  const auto& specs = model_tensor_specs();
  const auto tensors = params.tensors();
  for (std::size_t i = 0; i < specs.size(); ++i)
    detail::put_tensor(out, std::string(specs[i].name), specs[i].shape, *tensors[i]);
  if (optim) {
    const auto m = optim->first_moment.tensors();
    const auto v = optim->second_moment.tensors();
    for (std::size_t i = 0; i < specs.size(); ++i)
      detail::put_tensor(out, "optim.m." + std::string(specs[i].name), specs[i].shape, *m[i]);
    for (std::size_t i = 0; i < specs.size(); ++i)
      detail::put_tensor(out, "optim.v." + std::string(specs[i].name), specs[i].shape, *v[i]);
    detail::put_tensor(out, "optim.step", {1}, {static_cast<double>(optim->step)});
  }
  return out;
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes);
  if (r.str(4) != "QPCK") throw IoError("not a checkpoint (bad magic)");
  const auto version = r.uint(4);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));

  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> tensors;
  while (!r.done()) {
    const std::string name = r.str(r.uint(4));
    const auto rank = r.uint(4);
    if (rank > 8) throw IoError("checkpoint tensor '" + name + "' has implausible rank");
    std::vector<std::size_t> dims;
    std::size_t n = 1;
    for (std::uint64_t k = 0; k < rank; ++k) {
      dims.push_back(r.uint(8));
      if (dims.back() > r.remaining()) throw IoError("checkpoint tensor '" + name + "' is too large");
      n *= dims.back();
      if (n > r.remaining() / 8) throw IoError("truncated checkpoint tensor '" + name + "'");
    }
    std::vector<double> values(n);
    for (auto& v : values) v = r.f64();
    if (!tensors.emplace(name, std::make_pair(std::move(dims), std::move(values))).second)
      throw IoError("duplicate checkpoint tensor '" + name + "'");
  }

  auto fetch = [&tensors](const std::string& name, const TensorSpec& spec) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) throw IoError("checkpoint is missing tensor '" + name + "'");
    if (it->second.first != spec.shape) throw IoError("checkpoint tensor '" + name + "' has wrong shape");
    return it->second.second;
  };

  Checkpoint ck;
  const auto& specs = model_tensor_specs();
  auto p = ck.params.tensors();
  for (std::size_t i = 0; i < specs.size(); ++i) *p[i] = fetch(std::string(specs[i].name), specs[i]);

  if (tensors.count("optim.step")) {
    OptimState st;
    auto m = st.first_moment.tensors();
    auto v = st.second_moment.tensors();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      *m[i] = fetch("optim.m." + std::string(specs[i].name), specs[i]);
      *v[i] = fetch("optim.v." + std::string(specs[i].name), specs[i]);
    }
    st.step = static_cast<std::int64_t>(fetch("optim.step", TensorSpec{"optim.step", {1}})[0]);
    ck.optim = std::move(st);
  }
  return ck;
}

inline void write_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                             const OptimState* optim = nullptr) {
  const auto bytes = encode_checkpoint(params, optim);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace quadpool
