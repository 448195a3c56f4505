// Copyright 2026 The rankcons Authors
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

#include "rankcons/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rankcons/errors.h"

namespace rankcons {
namespace {

constexpr char kMagic[4] = {'R', 'K', 'C', 'P'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out.insert(out.end(), p, p + size);
  }

  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint8_t byte() {
    need(1);
    return in_[pos_++];
  }
  std::size_t count() {
    const std::uint64_t v = u64();
    if (v > in_.size()) throw DataError("checkpoint: implausible length field");
    return static_cast<std::size_t>(v);
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw DataError("checkpoint: truncated input");
  }

  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Predictor& model,
                                            const std::string& metadata) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u64(model.layer_dims().size());
  for (auto d : model.layer_dims()) w.u64(d);
  w.u64(model.feature_mask().size());
  for (bool bit : model.feature_mask()) w.out.push_back(bit ? 1 : 0);
  w.u64(model.num_params());
  for (double v : model.params()) w.f64(v);
  w.u64(metadata.size());
  w.bytes(metadata.data(), metadata.size());
  return std::move(w.out);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.byte());
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("checkpoint: bad magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  std::vector<std::size_t> dims(r.count());
  for (auto& d : dims) d = r.count();
  std::vector<bool> mask(r.count());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = r.byte() != 0;
  Checkpoint ckpt{Predictor(std::move(mask), std::move(dims)), {}};
  const std::size_t num_params = r.count();
  if (num_params != ckpt.model.num_params()) {
    throw DataError("checkpoint: parameter count does not match layer dims");
  }
  for (auto& v : ckpt.model.params()) v = r.f64();
  const std::size_t meta_len = r.count();
  ckpt.metadata.reserve(meta_len);
  for (std::size_t i = 0; i < meta_len; ++i) ckpt.metadata.push_back(static_cast<char>(r.byte()));
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Predictor& model,
                     const std::string& metadata) {
  const auto bytes = encode_checkpoint(model, metadata);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisite("checkpoint not found: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace rankcons
