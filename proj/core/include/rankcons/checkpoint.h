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

#ifndef RANKCONS_CHECKPOINT_H_
#define RANKCONS_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rankcons/models.h"

namespace rankcons {

// Binary layout, all integers little-endian:
//
//   "RKCP"            4-byte magic
//   u32 version       currently 1
//   u64 num_dims, then num_dims x u64 layer dims
//   u64 mask_len, then mask_len bytes (0 or 1)
//   u64 num_params, then num_params x f64 (IEEE-754 binary64, LE)
//   u64 meta_len, then meta_len bytes of UTF-8 metadata (JSON text)
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Predictor model;
  std::string metadata;
};

std::vector<std::uint8_t> encode_checkpoint(const Predictor& model,
                                            const std::string& metadata);
/// Throws DataError on a bad magic, unknown version, or truncated input.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Predictor& model,
                     const std::string& metadata);
/// Throws MissingPrerequisite when the file does not exist.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rankcons

#endif  // RANKCONS_CHECKPOINT_H_
