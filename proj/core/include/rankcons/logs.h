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

#ifndef RANKCONS_LOGS_H_
#define RANKCONS_LOGS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankcons/cascade.h"
#include "rankcons/core.h"

namespace rankcons {

// JSONL log formats. One record per line, UTF-8, LF endings, keys in the
// order shown, reals printed with 17 significant digits so a parse/print
// cycle reproduces the file byte for byte.
//
//   simulator: {"request_id":R,"item_id":I,"pv":1,"scores":{..},"g_score":G,"rank_pos":P}
//   service:   {"request_id":R,"item_id":I,"pv":1,"scores":{..},"g_score":G,"pre_rank_pos":P}
//   exposure:  {"request_id":R,"item_id":I,"click":0|1}
//   corpus:    {"item_id":I,"init_bid":B,"features":[..]}
//   requests:  {"request_id":R,"user_features":[..],"preranking_set":[..]}

/// "%.17g"; throws DataError for non-finite values.
std::string format_real(double value);

std::string format_record(const ServiceRecord& rec);
std::string format_record(const SimulatorRecord& rec);
std::string format_record(const ExposureRecord& rec);
std::string format_record(const Item& item);
std::string format_record(const Request& req);

/// Parsers reject missing or unexpected keys and pv != 1 with DataError.
ServiceRecord parse_service_record(std::string_view line);
SimulatorRecord parse_simulator_record(std::string_view line);
ExposureRecord parse_exposure_record(std::string_view line);
Item parse_item(std::string_view line);
Request parse_request(std::string_view line);

void write_service_log(const std::filesystem::path& path,
                       std::span<const ServiceRecord> records);
void write_simulator_log(const std::filesystem::path& path,
                         std::span<const SimulatorRecord> records);
void write_exposure_log(const std::filesystem::path& path,
                        std::span<const ExposureRecord> records);
void write_corpus(const std::filesystem::path& path, std::span<const Item> items);
void write_requests(const std::filesystem::path& path, std::span<const Request> requests);

// Readers throw MissingPrerequisite for an absent file and DataError (with
// the line number) for a malformed line.
std::vector<ServiceRecord> read_service_log(const std::filesystem::path& path);
std::vector<SimulatorRecord> read_simulator_log(const std::filesystem::path& path);
std::vector<ExposureRecord> read_exposure_log(const std::filesystem::path& path);
std::vector<Item> read_corpus(const std::filesystem::path& path);
std::vector<Request> read_requests(const std::filesystem::path& path);

/// Writes `text` verbatim (no newline translation).
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// 64-bit FNV-1a of a file's bytes, as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace rankcons

#endif  // RANKCONS_LOGS_H_
