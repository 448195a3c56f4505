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

#include "rankcons/logs.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "rankcons/errors.h"

namespace rankcons {
namespace {

// Opens `path` for binary writing, creating missing parent directories.
std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

using nlohmann::json;

void append_scores(std::string& out, const ObjectiveScores& scores) {
  out += "{";
  bool first = true;
  for (const auto& [name, value] : scores) {
    if (!first) out += ",";
    first = false;
    out += json(name).dump();
    out += ":";
    out += format_real(value);
  }
  out += "}";
}

void append_reals(std::string& out, std::span<const double> values) {
  out += "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_real(values[i]);
  }
  out += "]";
}

json parse_object(std::string_view line, std::initializer_list<const char*> keys) {
  json obj;
  try {
    obj = json::parse(line.begin(), line.end());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw DataError("record is not a JSON object");
  if (obj.size() != keys.size()) {
    throw DataError("record has " + std::to_string(obj.size()) + " keys, expected " +
                    std::to_string(keys.size()));
  }
  for (const char* key : keys) {
    if (!obj.contains(key)) throw DataError(std::string("record lacks key '") + key + "'");
  }
  return obj;
}

ObjectiveScores parse_scores(const json& obj) {
  if (!obj.is_object()) throw DataError("'scores' must be an object");
  ObjectiveScores scores;
  for (const auto& [name, value] : obj.items()) scores.set(name, value.get<double>());
  return scores;
}

void check_pv(const json& obj) {
  if (obj.at("pv").get<std::int64_t>() != 1) throw DataError("pv must be 1");
}

template <typename Record>
void write_lines(const std::filesystem::path& path, std::span<const Record> records) {
  std::ofstream out = open_output(path);
  std::string buffer;
  for (const auto& rec : records) {
    buffer += format_record(rec);
    buffer += '\n';
    if (buffer.size() > (1u << 20)) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

template <typename Parse>
auto read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisite("file not found: " + path.string());
  std::vector<decltype(parse(std::string_view{}))> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace

std::string format_real(double value) {
  if (!std::isfinite(value)) throw DataError("cannot serialise a non-finite real");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_record(const ServiceRecord& rec) {
  std::string out = "{\"request_id\":" + std::to_string(rec.request_id) +
                    ",\"item_id\":" + std::to_string(rec.item_id) + ",\"pv\":1,\"scores\":";
  append_scores(out, rec.scores);
  out += ",\"g_score\":" + format_real(rec.g_score) +
         ",\"pre_rank_pos\":" + std::to_string(rec.pre_rank_pos) + "}";
  return out;
}

std::string format_record(const SimulatorRecord& rec) {
  std::string out = "{\"request_id\":" + std::to_string(rec.request_id) +
                    ",\"item_id\":" + std::to_string(rec.item_id) + ",\"pv\":1,\"scores\":";
  append_scores(out, rec.scores);
  out += ",\"g_score\":" + format_real(rec.g_score) +
         ",\"rank_pos\":" + std::to_string(rec.rank_pos) + "}";
  return out;
}

std::string format_record(const ExposureRecord& rec) {
  return "{\"request_id\":" + std::to_string(rec.request_id) +
         ",\"item_id\":" + std::to_string(rec.item_id) +
         ",\"click\":" + std::to_string(rec.click) + "}";
}

std::string format_record(const Item& item) {
  std::string out = "{\"item_id\":" + std::to_string(item.id) +
                    ",\"init_bid\":" + format_real(item.init_bid) + ",\"features\":";
  append_reals(out, item.features);
  out += "}";
  return out;
}

std::string format_record(const Request& req) {
  std::string out = "{\"request_id\":" + std::to_string(req.id) + ",\"user_features\":";
  append_reals(out, req.user_features);
  out += ",\"preranking_set\":[";
  for (std::size_t i = 0; i < req.preranking_set.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(req.preranking_set[i]);
  }
  out += "]}";
  return out;
}

ServiceRecord parse_service_record(std::string_view line) {
  const json obj =
      parse_object(line, {"request_id", "item_id", "pv", "scores", "g_score", "pre_rank_pos"});
  check_pv(obj);
  return {obj.at("request_id").get<RequestId>(), obj.at("item_id").get<ItemId>(),
          parse_scores(obj.at("scores")), obj.at("g_score").get<double>(),
          obj.at("pre_rank_pos").get<std::uint32_t>()};
}

SimulatorRecord parse_simulator_record(std::string_view line) {
  const json obj =
      parse_object(line, {"request_id", "item_id", "pv", "scores", "g_score", "rank_pos"});
  check_pv(obj);
  return {obj.at("request_id").get<RequestId>(), obj.at("item_id").get<ItemId>(),
          parse_scores(obj.at("scores")), obj.at("g_score").get<double>(),
          obj.at("rank_pos").get<std::uint32_t>()};
}

ExposureRecord parse_exposure_record(std::string_view line) {
  const json obj = parse_object(line, {"request_id", "item_id", "click"});
  const int click = obj.at("click").get<int>();
  if (click != 0 && click != 1) throw DataError("click must be 0 or 1");
  return {obj.at("request_id").get<RequestId>(), obj.at("item_id").get<ItemId>(), click};
}

Item parse_item(std::string_view line) {
  const json obj = parse_object(line, {"item_id", "init_bid", "features"});
  Item item;
  item.id = obj.at("item_id").get<ItemId>();
  item.init_bid = obj.at("init_bid").get<double>();
  item.features = obj.at("features").get<std::vector<double>>();
  return item;
}

Request parse_request(std::string_view line) {
  const json obj = parse_object(line, {"request_id", "user_features", "preranking_set"});
  Request req;
  req.id = obj.at("request_id").get<RequestId>();
  req.user_features = obj.at("user_features").get<std::vector<double>>();
  req.preranking_set = obj.at("preranking_set").get<std::vector<ItemId>>();
  return req;
}

void write_service_log(const std::filesystem::path& path,
                       std::span<const ServiceRecord> records) {
  write_lines(path, records);
}
void write_simulator_log(const std::filesystem::path& path,
                         std::span<const SimulatorRecord> records) {
  write_lines(path, records);
}
void write_exposure_log(const std::filesystem::path& path,
                        std::span<const ExposureRecord> records) {
  write_lines(path, records);
}
void write_corpus(const std::filesystem::path& path, std::span<const Item> items) {
  write_lines(path, items);
}
void write_requests(const std::filesystem::path& path, std::span<const Request> requests) {
  write_lines(path, requests);
}

std::vector<ServiceRecord> read_service_log(const std::filesystem::path& path) {
  return read_lines(path, parse_service_record);
}
std::vector<SimulatorRecord> read_simulator_log(const std::filesystem::path& path) {
  return read_lines(path, parse_simulator_record);
}
std::vector<ExposureRecord> read_exposure_log(const std::filesystem::path& path) {
  return read_lines(path, parse_exposure_record);
}
std::vector<Item> read_corpus(const std::filesystem::path& path) {
  return read_lines(path, parse_item);
}
std::vector<Request> read_requests(const std::filesystem::path& path) {
  return read_lines(path, parse_request);
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out = open_output(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisite("file not found: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingPrerequisite("file not found: " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace rankcons
