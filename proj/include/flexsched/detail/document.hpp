/* Copyright 2026 The flexsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Strict reading of JSON input documents: every error names the field path,
// unknown keys are rejected.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

#include "flexsched/error.hpp"

namespace flexsched::detail {

using json = nlohmann::json;

inline json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports "... at line L, column C: ..."
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw ParseError(path_ + ": expected an object");
    }
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (auto k : keys) known = known || it.key() == k;
      if (!known) throw ParseError(path_ + ": unknown field \"" + it.key() + "\"");
    }
  }

  [[nodiscard]] bool has(std::string_view key) const {
    return obj_.contains(key);
  }

  [[nodiscard]] const json& at(std::string_view key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      throw ParseError(path_ + ": missing field \"" + std::string(key) + "\"");
    }
    return *it;
  }

  [[nodiscard]] std::string field(std::string_view key) const {
    return path_ + "." + std::string(key);
  }

  [[nodiscard]] std::string string(std::string_view key) const {
    const json& v = at(key);
    if (v.is_string()) return v.get<std::string>();
    // numeric ids are accepted and rendered in canonical form
    if (v.is_number_integer()) return v.dump();
    throw ParseError(field(key) + ": expected a string");
  }

  [[nodiscard]] bool boolean(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(field(key) + ": expected true/false");
    return v.get<bool>();
  }

  [[nodiscard]] double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ParseError(field(key) + ": expected a number");
    return v.get<double>();
  }

  [[nodiscard]] std::int64_t integer(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) {
      throw ParseError(field(key) + ": expected an integer");
    }
    return v.get<std::int64_t>();
  }

  [[nodiscard]] const json& array(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ParseError(field(key) + ": expected an array");
    return v;
  }

  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
};

}  // namespace flexsched::detail
