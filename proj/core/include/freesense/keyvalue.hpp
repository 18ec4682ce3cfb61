// SPDX-License-Identifier: Apache-2.0
//
// freesense: blind estimation of multi-cell OFDM transmit powers from the
// eigenvalue moments of the received sample covariance matrix.
// Copyright (C) 2026 the freesense authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freesense::kv {

/// Raised for malformed files and for semantic config errors. The message
/// always carries the source name and line number(s).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

/// One parsed `key = value` file. Blank lines and `#` comments are ignored.
/// Duplicate keys are a parse error naming both offending lines. Consumers
/// mark keys as used through the typed getters; `require_all_used` then turns
/// leftovers into errors, so misspelled keys never default silently.
class Document {
  public:
    static Document parse_file(const std::string& path);
    static Document parse_string(const std::string& text, const std::string& source_name);

    const std::string& source_name() const { return source_; }
    const std::vector<Entry>& entries() const { return entries_; }

    bool has(const std::string& key) const;

    // Typed getters; all mark the key as used. The `get_*` forms throw
    // ParseError if the key is missing or the value does not parse.
    std::string get_string(const std::string& key);
    std::int64_t get_int(const std::string& key);
    std::uint64_t get_uint64(const std::string& key);
    double get_double(const std::string& key);
    std::vector<double> get_double_list(const std::string& key);  // comma separated
    std::vector<std::int64_t> get_int_list(const std::string& key);

    std::optional<std::string> opt_string(const std::string& key);
    std::optional<std::int64_t> opt_int(const std::string& key);
    std::optional<std::uint64_t> opt_uint64(const std::string& key);
    std::optional<double> opt_double(const std::string& key);
    std::optional<std::vector<std::int64_t>> opt_int_list(const std::string& key);

    /// Error if any key was never consumed ("unknown key ... at line N").
    void require_all_used() const;

    /// Error pointing at the key's line (for semantic errors such as a
    /// powers/M length mismatch discovered after parsing).
    [[noreturn]] void fail_at(const std::string& key, const std::string& message) const;

  private:
    const Entry* find(const std::string& key) const;
    const Entry& require(const std::string& key);
    void mark_used(const std::string& key);

    std::string source_;
    std::vector<Entry> entries_;
    std::vector<bool> used_;
};

}  // namespace freesense::kv
