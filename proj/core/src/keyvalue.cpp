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

#include "freesense/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace freesense::kv {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& message) {
    std::ostringstream os;
    os << source << ":" << line << ": " << message;
    throw ParseError(os.str());
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) parts.push_back(trim(item));
    return parts;
}

}  // namespace

Document Document::parse_string(const std::string& text, const std::string& source_name) {
    Document doc;
    doc.source_ = source_name;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(source_name, line_no, "expected 'key = value', got '" + line + "'");
        Entry entry;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line = line_no;
        if (entry.key.empty()) fail(source_name, line_no, "empty key");
        for (const Entry& prev : doc.entries_) {
            if (prev.key == entry.key) {
                std::ostringstream os;
                os << "duplicate key '" << entry.key << "' (first set at line " << prev.line
                   << ", repeated at line " << entry.line << ")";
                fail(source_name, entry.line, os.str());
            }
        }
        doc.entries_.push_back(std::move(entry));
    }
    doc.used_.assign(doc.entries_.size(), false);
    return doc;
}

Document Document::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

const Entry* Document::find(const std::string& key) const {
    for (const Entry& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

bool Document::has(const std::string& key) const { return find(key) != nullptr; }

void Document::mark_used(const std::string& key) {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].key == key) used_[i] = true;
}

const Entry& Document::require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) throw ParseError(source_ + ": missing required key '" + key + "'");
    mark_used(key);
    return *e;
}

std::string Document::get_string(const std::string& key) { return require(key).value; }

std::int64_t Document::get_int(const std::string& key) {
    const Entry& e = require(key);
    std::int64_t out = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), out);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        fail(source_, e.line, "key '" + key + "': expected integer, got '" + e.value + "'");
    return out;
}

std::uint64_t Document::get_uint64(const std::string& key) {
    const Entry& e = require(key);
    std::uint64_t out = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), out);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        fail(source_, e.line,
             "key '" + key + "': expected unsigned integer, got '" + e.value + "'");
    return out;
}

double Document::get_double(const std::string& key) {
    const Entry& e = require(key);
    try {
        std::size_t pos = 0;
        const double out = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        fail(source_, e.line, "key '" + key + "': expected number, got '" + e.value + "'");
    }
}

std::vector<double> Document::get_double_list(const std::string& key) {
    const Entry& e = require(key);
    std::vector<double> out;
    for (const std::string& part : split_commas(e.value)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(part, &pos));
            if (pos != part.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            fail(source_, e.line, "key '" + key + "': expected number list, got '" + e.value + "'");
        }
    }
    if (out.empty()) fail(source_, e.line, "key '" + key + "': empty list");
    return out;
}

std::vector<std::int64_t> Document::get_int_list(const std::string& key) {
    const Entry& e = require(key);
    std::vector<std::int64_t> out;
    for (const std::string& part : split_commas(e.value)) {
        std::int64_t v = 0;
        const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            fail(source_, e.line,
                 "key '" + key + "': expected integer list, got '" + e.value + "'");
        out.push_back(v);
    }
    if (out.empty()) fail(source_, e.line, "key '" + key + "': empty list");
    return out;
}

std::optional<std::string> Document::opt_string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get_string(key);
}

std::optional<std::int64_t> Document::opt_int(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get_int(key);
}

std::optional<std::uint64_t> Document::opt_uint64(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get_uint64(key);
}

std::optional<double> Document::opt_double(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

std::optional<std::vector<std::int64_t>> Document::opt_int_list(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return get_int_list(key);
}

void Document::require_all_used() const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!used_[i])
            fail(source_, entries_[i].line, "unknown key '" + entries_[i].key + "'");
    }
}

void Document::fail_at(const std::string& key, const std::string& message) const {
    const Entry* e = find(key);
    fail(source_, e ? e->line : 0, message);
}

}  // namespace freesense::kv
