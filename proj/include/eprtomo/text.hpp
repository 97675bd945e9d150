// Copyright 2026 The eprtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small helpers shared by the text file formats.

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "eprtomo/errors.hpp"

namespace eprtomo::text {

/// `%.{digits}g`-style rendering; digits = 17 round-trips every double.
inline std::string format(double x, int digits = 17) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Ordered `key = value` document. Lines starting with '#' are comments.
class KeyValueDocument {
   public:
    void set(const std::string &key, std::string value) {
        if (!values_.count(key)) order_.push_back(key);
        values_[key] = std::move(value);
    }
    void set(const std::string &key, double value) { set(key, format(value)); }
    void set_count(const std::string &key, std::uint64_t value) { set(key, std::to_string(value)); }

    bool has(const std::string &key) const { return values_.count(key) != 0; }

    const std::string &get(const std::string &key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing key '" + key + "'", 0);
        return it->second;
    }

    double get_double(const std::string &key) const {
        auto v = to_double(get(key));
        if (!v) throw ParseError("key '" + key + "' is not a number", 0);
        return *v;
    }

    std::uint64_t get_count(const std::string &key) const {
        auto v = to_uint(get(key));
        if (!v) throw ParseError("key '" + key + "' is not a nonnegative integer", 0);
        return *v;
    }

    const std::vector<std::string> &keys() const { return order_; }

    void write(std::ostream &os) const {
        for (const auto &k : order_) os << k << " = " << values_.at(k) << '\n';
    }

    static KeyValueDocument read(std::istream &is) {
        KeyValueDocument doc;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
            doc.set(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
        }
        return doc;
    }

   private:
    std::vector<std::string> order_;
    std::map<std::string, std::string> values_;
};

}  // namespace eprtomo::text
