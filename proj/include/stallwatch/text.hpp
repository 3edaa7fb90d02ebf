// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch {

/// Malformed or inconsistent input data. Carries the source line when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace text {

std::string_view trim(std::string_view s);

/// Splits on commas and trims each field.
std::vector<std::string_view> split_csv(std::string_view line);

/// Locale-independent full-field parses. Throw DataError (line 0) on failure.
double to_double(std::string_view field);
long long to_int(std::string_view field);

/// Shortest representation that round-trips to the same double.
std::string format(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Calls fn(line_number, line) for every non-blank line not starting with '#'.
template <typename Fn>
void for_each_record(std::string_view contents, Fn&& fn) {
    std::size_t line_no = 0;
    while (!contents.empty()) {
        const auto nl = contents.find('\n');
        std::string_view line = contents.substr(0, nl);
        contents = nl == std::string_view::npos ? std::string_view{} : contents.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        fn(line_no, line);
    }
}

}  // namespace text
}  // namespace stallwatch
