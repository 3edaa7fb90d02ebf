// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stallwatch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

///
/// \brief What a run read, wrote, and how long each stage took.
///
/// Written last, atomically, as `manifest.txt` in the run directory. It is
/// the only output that carries wall-clock values.
///
struct RunManifest {
    std::string command;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path config;
    std::filesystem::path output_dir;
    std::vector<std::string> outputs;  ///< file names relative to output_dir
    std::vector<std::pair<std::string, double>> timings_s;
    std::vector<std::pair<std::string, std::string>> extra;

    std::string serialize() const;
    void write() const;
};

/// Entry point behind the `stallwatch` executable.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stallwatch::cli
