// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/association.hpp"
#include "stallwatch/config.hpp"
#include "stallwatch/geometry.hpp"

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch {

///
/// \brief Main-road area: convex hull of the positions where vehicles were
/// seen moving. An empty hull lets every track through.
///
struct RegionOfInterest {
    Polygond hull;
    int source_point_count = 0;
    int frozen_at_frame = 0;

    bool empty() const { return hull.empty(); }
};

/// Centers of states whose displacement from the previous state of the same
/// track exceeds cfg.roi_speed_threshold_px_per_frame. States at or after
/// `before_frame` are ignored.
std::vector<Point2d> collect_motion_points(std::span<const Track> tracks, const EngineConfig& cfg,
                                           int before_frame = std::numeric_limits<int>::max());

RegionOfInterest build_roi(std::vector<Point2d> points, int frame);

/// Current center inside the hull, boundary inclusive; always true for an empty region.
bool in_roi(const Track& track, const RegionOfInterest& roi);
bool in_roi(const Point2d& center, const RegionOfInterest& roi);

/// Polygon file: one `x,y` vertex per line.
std::string serialize_roi(const RegionOfInterest& roi);
RegionOfInterest parse_roi_text(std::string_view contents);
RegionOfInterest load_roi(const std::filesystem::path& path);

}  // namespace stallwatch
