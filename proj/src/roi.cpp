// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/roi.hpp"

#include "stallwatch/text.hpp"

#include <sstream>

namespace stallwatch {

std::vector<Point2d> collect_motion_points(std::span<const Track> tracks, const EngineConfig& cfg,
                                           int before_frame) {
    std::vector<Point2d> points;
    for (const auto& track : tracks) {
        for (std::size_t i = 1; i < track.states.size(); ++i) {
            const auto& prev = track.states[i - 1];
            const auto& cur = track.states[i];
            if (cur.frame >= before_frame) {
                break;
            }
            const double frames = cur.frame - prev.frame;
            const double speed = (cur.bbox.center() - prev.bbox.center()).norm() / frames;
            if (speed > cfg.roi_speed_threshold_px_per_frame) {
                points.push_back(cur.bbox.center());
            }
        }
    }
    return points;
}

RegionOfInterest build_roi(std::vector<Point2d> points, int frame) {
    RegionOfInterest roi;
    roi.source_point_count = static_cast<int>(points.size());
    roi.frozen_at_frame = frame;
    roi.hull = convex_hull(std::move(points));
    return roi;
}

bool in_roi(const Point2d& center, const RegionOfInterest& roi) {
    return roi.empty() || point_in_polygon(center, roi.hull);
}

bool in_roi(const Track& track, const RegionOfInterest& roi) {
    return in_roi(track.current().bbox.center(), roi);
}

std::string serialize_roi(const RegionOfInterest& roi) {
    std::ostringstream out;
    for (const auto& v : roi.hull.vertices) {
        out << text::format(v.x()) << ',' << text::format(v.y()) << '\n';
    }
    return out.str();
}

RegionOfInterest parse_roi_text(std::string_view contents) {
    std::vector<Point2d> points;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() != 2) {
            throw DataError("expected x,y", line_no);
        }
        try {
            points.emplace_back(text::to_double(f[0]), text::to_double(f[1]));
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    if (!points.empty() && points.size() < 3) {
        throw DataError("a region needs at least three vertices");
    }
    // Operator polygons may be listed in either winding; the hull normalizes them.
    auto roi = build_roi(points, 0);
    if (!points.empty() && roi.empty()) {
        throw DataError("region vertices are collinear");
    }
    return roi;
}

RegionOfInterest load_roi(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_roi_text(contents);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace stallwatch
