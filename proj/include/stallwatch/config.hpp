// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch {

///
/// \brief Every tunable threshold of the tracking and anomaly pipeline.
///
/// Defaults are the best calibration row for the gates (IOU 0.4, 30 px,
/// similarity 0.6, alpha 0.4 / beta 0.6) and one minute of dwell at 30 fps.
///
struct EngineConfig {
    // association gates and edge weighting
    double iou_gate = 0.4;
    double dist_gate_px = 30.0;
    double sim_gate = 0.6;
    double alpha = 0.4;
    double beta = 0.6;
    bool require_features = false;
    int max_lost_frames = 30;

    // scene
    double fps = 30.0;
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    double scene_margin_px = 10.0;

    // temporal structure
    int dwell_threshold_frames = 1800;
    int speed_window_frames = 100;
    double speed_stop_threshold_px_per_frame = 0.5;
    double stop_radius_px = 3.0;
    int max_hypothesized_frames = 300;

    // spatial structure
    int quadtree_capacity = 4;
    int quadtree_max_depth = 12;
    double quadtree_radius_px = 30.0;

    // region of interest
    double roi_speed_threshold_px_per_frame = 1.0;
    int roi_warmup_frames = 900;

    // alarm colour boundaries, seconds stopped
    double severity_green_s = 60.0;
    double severity_yellow_s = 120.0;
    double severity_red_s = 180.0;

    // evaluation
    double mot_iou_threshold = 0.5;
    double anomaly_window_s = 10.0;

    /// Throws std::invalid_argument when a value is out of its valid range.
    void validate() const;
};

/// Parses `key = value` lines with `#` comments. Unknown keys are errors.
EngineConfig parse_config(std::string_view text);

EngineConfig load_config(const std::filesystem::path& path);

/// Serializes every key, one `key = value` per line.
std::string to_string(const EngineConfig& cfg);

/// Non-fatal inconsistencies worth reporting (e.g. dwell not equal to one minute).
std::vector<std::string> config_warnings(const EngineConfig& cfg);

}  // namespace stallwatch
