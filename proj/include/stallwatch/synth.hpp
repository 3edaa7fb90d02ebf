// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/geometry.hpp"
#include "stallwatch/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch::synth {

/// `frames` steps at constant velocity (pixels per frame). Zero velocity is a stop.
struct MotionSegment {
    int frames = 0;
    Point2d velocity = Point2d::Zero();
};

/// Detections are withheld on frames [start_frame, end_frame).
struct OcclusionInterval {
    int start_frame = 0;
    int end_frame = 0;
};

///
/// \brief One simulated vehicle. It appears at entry_frame with `box` and then
/// follows its segments; after the last segment it keeps the last velocity.
/// It disappears for good once its center leaves the frame.
///
struct VehicleSpec {
    int entry_frame = 0;
    BBoxd box;
    std::vector<MotionSegment> segments;
    std::optional<std::uint64_t> feature_seed;
    std::vector<OcclusionInterval> occlusions;
    std::string class_label = "car";
    /// Parked off the road: its stops are not annotated as anomalies.
    bool off_road = false;
};

struct NoiseSpec {
    double bbox_jitter_px = 0.0;
    double miss_probability = 0.0;
};

struct ScenarioSpec {
    std::string video_id = "synth";
    double frame_width = 1920.0;
    double frame_height = 1080.0;
    double fps = 30.0;
    int duration_frames = 0;
    std::vector<VehicleSpec> vehicles;
    NoiseSpec noise;
    std::uint64_t rng_seed = 0;
    int feature_dim = 16;
    /// Expected norm of the Gaussian perturbation added to each unit feature before renormalizing.
    double feature_noise = 0.05;
    double min_anomaly_s = 60.0;

    /// Throws std::invalid_argument on out-of-range values or a vehicle entering outside the frame.
    void validate() const;
};

struct Dataset {
    std::vector<DetectionRecord> detections;
    /// Noise-free boxes for every frame a vehicle is present, occluded or not. Identity = vehicle index + 1.
    std::vector<GroundTruthTrackRecord> gt_tracks;
    /// Parallel to gt_tracks: the vehicle moved into this position from a different one.
    std::vector<bool> gt_moving;
    std::vector<AnomalyGroundTruth> gt_anomalies;
};

/// Deterministic in the spec, including its seed.
Dataset generate(const ScenarioSpec& spec);

/// Key-value header followed by one `[vehicle]` stanza per vehicle.
ScenarioSpec parse_scenario_text(std::string_view contents);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioSpec& spec);

}  // namespace stallwatch::synth
