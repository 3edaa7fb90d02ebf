// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/features.hpp"
#include "stallwatch/geometry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch {

/// One detector output. Line format: `frame,x,y,w,h,confidence,class[,f1,f2,...]`.
struct DetectionRecord {
    int frame = 0;
    BBoxd bbox;
    double confidence = 1.0;
    std::string class_label;
    std::optional<FeatureVector> feature;
};

/// Tracking ground truth row. Line format: `frame,id,x,y,w,h`.
struct GroundTruthTrackRecord {
    int frame = 0;
    int identity = 0;
    BBoxd bbox;
};

/// Annotated stall. Line format: `video_id,start_s,end_s`.
struct AnomalyGroundTruth {
    std::string video_id;
    double start_s = 0.0;
    double end_s = 0.0;
};

/// Records stably sorted by frame. Throws DataError naming the offending line.
std::vector<DetectionRecord> parse_detections_text(std::string_view contents);
std::vector<DetectionRecord> parse_detections(const std::filesystem::path& path);
std::string serialize_detections(const std::vector<DetectionRecord>& records);

/// Rejects duplicate (frame, identity) keys and negative frames.
std::vector<GroundTruthTrackRecord> parse_mot_ground_truth_text(std::string_view contents);
std::vector<GroundTruthTrackRecord> parse_mot_ground_truth(const std::filesystem::path& path);
std::string serialize_mot_ground_truth(const std::vector<GroundTruthTrackRecord>& records);

/// Sorted by (video_id, start_s). Rejects end_s < start_s.
std::vector<AnomalyGroundTruth> parse_anomaly_ground_truth_text(std::string_view contents);
std::vector<AnomalyGroundTruth> parse_anomaly_ground_truth(const std::filesystem::path& path);
std::string serialize_anomaly_ground_truth(const std::vector<AnomalyGroundTruth>& records);

}  // namespace stallwatch
