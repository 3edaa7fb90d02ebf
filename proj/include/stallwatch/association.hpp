// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/config.hpp"
#include "stallwatch/features.hpp"
#include "stallwatch/geometry.hpp"
#include "stallwatch/ingest.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stallwatch {

enum class StateSource { detected, hypothesized };

std::string_view to_string(StateSource source);

struct TrackState {
    int frame = 0;
    BBoxd bbox;
    std::optional<FeatureVector> feature;
    StateSource source = StateSource::detected;
};

enum class TrackStatus { active, lost, exited };

///
/// \brief One vehicle identity and its time-ordered states.
///
/// State frames are strictly increasing; `exited` is terminal.
///
struct Track {
    int id = 0;
    std::vector<TrackState> states;
    TrackStatus status = TrackStatus::active;
    int last_matched_frame = 0;

    const TrackState& current() const { return states.back(); }
};

struct GateResult {
    double iou = 0.0;
    double dist = 0.0;
    double sim = 1.0;
    /// Set when either side lacked a feature and the similarity gate was waived.
    bool sim_assumed = false;
};

///
/// \brief Applies the three association gates (IOU, center distance, appearance).
///
/// Returns the measured triple only when iou >= iou_gate, dist <= dist_gate_px
/// and sim >= sim_gate all hold. A missing feature on either side satisfies the
/// similarity gate with sim = 1 unless cfg.require_features is set.
///
std::optional<GateResult> gate(const TrackState& track_state, const BBoxd& bbox,
                               const std::optional<FeatureVector>& feature, const EngineConfig& cfg);

inline std::optional<GateResult> gate(const TrackState& track_state, const DetectionRecord& det,
                                      const EngineConfig& cfg) {
    return gate(track_state, det.bbox, det.feature, cfg);
}

/// alpha * iou + beta * sim, with sim clamped to [0, 1] first.
double edge_weight(double iou, double sim, const EngineConfig& cfg);

struct AssociationEdge {
    int left = 0;   ///< index into AssociationGraph::left
    int right = 0;  ///< detection index within the frame
    double weight = 0.0;
    GateResult measures;
};

///
/// \brief Bipartite graph between live tracks (left) and one frame's
/// detections (right). Only gated pairs are stored; edges are ordered by
/// (left, right).
///
struct AssociationGraph {
    std::vector<int> left;  ///< track ids
    int right_count = 0;
    std::vector<AssociationEdge> edges;
};

/// Left vertices are the non-exited tracks, each represented by its most recent state.
AssociationGraph build_graph(std::span<const Track> tracks, std::span<const DetectionRecord> detections,
                             const EngineConfig& cfg);

/// Maximum total weight matching; returns (track id, detection index) pairs sorted by track id.
std::vector<std::pair<int, int>> solve_matching(const AssociationGraph& graph);

///
/// \brief Frame-by-frame tracking-by-detection over the gated association graph.
///
/// Matched detections extend their track, unmatched detections start new
/// tracks with fresh ids, and unmatched tracks are kept as `lost` for up to
/// cfg.max_lost_frames before they are retired as `exited`.
///
class Tracker {
public:
    explicit Tracker(EngineConfig cfg);

    struct StepResult {
        std::vector<std::pair<int, int>> matched;  ///< (track id, detection index)
        std::vector<int> spawned;
        std::vector<int> unmatched;  ///< live tracks with no detection this frame
    };

    /// Throws std::invalid_argument if frame does not exceed the previous one.
    StepResult step(int frame, std::span<const DetectionRecord> detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    int next_id() const { return next_id_; }

private:
    EngineConfig cfg_;
    std::vector<Track> tracks_;
    int next_id_ = 1;
    std::optional<int> last_frame_;
};

///
/// \brief Runs the tracker over every frame from the first to the last
/// detection, including frames with no detections.
///
std::vector<Track> track_detections(std::span<const DetectionRecord> detections, const EngineConfig& cfg);

/// Track rows `frame,id,x,y,w,h,source`, ordered by (frame, id).
std::string serialize_tracks(std::span<const Track> tracks);
std::vector<Track> parse_tracks_text(std::string_view contents);
std::vector<Track> parse_tracks(const std::filesystem::path& path);

}  // namespace stallwatch
