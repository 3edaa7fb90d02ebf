// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/association.hpp"
#include "stallwatch/config.hpp"
#include "stallwatch/roi.hpp"

#include <climits>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stallwatch {

enum class Severity { none, green, yellow, red };

std::string_view to_string(Severity s);

/// none below severity_green_s, then green / yellow / red on half-open intervals.
Severity severity(double stopped_duration_s, const EngineConfig& cfg);

///
/// \brief Per-track stop bookkeeping.
///
/// dwell_frames counts frames since stopped_since_frame; the detected and
/// hypothesized counters split those same frames by state source.
///
struct DwellState {
    int track_id = 0;
    std::optional<int> stopped_since_frame;
    int dwell_frames = 0;
    int hypothesized_frames = 0;
    bool alarm_raised = false;
    Point2d anchor = Point2d::Zero();
    int last_stopped_frame = 0;
    int last_detected_stopped_frame = 0;
    /// States before this frame are ignored by the speed window (set when motion resumes).
    std::optional<int> moving_since_frame;
    std::optional<std::size_t> open_event;

    void reset() {
        stopped_since_frame.reset();
        dwell_frames = 0;
        hypothesized_frames = 0;
        alarm_raised = false;
        open_event.reset();
    }
};

struct AnomalyEvent {
    std::string video_id;
    int track_id = 0;
    double start_s = 0.0;
    std::optional<double> end_s;
    double confidence = 1.0;
    Severity severity = Severity::green;
};

///
/// \brief Mean per-frame center displacement over the last `window` frame
/// steps: the net center shift across the window divided by its frame span.
/// Returns nullopt with fewer than two states.
///
std::optional<double> estimate_speed(std::span<const TrackState> states, int window);

inline std::optional<double> estimate_speed(const Track& track, int window) {
    return estimate_speed(std::span<const TrackState>(track.states), window);
}

/// Center inside the frame shrunk by `margin` on every side, boundary inclusive.
bool in_scene(const BBoxd& bbox, double frame_width, double frame_height, double margin);

inline bool in_scene(const BBoxd& bbox, const EngineConfig& cfg) {
    return in_scene(bbox, cfg.frame_width, cfg.frame_height, cfg.scene_margin_px);
}

enum class Propagation { propagated, already_observed, out_of_scene, moving, empty_track };

std::string_view to_string(Propagation p);

///
/// \brief Appends a zero-velocity hypothesized state at `frame` to a track
/// that was not observed there, is still in the scene, and whose speed is
/// below the stop threshold. Any failed precondition leaves the track
/// untouched and is reported in the return value.
///
Propagation propagate_hypothetical(Track& track, int frame, const EngineConfig& cfg);

///
/// \brief Online stalled-vehicle detector fed with one frame of tracker output at a time.
///
/// Each frame it indexes the previous positions of live tracks in a QuadTree,
/// re-identifies new tracks that appear next to an occluded stopped vehicle,
/// propagates hypothesized states for stopped vehicles that went unobserved,
/// retires tracks that left the scene, and advances dwell counters. An event
/// is raised the frame a dwell counter reaches cfg.dwell_threshold_frames.
///
class AnomalyDetector {
public:
    struct Observation {
        int track_id = 0;  ///< tracker id
        TrackState state;
        /// Last frame in which the tracker reports this id; INT_MAX when unknown.
        int track_last_frame = INT_MAX;
    };

    AnomalyDetector(EngineConfig cfg, RegionOfInterest roi, std::string video_id);

    /// Observations must come from one frame; frames must increase. Returns events raised this frame.
    std::vector<AnomalyEvent> update(int frame, std::span<const Observation> observations);

    /// Closes ongoing events at last_frame and returns every event in emission order.
    std::vector<AnomalyEvent> finalize(int last_frame);

    /// Trajectories keyed by canonical id, including hypothesized states.
    const std::map<int, Track>& trajectories() const { return tracks_; }
    const std::map<int, DwellState>& dwell_states() const { return dwell_; }
    /// Canonical id assigned to a tracker id, or the id itself when never re-identified.
    int canonical_id(int tracker_id) const;
    const std::vector<AnomalyEvent>& events() const { return events_; }
    const RegionOfInterest& roi() const { return roi_; }

private:
    struct Extra {
        int hypothesized_streak = 0;
    };

    std::optional<int> reidentify(int frame, const Observation& obs, const std::vector<int>& candidates) const;
    void update_dwell(int frame, Track& track, DwellState& dwell);
    void close_stop(DwellState& dwell, int end_frame);
    void retire(Track& track, DwellState& dwell);

    EngineConfig cfg_;
    RegionOfInterest roi_;
    std::string video_id_;
    std::map<int, Track> tracks_;
    std::map<int, DwellState> dwell_;
    std::map<int, Extra> extra_;
    std::map<int, int> alias_;
    std::map<int, int> tracker_last_frame_;
    std::map<int, std::vector<int>> tracker_ids_of_;
    std::vector<AnomalyEvent> events_;
    std::optional<int> last_frame_;
};

struct AnomalyResult {
    RegionOfInterest roi;
    std::vector<Track> trajectories;
    std::vector<AnomalyEvent> events;
};

///
/// \brief Replays a complete track table through AnomalyDetector.
///
/// When no region is supplied it is built from motion during the first
/// cfg.roi_warmup_frames frames and then frozen for the whole video.
///
AnomalyResult analyze_anomalies(std::span<const Track> tracks, const EngineConfig& cfg,
                                std::optional<RegionOfInterest> roi, const std::string& video_id);

/// Event rows `video_id,track_id,start_s,end_s,confidence,severity`; end_s empty while ongoing.
std::string serialize_events(std::span<const AnomalyEvent> events);
std::vector<AnomalyEvent> parse_events_text(std::string_view contents);
std::vector<AnomalyEvent> parse_events(const std::filesystem::path& path);

}  // namespace stallwatch
