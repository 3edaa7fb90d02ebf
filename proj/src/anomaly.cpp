// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/anomaly.hpp"

#include "stallwatch/quadtree.hpp"
#include "stallwatch/text.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stallwatch {

namespace {

void append_hypothesized(Track& track, int frame) {
    TrackState s = track.current();
    s.frame = frame;
    s.source = StateSource::hypothesized;
    track.states.push_back(std::move(s));
}

double confidence_of(const DwellState& d) {
    if (d.dwell_frames <= 0) {
        return 1.0;
    }
    return std::clamp(1.0 - static_cast<double>(d.hypothesized_frames) / d.dwell_frames, 0.0, 1.0);
}

// States on or after `from_frame`.
std::span<const TrackState> states_since(const Track& track, std::optional<int> from_frame) {
    std::span<const TrackState> all(track.states);
    if (!from_frame) {
        return all;
    }
    const auto it = std::lower_bound(all.begin(), all.end(), *from_frame,
                                     [](const TrackState& s, int f) { return s.frame < f; });
    return all.subspan(static_cast<std::size_t>(it - all.begin()));
}

Severity at_least_green(Severity s) { return s == Severity::none ? Severity::green : s; }

}  // namespace

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::none: return "none";
        case Severity::green: return "green";
        case Severity::yellow: return "yellow";
        case Severity::red: return "red";
    }
    return "none";
}

Severity severity(double stopped_duration_s, const EngineConfig& cfg) {
    if (stopped_duration_s >= cfg.severity_red_s) {
        return Severity::red;
    }
    if (stopped_duration_s >= cfg.severity_yellow_s) {
        return Severity::yellow;
    }
    if (stopped_duration_s >= cfg.severity_green_s) {
        return Severity::green;
    }
    return Severity::none;
}

std::optional<double> estimate_speed(std::span<const TrackState> states, int window) {
    if (states.size() < 2 || window <= 0) {
        return std::nullopt;
    }
    const auto& last = states.back();
    // Earliest state no more than `window` frames before the newest one.
    const auto first_it = std::lower_bound(states.begin(), states.end(), last.frame - window,
                                           [](const TrackState& s, int f) { return s.frame < f; });
    const auto& first = first_it == states.end() - 1 ? *(states.end() - 2) : *first_it;
    const double frames = last.frame - first.frame;
    return (last.bbox.center() - first.bbox.center()).norm() / frames;
}

bool in_scene(const BBoxd& bbox, double frame_width, double frame_height, double margin) {
    const auto c = bbox.center();
    return c.x() >= margin && c.x() <= frame_width - margin && c.y() >= margin && c.y() <= frame_height - margin;
}

std::string_view to_string(Propagation p) {
    switch (p) {
        case Propagation::propagated: return "propagated";
        case Propagation::already_observed: return "already observed at this frame";
        case Propagation::out_of_scene: return "out of scene";
        case Propagation::moving: return "moving";
        case Propagation::empty_track: return "empty track";
    }
    return "";
}

Propagation propagate_hypothetical(Track& track, int frame, const EngineConfig& cfg) {
    if (track.states.empty()) {
        return Propagation::empty_track;
    }
    if (track.current().frame >= frame) {
        return Propagation::already_observed;
    }
    if (!in_scene(track.current().bbox, cfg)) {
        return Propagation::out_of_scene;
    }
    const auto speed = estimate_speed(track, cfg.speed_window_frames);
    if (!speed || *speed >= cfg.speed_stop_threshold_px_per_frame) {
        return Propagation::moving;
    }
    append_hypothesized(track, frame);
    return Propagation::propagated;
}

AnomalyDetector::AnomalyDetector(EngineConfig cfg, RegionOfInterest roi, std::string video_id)
    : cfg_(std::move(cfg)), roi_(std::move(roi)), video_id_(std::move(video_id)) {
    cfg_.validate();
}

int AnomalyDetector::canonical_id(int tracker_id) const {
    const auto it = alias_.find(tracker_id);
    return it == alias_.end() ? tracker_id : it->second;
}

std::optional<int> AnomalyDetector::reidentify(int frame, const Observation& obs,
                                               const std::vector<int>& candidates) const {
    std::optional<int> best;
    double best_weight = -1.0;
    for (const int cid : candidates) {
        const auto& track = tracks_.at(cid);
        const auto& dwell = dwell_.at(cid);
        if (track.status == TrackStatus::exited || track.current().frame >= frame || !dwell.stopped_since_frame) {
            continue;
        }
        // Only identities whose tracker ids are all finished can be taken over.
        const auto& ids = tracker_ids_of_.at(cid);
        const bool finished = std::all_of(ids.begin(), ids.end(), [&](int id) {
            const auto it = tracker_last_frame_.find(id);
            return it != tracker_last_frame_.end() && it->second < frame;
        });
        if (!finished) {
            continue;
        }
        if (const auto g = gate(track.current(), obs.state.bbox, obs.state.feature, cfg_)) {
            const double w = edge_weight(g->iou, g->sim, cfg_);
            if (w > best_weight) {
                best_weight = w;
                best = cid;
            }
        }
    }
    return best;
}

void AnomalyDetector::close_stop(DwellState& dwell, int end_frame) {
    if (!dwell.open_event) {
        return;
    }
    auto& e = events_[*dwell.open_event];
    e.end_s = std::max(e.start_s, end_frame / cfg_.fps);
    e.confidence = confidence_of(dwell);
    e.severity = std::max(e.severity, at_least_green(severity(*e.end_s - e.start_s, cfg_)));
    dwell.open_event.reset();
}

void AnomalyDetector::retire(Track& track, DwellState& dwell) {
    if (dwell.stopped_since_frame) {
        close_stop(dwell, dwell.last_stopped_frame);
        dwell.reset();
    }
    track.status = TrackStatus::exited;
}

void AnomalyDetector::update_dwell(int frame, Track& track, DwellState& dwell) {
    const auto& cur = track.current();
    const Point2d center = cur.bbox.center();

    if (dwell.stopped_since_frame) {
        if ((center - dwell.anchor).norm() > cfg_.stop_radius_px) {
            close_stop(dwell, dwell.last_stopped_frame);
            dwell.moving_since_frame = dwell.last_stopped_frame;
            dwell.reset();
            return;
        }
        dwell.dwell_frames = frame - *dwell.stopped_since_frame;
        if (cur.source == StateSource::hypothesized) {
            ++dwell.hypothesized_frames;
        } else {
            dwell.last_detected_stopped_frame = frame;
        }
        dwell.last_stopped_frame = frame;
    } else {
        const auto recent = states_since(track, dwell.moving_since_frame);
        const auto speed = estimate_speed(recent, cfg_.speed_window_frames);
        if (!speed || *speed >= cfg_.speed_stop_threshold_px_per_frame) {
            return;
        }
        // Walk back to the first state of the current stationary run.
        std::size_t k = recent.size() - 1;
        while (k > 0 && (recent[k - 1].bbox.center() - center).norm() <= cfg_.stop_radius_px) {
            --k;
        }
        dwell.stopped_since_frame = recent[k].frame;
        dwell.anchor = center;
        dwell.dwell_frames = frame - recent[k].frame;
        dwell.hypothesized_frames = 0;
        dwell.last_detected_stopped_frame = recent[k].frame;
        for (std::size_t i = k; i < recent.size(); ++i) {
            if (recent[i].source == StateSource::hypothesized) {
                dwell.hypothesized_frames += i > k ? 1 : 0;
            } else {
                dwell.last_detected_stopped_frame = recent[i].frame;
            }
        }
        dwell.last_stopped_frame = frame;
    }

    if (dwell.dwell_frames >= cfg_.dwell_threshold_frames && !dwell.alarm_raised) {
        AnomalyEvent e;
        e.video_id = video_id_;
        e.track_id = track.id;
        e.start_s = *dwell.stopped_since_frame / cfg_.fps;
        e.confidence = confidence_of(dwell);
        e.severity = at_least_green(severity(dwell.dwell_frames / cfg_.fps, cfg_));
        dwell.alarm_raised = true;
        dwell.open_event = events_.size();
        events_.push_back(std::move(e));
    } else if (dwell.open_event) {
        auto& e = events_[*dwell.open_event];
        e.confidence = confidence_of(dwell);
        e.severity = std::max(e.severity, at_least_green(severity(dwell.dwell_frames / cfg_.fps, cfg_)));
    }
}

std::vector<AnomalyEvent> AnomalyDetector::update(int frame, std::span<const Observation> observations) {
    if (last_frame_ && frame <= *last_frame_) {
        throw std::invalid_argument("AnomalyDetector::update: frame " + std::to_string(frame) +
                                    " does not follow frame " + std::to_string(*last_frame_));
    }
    last_frame_ = frame;
    const std::size_t events_before = events_.size();

    // Spatial structure: where every live track was last seen.
    using Tree = QuadTree<double, int>;
    Tree tree(Tree::Box(Point2d(0.0, 0.0), Point2d(cfg_.frame_width, cfg_.frame_height)),
              static_cast<std::size_t>(cfg_.quadtree_capacity), cfg_.quadtree_max_depth);
    for (const auto& [id, track] : tracks_) {
        if (track.status != TrackStatus::exited) {
            const Point2d c = track.current().bbox.center();
            if (tree.bounds().contains(c)) {
                tree.insert(c, id);
            }
        }
    }

    std::vector<const Observation*> known;
    std::vector<const Observation*> fresh;
    for (const auto& obs : observations) {
        if (obs.state.frame != frame) {
            throw std::invalid_argument("AnomalyDetector::update: observation from another frame");
        }
        tracker_last_frame_[obs.track_id] = obs.track_last_frame;
        (alias_.count(obs.track_id) || tracks_.count(obs.track_id) ? known : fresh).push_back(&obs);
    }

    std::set<int> observed;
    auto observe = [&](int cid, const Observation& obs) {
        auto [it, inserted] = tracks_.try_emplace(cid);
        Track& track = it->second;
        if (inserted) {
            track.id = cid;
            dwell_[cid].track_id = cid;
            tracker_ids_of_[cid].push_back(obs.track_id);
        }
        TrackState s = obs.state;
        s.source = StateSource::detected;
        track.states.push_back(std::move(s));
        track.status = TrackStatus::active;
        track.last_matched_frame = frame;
        extra_[cid].hypothesized_streak = 0;
        observed.insert(cid);
    };

    for (const Observation* obs : known) {
        int cid = canonical_id(obs->track_id);
        if (observed.count(cid) || tracks_.at(cid).status == TrackStatus::exited) {
            // The identity was claimed elsewhere; give this tracker id its own track again.
            alias_.erase(obs->track_id);
            cid = obs->track_id;
            if (tracks_.count(cid) && (observed.count(cid) || tracks_.at(cid).status == TrackStatus::exited)) {
                continue;
            }
        }
        observe(cid, *obs);
    }

    for (const Observation* obs : fresh) {
        auto candidates = tree.query_radius(obs->state.bbox.center(), cfg_.quadtree_radius_px);
        std::sort(candidates.begin(), candidates.end());
        std::erase_if(candidates, [&](int cid) { return observed.count(cid) > 0; });
        const auto match = reidentify(frame, *obs, candidates);
        if (match) {
            alias_[obs->track_id] = *match;
            tracker_ids_of_[*match].push_back(obs->track_id);
            observe(*match, *obs);
        } else {
            observe(obs->track_id, *obs);
        }
    }

    // Temporal structure: tracks that went unobserved this frame.
    for (auto& [id, track] : tracks_) {
        if (observed.count(id) || track.status == TrackStatus::exited) {
            continue;
        }
        auto& dwell = dwell_[id];
        auto& extra = extra_[id];
        if (!in_scene(track.current().bbox, cfg_)) {
            retire(track, dwell);
            continue;
        }
        bool propagated = false;
        if (in_roi(track, roi_) && extra.hypothesized_streak < cfg_.max_hypothesized_frames) {
            const auto speed = estimate_speed(states_since(track, dwell.moving_since_frame), cfg_.speed_window_frames);
            if (speed && *speed < cfg_.speed_stop_threshold_px_per_frame) {
                append_hypothesized(track, frame);
                ++extra.hypothesized_streak;
                propagated = true;
            }
        }
        track.status = TrackStatus::lost;
        if (!propagated) {
            if (dwell.stopped_since_frame) {
                close_stop(dwell, dwell.last_detected_stopped_frame);
                dwell.reset();
            }
            if (frame - track.current().frame > cfg_.max_lost_frames) {
                track.status = TrackStatus::exited;
            }
        }
    }

    for (auto& [id, track] : tracks_) {
        if (track.status == TrackStatus::exited || track.current().frame != frame) {
            continue;
        }
        if (!in_roi(track, roi_) || !in_scene(track.current().bbox, cfg_)) {
            continue;
        }
        update_dwell(frame, track, dwell_[id]);
    }

    return {events_.begin() + static_cast<std::ptrdiff_t>(events_before), events_.end()};
}

std::vector<AnomalyEvent> AnomalyDetector::finalize(int last_frame) {
    for (auto& [id, dwell] : dwell_) {
        if (dwell.open_event) {
            auto& e = events_[*dwell.open_event];
            e.end_s = std::max(e.start_s, last_frame / cfg_.fps);
            e.confidence = confidence_of(dwell);
            dwell.open_event.reset();
        }
    }
    return events_;
}

AnomalyResult analyze_anomalies(std::span<const Track> tracks, const EngineConfig& cfg,
                                std::optional<RegionOfInterest> roi, const std::string& video_id) {
    int first = INT_MAX;
    int last = INT_MIN;
    for (const auto& t : tracks) {
        for (const auto& s : t.states) {
            if (s.source == StateSource::detected) {
                first = std::min(first, s.frame);
                last = std::max(last, s.frame);
            }
        }
    }

    AnomalyResult result;
    if (first > last) {
        result.roi = roi.value_or(RegionOfInterest{});
        return result;
    }
    if (!roi) {
        const int freeze = first + cfg.roi_warmup_frames;
        roi = build_roi(collect_motion_points(tracks, cfg, freeze), freeze);
    }

    std::vector<std::vector<AnomalyDetector::Observation>> by_frame(static_cast<std::size_t>(last - first + 1));
    std::vector<const Track*> ordered;
    for (const auto& t : tracks) {
        ordered.push_back(&t);
    }
    std::sort(ordered.begin(), ordered.end(), [](const Track* a, const Track* b) { return a->id < b->id; });
    for (const Track* t : ordered) {
        int track_last = INT_MIN;
        for (const auto& s : t->states) {
            if (s.source == StateSource::detected) {
                track_last = std::max(track_last, s.frame);
            }
        }
        for (const auto& s : t->states) {
            if (s.source == StateSource::detected) {
                by_frame[static_cast<std::size_t>(s.frame - first)].push_back({t->id, s, track_last});
            }
        }
    }

    AnomalyDetector detector(cfg, *roi, video_id);
    for (int f = first; f <= last; ++f) {
        detector.update(f, by_frame[static_cast<std::size_t>(f - first)]);
    }
    result.events = detector.finalize(last);
    result.roi = detector.roi();
    for (const auto& [id, t] : detector.trajectories()) {
        result.trajectories.push_back(t);
    }
    return result;
}

std::string serialize_events(std::span<const AnomalyEvent> events) {
    std::ostringstream out;
    for (const auto& e : events) {
        out << e.video_id << ',' << e.track_id << ',' << text::format(e.start_s) << ','
            << (e.end_s ? text::format(*e.end_s) : std::string()) << ',' << text::format(e.confidence) << ','
            << to_string(e.severity) << '\n';
    }
    return out.str();
}

std::vector<AnomalyEvent> parse_events_text(std::string_view contents) {
    std::vector<AnomalyEvent> events;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() != 6 || f[0].empty()) {
            throw DataError("expected video_id,track_id,start_s,end_s,confidence,severity", line_no);
        }
        try {
            AnomalyEvent e;
            e.video_id = std::string(f[0]);
            e.track_id = static_cast<int>(text::to_int(f[1]));
            e.start_s = text::to_double(f[2]);
            if (!f[3].empty()) {
                e.end_s = text::to_double(f[3]);
                if (*e.end_s < e.start_s) {
                    throw DataError("end_s precedes start_s");
                }
            }
            e.confidence = text::to_double(f[4]);
            if (e.confidence < 0.0 || e.confidence > 1.0) {
                throw DataError("confidence outside [0,1]");
            }
            if (f[5] == "green") {
                e.severity = Severity::green;
            } else if (f[5] == "yellow") {
                e.severity = Severity::yellow;
            } else if (f[5] == "red") {
                e.severity = Severity::red;
            } else {
                throw DataError("unknown severity '" + std::string(f[5]) + "'");
            }
            events.push_back(std::move(e));
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    return events;
}

std::vector<AnomalyEvent> parse_events(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_events_text(contents);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace stallwatch
