// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/association.hpp"

#include "stallwatch/assignment.hpp"
#include "stallwatch/text.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace stallwatch {

std::string_view to_string(StateSource source) {
    return source == StateSource::detected ? "detected" : "hypothesized";
}

std::optional<GateResult> gate(const TrackState& track_state, const BBoxd& bbox,
                               const std::optional<FeatureVector>& feature, const EngineConfig& cfg) {
    GateResult g;
    g.dist = center_distance(track_state.bbox, bbox);
    if (g.dist > cfg.dist_gate_px) {
        return std::nullopt;
    }
    g.iou = iou(track_state.bbox, bbox);
    if (g.iou < cfg.iou_gate) {
        return std::nullopt;
    }
    if (track_state.feature && feature) {
        g.sim = cosine_similarity(*track_state.feature, *feature);
    } else {
        if (cfg.require_features) {
            return std::nullopt;
        }
        g.sim = 1.0;
        g.sim_assumed = true;
    }
    if (g.sim < cfg.sim_gate) {
        return std::nullopt;
    }
    return g;
}

double edge_weight(double iou, double sim, const EngineConfig& cfg) {
    return cfg.alpha * iou + cfg.beta * std::clamp(sim, 0.0, 1.0);
}

AssociationGraph build_graph(std::span<const Track> tracks, std::span<const DetectionRecord> detections,
                             const EngineConfig& cfg) {
    AssociationGraph graph;
    graph.right_count = static_cast<int>(detections.size());
    for (const auto& track : tracks) {
        if (track.status == TrackStatus::exited || track.states.empty()) {
            continue;
        }
        const int left = static_cast<int>(graph.left.size());
        graph.left.push_back(track.id);
        const auto& last = track.current();
        for (std::size_t d = 0; d < detections.size(); ++d) {
            if (const auto g = gate(last, detections[d], cfg)) {
                graph.edges.push_back({left, static_cast<int>(d), edge_weight(g->iou, g->sim, cfg), *g});
            }
        }
    }
    return graph;
}

std::vector<std::pair<int, int>> solve_matching(const AssociationGraph& graph) {
    if (graph.edges.empty()) {
        return {};
    }
    // Rows in ascending track id so equal-weight alternatives resolve the same way every run.
    std::vector<int> order(graph.left.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) { return graph.left[a] < graph.left[b]; });
    std::vector<int> row_of_left(graph.left.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        row_of_left[order[r]] = static_cast<int>(r);
    }

    const auto rows = static_cast<Eigen::Index>(graph.left.size());
    const auto cols = static_cast<Eigen::Index>(graph.right_count);
    WeightMatrix<double> weights = WeightMatrix<double>::Zero(rows, cols);
    AllowedMask allowed = AllowedMask::Constant(rows, cols, false);
    for (const auto& e : graph.edges) {
        weights(row_of_left[e.left], e.right) = e.weight;
        allowed(row_of_left[e.left], e.right) = true;
    }

    std::vector<std::pair<int, int>> result;
    for (const auto& [r, c] : max_weight_matching(weights, allowed)) {
        result.emplace_back(graph.left[order[r]], c);
    }
    std::sort(result.begin(), result.end());
    return result;
}

Tracker::Tracker(EngineConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Tracker::StepResult Tracker::step(int frame, std::span<const DetectionRecord> detections) {
    if (last_frame_ && frame <= *last_frame_) {
        throw std::invalid_argument("Tracker::step: frame " + std::to_string(frame) +
                                    " does not follow frame " + std::to_string(*last_frame_));
    }
    last_frame_ = frame;

    StepResult result;
    const auto graph = build_graph(tracks_, detections, cfg_);
    result.matched = solve_matching(graph);

    std::map<int, std::size_t> index_of_id;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        index_of_id[tracks_[i].id] = i;
    }
    std::vector<bool> det_used(detections.size(), false);
    std::vector<bool> track_matched(tracks_.size(), false);
    for (const auto& [id, d] : result.matched) {
        auto& track = tracks_[index_of_id.at(id)];
        const auto& det = detections[static_cast<std::size_t>(d)];
        track.states.push_back({frame, det.bbox, det.feature, StateSource::detected});
        track.status = TrackStatus::active;
        track.last_matched_frame = frame;
        det_used[static_cast<std::size_t>(d)] = true;
        track_matched[index_of_id.at(id)] = true;
    }

    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        auto& track = tracks_[i];
        if (track_matched[i] || track.status == TrackStatus::exited) {
            continue;
        }
        if (frame - track.last_matched_frame > cfg_.max_lost_frames) {
            track.status = TrackStatus::exited;
        } else {
            track.status = TrackStatus::lost;
            result.unmatched.push_back(track.id);
        }
    }

    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (det_used[d]) {
            continue;
        }
        Track track;
        track.id = next_id_++;
        track.states.push_back({frame, detections[d].bbox, detections[d].feature, StateSource::detected});
        track.last_matched_frame = frame;
        tracks_.push_back(std::move(track));
        result.spawned.push_back(tracks_.back().id);
    }
    return result;
}

std::vector<Track> track_detections(std::span<const DetectionRecord> detections, const EngineConfig& cfg) {
    Tracker tracker(cfg);
    if (detections.empty()) {
        return {};
    }
    std::vector<DetectionRecord> sorted(detections.begin(), detections.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
    const int first = sorted.front().frame;
    const int last = sorted.back().frame;
    std::size_t cursor = 0;
    for (int frame = first; frame <= last; ++frame) {
        const std::size_t begin = cursor;
        while (cursor < sorted.size() && sorted[cursor].frame == frame) {
            ++cursor;
        }
        tracker.step(frame, std::span(sorted).subspan(begin, cursor - begin));
    }
    return tracker.tracks();
}

std::string serialize_tracks(std::span<const Track> tracks) {
    struct Row {
        int frame;
        int id;
        const TrackState* state;
    };
    std::vector<Row> rows;
    for (const auto& t : tracks) {
        for (const auto& s : t.states) {
            rows.push_back({s.frame, t.id, &s});
        }
    }
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return std::tie(a.frame, a.id) < std::tie(b.frame, b.id); });
    std::ostringstream out;
    for (const auto& r : rows) {
        const auto& b = r.state->bbox;
        out << r.frame << ',' << r.id << ',' << text::format(b.x) << ',' << text::format(b.y) << ','
            << text::format(b.w) << ',' << text::format(b.h) << ',' << to_string(r.state->source) << '\n';
    }
    return out.str();
}

std::vector<Track> parse_tracks_text(std::string_view contents) {
    std::map<int, Track> by_id;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() != 7) {
            throw DataError("expected frame,id,x,y,w,h,source", line_no);
        }
        try {
            TrackState s;
            const auto frame = text::to_int(f[0]);
            if (frame < 0) {
                throw DataError("negative frame index");
            }
            s.frame = static_cast<int>(frame);
            const auto id = static_cast<int>(text::to_int(f[1]));
            s.bbox = BBoxd(text::to_double(f[2]), text::to_double(f[3]), text::to_double(f[4]),
                           text::to_double(f[5]));
            if (!s.bbox.valid()) {
                throw DataError("bounding box width and height must be positive");
            }
            if (f[6] == "detected") {
                s.source = StateSource::detected;
            } else if (f[6] == "hypothesized") {
                s.source = StateSource::hypothesized;
            } else {
                throw DataError("unknown source '" + std::string(f[6]) + "'");
            }
            auto& track = by_id[id];
            track.id = id;
            if (!track.states.empty() && track.states.back().frame >= s.frame) {
                throw DataError("track " + std::to_string(id) + " frames not strictly increasing");
            }
            if (s.source == StateSource::detected) {
                track.last_matched_frame = s.frame;
            }
            track.states.push_back(std::move(s));
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    std::vector<Track> tracks;
    tracks.reserve(by_id.size());
    for (auto& [id, t] : by_id) {
        tracks.push_back(std::move(t));
    }
    return tracks;
}

std::vector<Track> parse_tracks(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_tracks_text(contents);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace stallwatch
