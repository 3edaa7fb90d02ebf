// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "support/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stallwatch::scenarios {

namespace {

constexpr double kLaneTop = 12.0;
constexpr double kLanePitch = 52.0;
constexpr double kBoxW = 60.0;
constexpr double kBoxH = 40.0;

}  // namespace

synth::ScenarioSpec lane_traffic(std::uint64_t seed, int vehicles, int frames) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> entry(0, frames / 2);
    std::uniform_int_distribution<int> speed(1, 8);
    std::uniform_int_distribution<int> run_length(50, 400);
    std::uniform_int_distribution<int> pause_length(20, 200);
    std::uniform_int_distribution<int> segment_count(1, 4);
    std::bernoulli_distribution coin(0.5);

    synth::ScenarioSpec spec;
    spec.video_id = "lanes" + std::to_string(seed);
    spec.duration_frames = frames;
    spec.rng_seed = seed;
    for (int i = 0; i < vehicles; ++i) {
        synth::VehicleSpec v;
        const bool rightward = coin(rng);
        v.entry_frame = entry(rng);
        v.box = BBoxd(rightward ? 0.0 : spec.frame_width - kBoxW, kLaneTop + kLanePitch * i, kBoxW, kBoxH);
        const double dir = rightward ? 1.0 : -1.0;
        const int segments = segment_count(rng);
        for (int s = 0; s < segments; ++s) {
            if (s > 0 && coin(rng)) {
                v.segments.push_back({pause_length(rng), Point2d::Zero()});
            }
            v.segments.push_back({run_length(rng), Point2d(dir * speed(rng), 0.0)});
        }
        spec.vehicles.push_back(std::move(v));
    }
    return spec;
}

synth::ScenarioSpec stalled_traffic(const StallPlan& plan) {
    synth::ScenarioSpec spec;
    spec.video_id = "stalls";
    spec.duration_frames = 9600;
    spec.rng_seed = plan.seed;
    spec.noise.bbox_jitter_px = plan.jitter_px;
    const double fps = spec.fps;
    const double right = spec.frame_width - kBoxW;

    auto vehicle = [&](int entry, double x, double lane_y) {
        synth::VehicleSpec v;
        v.entry_frame = entry;
        v.box = BBoxd(x, lane_y, kBoxW, kBoxH);
        return v;
    };

    // Through traffic on the outer lanes during the region warm-up.
    auto a = vehicle(0, 0.0, 180.0);
    a.segments = {{1, Point2d(4.0, 0.0)}};
    auto b = vehicle(0, right, 780.0);
    b.segments = {{1, Point2d(-4.0, 0.0)}};

    auto c = vehicle(0, 0.0, 380.0);
    c.segments = {{200, Point2d(4.0, 0.0)},
                  {static_cast<int>(std::lround(plan.first_stop_s * fps)), Point2d::Zero()},
                  {1, Point2d(4.0, 0.0)}};
    auto d = vehicle(100, right, 580.0);
    d.segments = {{300, Point2d(-4.0, 0.0)},
                  {static_cast<int>(std::lround(plan.second_stop_s * fps)), Point2d::Zero()},
                  {1, Point2d(-4.0, 0.0)}};
    auto e = vehicle(3000, 0.0, 480.0);
    e.segments = {{150, Point2d(4.0, 0.0)},
                  {static_cast<int>(std::lround(plan.third_stop_s * fps)), Point2d::Zero()},
                  {1, Point2d(4.0, 0.0)}};

    spec.vehicles = {a, b, c, d, e};
    if (plan.occlusion_frames > 0) {
        auto& occluded = spec.vehicles[static_cast<std::size_t>(2 + plan.occluded_vehicle)];
        const int onset = stop_onset_frame(occluded);
        const int mid = onset + occluded.segments[1].frames / 2;
        occluded.occlusions.push_back({mid, mid + plan.occlusion_frames});
    }
    return spec;
}

int stop_onset_frame(const synth::VehicleSpec& v, int k) {
    int frame = v.entry_frame;
    for (const auto& seg : v.segments) {
        if (seg.velocity.isZero() && k-- == 0) {
            return frame;
        }
        frame += seg.frames;
    }
    return -1;
}

std::optional<int> tracker_id_at_entry(std::span<const Track> tracks, const synth::Dataset& data, int identity) {
    const GroundTruthTrackRecord* first = nullptr;
    for (const auto& r : data.gt_tracks) {
        if (r.identity == identity && (first == nullptr || r.frame < first->frame)) {
            first = &r;
        }
    }
    if (first == nullptr) {
        return std::nullopt;
    }
    for (const auto& t : tracks) {
        if (!t.states.empty() && t.states.front().frame == first->frame && iou(t.states.front().bbox, first->bbox) > 0.5) {
            return t.id;
        }
    }
    return std::nullopt;
}

}  // namespace stallwatch::scenarios
