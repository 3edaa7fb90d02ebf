// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/anomaly.hpp"
#include "stallwatch/synth.hpp"
#include "stallwatch/text.hpp"

#include "support/scenarios.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

namespace stallwatch {
namespace {

TrackState at(int frame, double cx, double cy, StateSource src = StateSource::detected) {
    return {frame, BBoxd(cx - 30, cy - 20, 60, 40), std::nullopt, src};
}

/// One vehicle that drives at 4 px/frame for `approach` frames, stands still for
/// `stop` frames, then drives on (or stays when `leaves` is false).
synth::ScenarioSpec single_stop(int approach, int stop, bool leaves, int duration) {
    synth::ScenarioSpec spec;
    spec.video_id = "one";
    spec.duration_frames = duration;
    synth::VehicleSpec v;
    v.box = BBoxd(100, 500, 60, 40);
    v.segments = {{approach, Point2d(4, 0)}, {stop, Point2d::Zero()}};
    if (leaves) {
        v.segments.push_back({1, Point2d(4, 0)});
    }
    spec.vehicles.push_back(v);
    return spec;
}

/// Feeds a single-vehicle detection stream to a detector frame by frame;
/// returns the frame at which each event was raised.
std::vector<int> replay(AnomalyDetector& detector, const std::vector<DetectionRecord>& dets, int first, int last) {
    std::map<int, std::vector<AnomalyDetector::Observation>> by_frame;
    for (const auto& d : dets) {
        by_frame[d.frame].push_back({1, {d.frame, d.bbox, d.feature, StateSource::detected}});
    }
    std::vector<int> raised;
    for (int f = first; f <= last; ++f) {
        const auto it = by_frame.find(f);
        const auto events = detector.update(f, it == by_frame.end() ? std::span<const AnomalyDetector::Observation>{}
                                                                   : std::span(it->second));
        for (std::size_t i = 0; i < events.size(); ++i) {
            raised.push_back(f);
        }
    }
    return raised;
}

TEST(Severity, BoundariesAndExamples) {
    const EngineConfig cfg;
    EXPECT_EQ(severity(30.0, cfg), Severity::none);
    EXPECT_EQ(severity(59.999, cfg), Severity::none);
    EXPECT_EQ(severity(60.0, cfg), Severity::green);
    EXPECT_EQ(severity(119.999, cfg), Severity::green);
    EXPECT_EQ(severity(120.0, cfg), Severity::yellow);
    EXPECT_EQ(severity(180.0, cfg), Severity::red);
    EXPECT_EQ(severity(200.0, cfg), Severity::red);
}

TEST(Severity, MonotoneForOrderedBoundaries) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        EngineConfig cfg;
        cfg.severity_green_s = 100.0 * unit(rng);
        cfg.severity_yellow_s = cfg.severity_green_s + 100.0 * unit(rng);
        cfg.severity_red_s = cfg.severity_yellow_s + 100.0 * unit(rng);
        Severity prev = Severity::none;
        for (double s = 0.0; s < 400.0; s += 0.25) {
            const Severity cur = severity(s, cfg);
            EXPECT_GE(static_cast<int>(cur), static_cast<int>(prev));
            prev = cur;
        }
    }
}

TEST(EstimateSpeed, Examples) {
    std::vector<TrackState> still;
    std::vector<TrackState> drift;
    std::vector<TrackState> mixed;
    for (int f = 0; f < 100; ++f) {
        still.push_back(at(f, 200, 200));
        drift.push_back(at(f, 200 + 2.0 * f, 200));
    }
    for (int f = 0; f <= 100; ++f) {
        mixed.push_back(at(f, 200 + 4.0 * std::min(f, 50), 200));
    }
    EXPECT_DOUBLE_EQ(*estimate_speed(still, 100), 0.0);
    EXPECT_DOUBLE_EQ(*estimate_speed(drift, 100), 2.0);
    EXPECT_DOUBLE_EQ(*estimate_speed(mixed, 100), 2.0);
    EXPECT_DOUBLE_EQ(*estimate_speed(mixed, 50), 0.0);
    EXPECT_FALSE(estimate_speed(std::vector<TrackState>{at(0, 1, 1)}, 100));
    EXPECT_FALSE(estimate_speed(std::vector<TrackState>{}, 100));
}

TEST(EstimateSpeed, GapsUseFrameSpan) {
    const std::vector<TrackState> s{at(0, 0, 0), at(10, 30, 40)};
    EXPECT_DOUBLE_EQ(*estimate_speed(s, 100), 5.0);
    // A window shorter than the gap still uses the last two states.
    EXPECT_DOUBLE_EQ(*estimate_speed(s, 3), 5.0);
}

TEST(InScene, MarginRule) {
    EXPECT_TRUE(in_scene(BBoxd(930, 510, 60, 60), 1920, 1080, 10));
    EXPECT_FALSE(in_scene(BBoxd(-25, 500, 60, 60), 1920, 1080, 10));  // center x = 5
    EXPECT_TRUE(in_scene(BBoxd(-20, 500, 60, 60), 1920, 1080, 10));   // center x = 10
    EXPECT_TRUE(in_scene(BBoxd(1880, 1040, 60, 60), 1920, 1080, 10));  // center (1910, 1070)
    EXPECT_FALSE(in_scene(BBoxd(1880.5, 500, 60, 60), 1920, 1080, 10));
}

TEST(PropagateHypothetical, StoppedTrack) {
    const EngineConfig cfg;
    Track t;
    t.id = 3;
    for (int f = 0; f < 20; ++f) {
        t.states.push_back(at(f, 500, 500));
    }
    EXPECT_EQ(propagate_hypothetical(t, 20, cfg), Propagation::propagated);
    EXPECT_EQ(t.states.size(), 21u);
    EXPECT_EQ(t.current().bbox, t.states[19].bbox);
    EXPECT_EQ(t.current().source, StateSource::hypothesized);
    EXPECT_EQ(t.id, 3);
    for (int f = 21; f < 31; ++f) {
        EXPECT_EQ(propagate_hypothetical(t, f, cfg), Propagation::propagated);
    }
    EXPECT_EQ(t.states.size(), 31u);
    EXPECT_EQ(t.current().bbox.center(), Point2d(500, 500));
    EXPECT_EQ(propagate_hypothetical(t, 30, cfg), Propagation::already_observed);
}

TEST(PropagateHypothetical, PreconditionsLeaveTrackUntouched) {
    const EngineConfig cfg;
    Track moving;
    Track edge;
    Track single;
    for (int f = 0; f < 20; ++f) {
        moving.states.push_back(at(f, 500 + 3.0 * f, 500));
        edge.states.push_back(at(f, 4, 500));
    }
    single.states.push_back(at(0, 500, 500));
    Track empty;
    EXPECT_EQ(propagate_hypothetical(moving, 20, cfg), Propagation::moving);
    EXPECT_EQ(propagate_hypothetical(edge, 20, cfg), Propagation::out_of_scene);
    EXPECT_EQ(propagate_hypothetical(single, 1, cfg), Propagation::moving);
    EXPECT_EQ(propagate_hypothetical(empty, 1, cfg), Propagation::empty_track);
    EXPECT_EQ(moving.states.size(), 20u);
    EXPECT_EQ(edge.states.size(), 20u);
    EXPECT_EQ(single.states.size(), 1u);
}

TEST(AnomalyDetector, MovingVehicleNeverAlarms) {
    synth::ScenarioSpec spec;
    spec.duration_frames = 4000;
    synth::VehicleSpec v;
    v.box = BBoxd(20, 500, 60, 40);
    v.segments = {{4000, Point2d(0.6, 0.0)}};  // just above the stop speed
    spec.vehicles.push_back(v);
    const auto data = synth::generate(spec);
    AnomalyDetector detector(EngineConfig{}, RegionOfInterest{}, "v");
    EXPECT_TRUE(replay(detector, data.detections, 0, 3999).empty());
}

TEST(AnomalyDetector, StopAtFrame100RaisesAtFrame1900) {
    const auto data = synth::generate(single_stop(100, 5000, false, 2500));
    AnomalyDetector detector(EngineConfig{}, RegionOfInterest{}, "v");
    const auto raised = replay(detector, data.detections, 0, 2499);
    ASSERT_EQ(raised, std::vector<int>{1900});
    const auto& e = detector.events().front();
    EXPECT_NEAR(e.start_s, 100.0 / 30.0, 1e-12);
    EXPECT_EQ(e.track_id, 1);
    EXPECT_FALSE(e.end_s.has_value());
    EXPECT_EQ(e.severity, Severity::green);
    const auto closed = detector.finalize(2499);
    ASSERT_EQ(closed.size(), 1u);
    EXPECT_NEAR(*closed[0].end_s, 2499.0 / 30.0, 1e-12);
    EXPECT_DOUBLE_EQ(closed[0].confidence, 1.0);
}

TEST(AnomalyDetector, ShortStopThenLeaveRaisesNothing) {
    const auto data = synth::generate(single_stop(100, 1700, true, 2600));
    const auto tracks = track_detections(data.detections, EngineConfig{});
    const auto result = analyze_anomalies(tracks, EngineConfig{}, RegionOfInterest{}, "v");
    EXPECT_TRUE(result.events.empty());
}

TEST(AnomalyDetector, EventIffDwellReachesThreshold) {
    std::mt19937_64 rng(72);
    std::uniform_int_distribution<int> duration(1700, 1900);
    std::vector<int> durations{1799, 1800};
    for (int i = 0; i < 8; ++i) {
        durations.push_back(duration(rng));
    }
    for (const int d : durations) {
        const auto data = synth::generate(single_stop(150, d, true, 150 + d + 200));
        const auto tracks = track_detections(data.detections, EngineConfig{});
        const auto result = analyze_anomalies(tracks, EngineConfig{}, RegionOfInterest{}, "v");
        EXPECT_EQ(result.events.size(), d >= 1800 ? 1u : 0u) << "stop of " << d << " frames";
        for (const auto& e : result.events) {
            EXPECT_NEAR(e.start_s, 150.0 / 30.0, 1e-12);  // start = onset / fps
            ASSERT_TRUE(e.end_s);
            EXPECT_NEAR(*e.end_s, (150.0 + d) / 30.0, 1e-12);
        }
    }
}

TEST(AnomalyDetector, HalfHypothesizedGivesConfidenceHalf) {
    EngineConfig cfg;
    cfg.max_hypothesized_frames = 100000;
    const auto data = synth::generate(single_stop(100, 5000, false, 1101));
    AnomalyDetector detector(cfg, RegionOfInterest{}, "v");
    replay(detector, data.detections, 0, 2100);  // detections end at 1100, then 1000 unobserved frames
    const auto events = detector.finalize(2100);
    ASSERT_EQ(events.size(), 1u);
    EXPECT_DOUBLE_EQ(events[0].confidence, 0.5);
    const auto& traj = detector.trajectories().at(1);
    EXPECT_EQ(traj.current().frame, 2100);
    EXPECT_EQ(traj.current().source, StateSource::hypothesized);
}

TEST(AnomalyDetector, NothingToFinalize) {
    AnomalyDetector detector(EngineConfig{}, RegionOfInterest{}, "v");
    EXPECT_TRUE(detector.finalize(0).empty());
    detector.update(0, {});
    EXPECT_THROW(detector.update(0, {}), std::invalid_argument);
}

TEST(AnomalyDetector, OutOfSceneTracksNeverAccrueDwell) {
    // Parked with its center 5 px from the left edge: inside the frame, outside the scene margin.
    synth::ScenarioSpec spec;
    spec.duration_frames = 2500;
    synth::VehicleSpec v;
    v.box = BBoxd(-25, 500, 60, 40);
    v.segments = {{1, Point2d::Zero()}};
    spec.vehicles.push_back(v);
    const auto data = synth::generate(spec);
    AnomalyDetector detector(EngineConfig{}, RegionOfInterest{}, "v");
    replay(detector, data.detections, 0, 2499);
    EXPECT_TRUE(detector.events().empty());
    EXPECT_EQ(detector.dwell_states().at(1).dwell_frames, 0);
}

TEST(AnomalyDetector, OccludedStopKeepsIdentity) {
    auto spec = single_stop(100, 5000, false, 1000);
    spec.vehicles[0].occlusions.push_back({200, 260});
    const auto data = synth::generate(spec);
    const auto tracks = track_detections(data.detections, EngineConfig{});
    ASSERT_EQ(tracks.size(), 2u);  // the tracker alone gives up during the gap
    const auto result = analyze_anomalies(tracks, EngineConfig{}, RegionOfInterest{}, "v");
    ASSERT_EQ(result.trajectories.size(), 1u);
    const auto& t = result.trajectories.front();
    EXPECT_EQ(t.id, 1);
    ASSERT_EQ(t.states.size(), 1000u);
    for (int f = 0; f < 1000; ++f) {
        EXPECT_EQ(t.states[static_cast<std::size_t>(f)].frame, f);
        const bool hidden = f >= 200 && f < 260;
        EXPECT_EQ(t.states[static_cast<std::size_t>(f)].source == StateSource::hypothesized, hidden) << f;
    }
}

TEST(AnomalyDetector, SeverityNeverDecreasesDuringAnEvent) {
    const auto data = synth::generate(single_stop(100, 6500, false, 6800));
    AnomalyDetector detector(EngineConfig{}, RegionOfInterest{}, "v");
    std::map<int, std::vector<DetectionRecord>> by_frame;
    for (const auto& d : data.detections) {
        by_frame[d.frame].push_back(d);
    }
    std::vector<Severity> seen;
    for (int f = 0; f < 6800; ++f) {
        std::vector<AnomalyDetector::Observation> obs;
        for (const auto& d : by_frame[f]) {
            obs.push_back({1, {f, d.bbox, d.feature, StateSource::detected}});
        }
        detector.update(f, obs);
        if (!detector.events().empty()) {
            seen.push_back(detector.events().front().severity);
        }
    }
    ASSERT_FALSE(seen.empty());
    EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
    EXPECT_EQ(seen.front(), Severity::green);
    EXPECT_EQ(seen.back(), Severity::red);
}

TEST(AnalyzeAnomalies, ParkedOffRoadVehicleIsIgnored) {
    synth::ScenarioSpec spec;
    spec.video_id = "station";
    spec.duration_frames = 5000;
    for (int lane = 0; lane < 2; ++lane) {
        synth::VehicleSpec v;
        v.entry_frame = 10 * lane;
        v.box = BBoxd(0, 200.0 + 100.0 * lane, 60, 40);
        v.segments = {{1, Point2d(5, 0)}};
        spec.vehicles.push_back(v);
    }
    synth::VehicleSpec parked;
    parked.box = BBoxd(900, 800, 60, 40);
    parked.segments = {{1, Point2d::Zero()}};
    parked.off_road = true;
    spec.vehicles.push_back(parked);
    const auto data = synth::generate(spec);
    EXPECT_TRUE(data.gt_anomalies.empty());
    const EngineConfig cfg;
    const auto tracks = track_detections(data.detections, cfg);
    const auto result = analyze_anomalies(tracks, cfg, std::nullopt, spec.video_id);
    EXPECT_FALSE(result.roi.empty());
    EXPECT_FALSE(in_roi(Point2d(930, 820), result.roi));
    EXPECT_TRUE(result.events.empty());

    // Fail-open: without a region the same vehicle is reported.
    const auto open = analyze_anomalies(tracks, cfg, RegionOfInterest{}, spec.video_id);
    EXPECT_EQ(open.events.size(), 1u);
}

TEST(AnalyzeAnomalies, StalledTrafficScenario) {
    const auto spec = scenarios::stalled_traffic();
    const auto data = synth::generate(spec);
    const EngineConfig cfg;
    const auto tracks = track_detections(data.detections, cfg);
    const auto result = analyze_anomalies(tracks, cfg, std::nullopt, spec.video_id);
    ASSERT_EQ(result.events.size(), 2u);
    EXPECT_EQ(result.events[0].severity, Severity::green);
    EXPECT_EQ(result.events[1].severity, Severity::red);
    for (const auto& e : result.events) {
        EXPECT_LT(e.confidence, 1.0 + 1e-12);
        EXPECT_GT(e.confidence, 0.9);
    }
}

TEST(EventFile, RoundTripAndErrors) {
    std::vector<AnomalyEvent> events{{"cam1", 4, 100.0 / 30.0, std::nullopt, 1.0, Severity::green},
                                     {"cam1", 9, 12.5, 212.5, 0.75, Severity::red}};
    const auto text = serialize_events(events);
    EXPECT_EQ(text, "cam1,4,3.3333333333333335,,1,green\ncam1,9,12.5,212.5,0.75,red\n");
    const auto back = parse_events_text(text);
    EXPECT_EQ(serialize_events(back), text);
    EXPECT_THROW(parse_events_text("cam1,4,10,5,1,green\n"), DataError);
    EXPECT_THROW(parse_events_text("cam1,4,10,,1,purple\n"), DataError);
    EXPECT_THROW(parse_events_text("cam1,4,10,,2,green\n"), DataError);
    EXPECT_THROW(parse_events_text("cam1,4,10\n"), DataError);
}

}  // namespace
}  // namespace stallwatch
