// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/synth.hpp"

#include "stallwatch/text.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace stallwatch::synth {

namespace {

bool inside_frame(const Point2d& c, const ScenarioSpec& spec) {
    return c.x() >= 0.0 && c.x() <= spec.frame_width && c.y() >= 0.0 && c.y() <= spec.frame_height;
}

Point2d velocity_at_step(const VehicleSpec& v, int step) {
    int start = 0;
    for (const auto& seg : v.segments) {
        if (step < start + seg.frames) {
            return seg.velocity;
        }
        start += seg.frames;
    }
    return v.segments.empty() ? Point2d::Zero() : v.segments.back().velocity;
}

bool occluded(const VehicleSpec& v, int frame) {
    return std::any_of(v.occlusions.begin(), v.occlusions.end(),
                       [frame](const auto& o) { return frame >= o.start_frame && frame < o.end_frame; });
}

FeatureVector base_feature(const ScenarioSpec& spec, std::size_t index) {
    const auto& v = spec.vehicles[index];
    std::seed_seq seq = v.feature_seed
                            ? std::seed_seq{std::uint32_t(*v.feature_seed), std::uint32_t(*v.feature_seed >> 32), 0x5eedu}
                            : std::seed_seq{std::uint32_t(spec.rng_seed), std::uint32_t(spec.rng_seed >> 32),
                                            std::uint32_t(index), 0xfea7u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    FeatureVector f(spec.feature_dim);
    do {
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            f[i] = normal(rng);
        }
    } while (f.norm() == 0.0);
    return f.normalized();
}

struct Stop {
    int onset_frame;
    int end_frame;
};

// Merged zero-velocity stretches as (first stationary frame, last stationary frame).
std::vector<Stop> stops_of(const VehicleSpec& v, int duration_frames) {
    std::vector<Stop> stops;
    int step = 0;
    for (std::size_t i = 0; i < v.segments.size(); ++i) {
        const auto& seg = v.segments[i];
        const bool last = i + 1 == v.segments.size();
        if (seg.velocity.isZero() && (seg.frames > 0 || last)) {
            const int onset = v.entry_frame + step;
            const int end = last ? duration_frames - 1 : onset + seg.frames;
            if (!stops.empty() && stops.back().end_frame == onset) {
                stops.back().end_frame = end;
            } else {
                stops.push_back({onset, end});
            }
        }
        step += seg.frames;
    }
    if (v.segments.empty()) {
        stops.push_back({v.entry_frame, duration_frames - 1});
    }
    return stops;
}

std::vector<std::string_view> fields_of(std::string_view value, std::size_t expected, std::size_t line_no) {
    auto f = text::split_csv(value);
    if (f.size() != expected) {
        throw DataError("expected " + std::to_string(expected) + " comma-separated values", line_no);
    }
    return f;
}

}  // namespace

void ScenarioSpec::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) {
            throw std::invalid_argument("scenario: " + msg);
        }
    };
    require(frame_width > 0.0 && frame_height > 0.0, "frame extent must be positive");
    require(fps > 0.0, "fps must be positive");
    require(duration_frames >= 0, "duration_frames must be >= 0");
    require(noise.bbox_jitter_px >= 0.0, "jitter must be >= 0");
    require(noise.miss_probability >= 0.0 && noise.miss_probability <= 1.0, "miss probability must lie in [0,1]");
    require(feature_dim >= 1, "feature_dim must be >= 1");
    require(feature_noise >= 0.0, "feature_noise must be >= 0");
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        const auto& v = vehicles[i];
        const std::string who = "vehicle " + std::to_string(i + 1) + ": ";
        require(v.entry_frame >= 0, who + "entry_frame must be >= 0");
        require(v.box.valid(), who + "box must have positive size");
        require(inside_frame(v.box.center(), *this), who + "enters outside the frame extent");
        for (const auto& s : v.segments) {
            require(s.frames >= 0, who + "segment length must be >= 0");
        }
        for (const auto& o : v.occlusions) {
            require(o.end_frame >= o.start_frame, who + "occlusion ends before it starts");
        }
    }
}

Dataset generate(const ScenarioSpec& spec) {
    spec.validate();
    Dataset out;
    std::mt19937_64 rng(spec.rng_seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const std::size_t n = spec.vehicles.size();
    std::vector<FeatureVector> bases;
    for (std::size_t i = 0; i < n; ++i) {
        bases.push_back(base_feature(spec, i));
    }
    std::vector<Point2d> position(n, Point2d::Zero());
    std::vector<bool> gone(n, false);

    for (int frame = 0; frame < spec.duration_frames; ++frame) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = spec.vehicles[i];
            if (gone[i] || frame < v.entry_frame) {
                continue;
            }
            bool moving = false;
            if (frame == v.entry_frame) {
                position[i] = Point2d(v.box.x, v.box.y);
            } else {
                const Point2d vel = velocity_at_step(v, frame - v.entry_frame - 1);
                position[i] += vel;
                moving = !vel.isZero();
            }
            const BBoxd box(position[i].x(), position[i].y(), v.box.w, v.box.h);
            if (!inside_frame(box.center(), spec)) {
                gone[i] = true;
                continue;
            }
            const int identity = static_cast<int>(i) + 1;
            out.gt_tracks.push_back({frame, identity, box});
            out.gt_moving.push_back(moving);

            if (occluded(v, frame)) {
                continue;
            }
            if (spec.noise.miss_probability > 0.0 && uniform(rng) < spec.noise.miss_probability) {
                continue;
            }
            DetectionRecord det;
            det.frame = frame;
            det.bbox = box;
            if (spec.noise.bbox_jitter_px > 0.0) {
                det.bbox.x += spec.noise.bbox_jitter_px * normal(rng);
                det.bbox.y += spec.noise.bbox_jitter_px * normal(rng);
            }
            det.confidence = 0.9;
            det.class_label = v.class_label;
            // feature_noise is the expected noise norm, spread evenly over the components.
            const double sigma = spec.feature_noise / std::sqrt(static_cast<double>(spec.feature_dim));
            FeatureVector f = bases[i];
            for (Eigen::Index k = 0; k < f.size(); ++k) {
                f[k] += sigma * normal(rng);
            }
            det.feature = f.norm() > 0.0 ? FeatureVector(f.normalized()) : bases[i];
            out.detections.push_back(std::move(det));
        }
    }

    // A stop counts only while the vehicle is still in the frame and for the part inside the stream.
    std::vector<int> last_present(n, -1);
    for (const auto& r : out.gt_tracks) {
        last_present[static_cast<std::size_t>(r.identity - 1)] = r.frame;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = spec.vehicles[i];
        if (v.off_road) {
            continue;
        }
        for (const auto& stop : stops_of(v, spec.duration_frames)) {
            if (stop.onset_frame > last_present[i]) {
                continue;
            }
            const int end = std::min(stop.end_frame, last_present[i]);
            const double seconds = (end - stop.onset_frame) / spec.fps;
            if (seconds >= spec.min_anomaly_s) {
                out.gt_anomalies.push_back({spec.video_id, stop.onset_frame / spec.fps, end / spec.fps});
            }
        }
    }
    std::stable_sort(out.gt_anomalies.begin(), out.gt_anomalies.end(),
                     [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    return out;
}

ScenarioSpec parse_scenario_text(std::string_view contents) {
    ScenarioSpec spec;
    VehicleSpec* vehicle = nullptr;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = text::trim(line.substr(0, hash));
        }
        if (line == "[vehicle]") {
            spec.vehicles.emplace_back();
            vehicle = &spec.vehicles.back();
            return;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw DataError("expected 'key = value' or '[vehicle]'", line_no);
        }
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        try {
            if (vehicle == nullptr) {
                if (key == "video_id") {
                    spec.video_id = std::string(value);
                } else if (key == "width") {
                    spec.frame_width = text::to_double(value);
                } else if (key == "height") {
                    spec.frame_height = text::to_double(value);
                } else if (key == "fps") {
                    spec.fps = text::to_double(value);
                } else if (key == "duration_frames") {
                    spec.duration_frames = static_cast<int>(text::to_int(value));
                } else if (key == "seed") {
                    spec.rng_seed = static_cast<std::uint64_t>(text::to_int(value));
                } else if (key == "jitter_px") {
                    spec.noise.bbox_jitter_px = text::to_double(value);
                } else if (key == "miss_probability") {
                    spec.noise.miss_probability = text::to_double(value);
                } else if (key == "feature_dim") {
                    spec.feature_dim = static_cast<int>(text::to_int(value));
                } else if (key == "feature_noise") {
                    spec.feature_noise = text::to_double(value);
                } else if (key == "min_anomaly_s") {
                    spec.min_anomaly_s = text::to_double(value);
                } else {
                    throw DataError("unknown scenario key '" + std::string(key) + "'");
                }
            } else {
                if (key == "entry_frame") {
                    vehicle->entry_frame = static_cast<int>(text::to_int(value));
                } else if (key == "box") {
                    const auto f = fields_of(value, 4, line_no);
                    vehicle->box = BBoxd(text::to_double(f[0]), text::to_double(f[1]), text::to_double(f[2]),
                                         text::to_double(f[3]));
                } else if (key == "segment") {
                    const auto f = fields_of(value, 3, line_no);
                    vehicle->segments.push_back({static_cast<int>(text::to_int(f[0])),
                                                 Point2d(text::to_double(f[1]), text::to_double(f[2]))});
                } else if (key == "occlusion") {
                    const auto f = fields_of(value, 2, line_no);
                    vehicle->occlusions.push_back(
                        {static_cast<int>(text::to_int(f[0])), static_cast<int>(text::to_int(f[1]))});
                } else if (key == "feature_seed") {
                    vehicle->feature_seed = static_cast<std::uint64_t>(text::to_int(value));
                } else if (key == "class") {
                    vehicle->class_label = std::string(value);
                } else if (key == "off_road") {
                    if (value != "true" && value != "false") {
                        throw DataError("off_road must be true or false");
                    }
                    vehicle->off_road = value == "true";
                } else {
                    throw DataError("unknown vehicle key '" + std::string(key) + "'");
                }
            }
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    const auto contents = text::read_file(path);
    try {
        return parse_scenario_text(contents);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

std::string serialize_scenario(const ScenarioSpec& spec) {
    using text::format;
    std::ostringstream out;
    out << "video_id = " << spec.video_id << '\n'
        << "width = " << format(spec.frame_width) << '\n'
        << "height = " << format(spec.frame_height) << '\n'
        << "fps = " << format(spec.fps) << '\n'
        << "duration_frames = " << spec.duration_frames << '\n'
        << "seed = " << spec.rng_seed << '\n'
        << "jitter_px = " << format(spec.noise.bbox_jitter_px) << '\n'
        << "miss_probability = " << format(spec.noise.miss_probability) << '\n'
        << "feature_dim = " << spec.feature_dim << '\n'
        << "feature_noise = " << format(spec.feature_noise) << '\n'
        << "min_anomaly_s = " << format(spec.min_anomaly_s) << '\n';
    for (const auto& v : spec.vehicles) {
        out << "\n[vehicle]\n"
            << "entry_frame = " << v.entry_frame << '\n'
            << "box = " << format(v.box.x) << ',' << format(v.box.y) << ',' << format(v.box.w) << ','
            << format(v.box.h) << '\n';
        for (const auto& s : v.segments) {
            out << "segment = " << s.frames << ',' << format(s.velocity.x()) << ',' << format(s.velocity.y())
                << '\n';
        }
        for (const auto& o : v.occlusions) {
            out << "occlusion = " << o.start_frame << ',' << o.end_frame << '\n';
        }
        if (v.feature_seed) {
            out << "feature_seed = " << *v.feature_seed << '\n';
        }
        out << "class = " << v.class_label << '\n';
        if (v.off_road) {
            out << "off_road = true\n";
        }
    }
    return out.str();
}

}  // namespace stallwatch::synth
