// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/config.hpp"

#include "stallwatch/text.hpp"

#include <climits>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace stallwatch {

namespace {

struct Field {
    std::function<void(EngineConfig&, std::string_view)> set;
    std::function<std::string(const EngineConfig&)> get;
};

Field real(double EngineConfig::*member) {
    return {[member](EngineConfig& c, std::string_view v) { c.*member = text::to_double(v); },
            [member](const EngineConfig& c) { return text::format(c.*member); }};
}

Field integer(int EngineConfig::*member) {
    return {[member](EngineConfig& c, std::string_view v) {
                const auto n = text::to_int(v);
                if (n < INT32_MIN || n > INT32_MAX) {
                    throw DataError("integer out of range: '" + std::string(v) + "'");
                }
                c.*member = static_cast<int>(n);
            },
            [member](const EngineConfig& c) { return std::to_string(c.*member); }};
}

Field boolean(bool EngineConfig::*member) {
    return {[member](EngineConfig& c, std::string_view v) {
                if (v == "true" || v == "1") {
                    c.*member = true;
                } else if (v == "false" || v == "0") {
                    c.*member = false;
                } else {
                    throw DataError("not a boolean: '" + std::string(v) + "'");
                }
            },
            [member](const EngineConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

// Ordered so that to_string output is stable.
const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = {
        {"iou_gate", real(&EngineConfig::iou_gate)},
        {"dist_gate_px", real(&EngineConfig::dist_gate_px)},
        {"sim_gate", real(&EngineConfig::sim_gate)},
        {"alpha", real(&EngineConfig::alpha)},
        {"beta", real(&EngineConfig::beta)},
        {"require_features", boolean(&EngineConfig::require_features)},
        {"max_lost_frames", integer(&EngineConfig::max_lost_frames)},
        {"fps", real(&EngineConfig::fps)},
        {"frame_width", real(&EngineConfig::frame_width)},
        {"frame_height", real(&EngineConfig::frame_height)},
        {"scene_margin_px", real(&EngineConfig::scene_margin_px)},
        {"dwell_threshold_frames", integer(&EngineConfig::dwell_threshold_frames)},
        {"speed_window_frames", integer(&EngineConfig::speed_window_frames)},
        {"speed_stop_threshold_px_per_frame", real(&EngineConfig::speed_stop_threshold_px_per_frame)},
        {"stop_radius_px", real(&EngineConfig::stop_radius_px)},
        {"max_hypothesized_frames", integer(&EngineConfig::max_hypothesized_frames)},
        {"quadtree_capacity", integer(&EngineConfig::quadtree_capacity)},
        {"quadtree_max_depth", integer(&EngineConfig::quadtree_max_depth)},
        {"quadtree_radius_px", real(&EngineConfig::quadtree_radius_px)},
        {"roi_speed_threshold_px_per_frame", real(&EngineConfig::roi_speed_threshold_px_per_frame)},
        {"roi_warmup_frames", integer(&EngineConfig::roi_warmup_frames)},
        {"severity_green_s", real(&EngineConfig::severity_green_s)},
        {"severity_yellow_s", real(&EngineConfig::severity_yellow_s)},
        {"severity_red_s", real(&EngineConfig::severity_red_s)},
        {"mot_iou_threshold", real(&EngineConfig::mot_iou_threshold)},
        {"anomaly_window_s", real(&EngineConfig::anomaly_window_s)},
    };
    return table;
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw std::invalid_argument("config: " + message);
    }
}

}  // namespace

void EngineConfig::validate() const {
    require(iou_gate >= 0.0 && iou_gate <= 1.0, "iou_gate must lie in [0,1]");
    require(dist_gate_px >= 0.0, "dist_gate_px must be >= 0");
    require(sim_gate >= -1.0 && sim_gate <= 1.0, "sim_gate must lie in [-1,1]");
    require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be >= 0");
    require(std::abs(alpha + beta - 1.0) <= 1e-9, "alpha + beta must equal 1");
    require(max_lost_frames >= 0, "max_lost_frames must be >= 0");
    require(fps > 0.0, "fps must be > 0");
    require(frame_width > 0.0 && frame_height > 0.0, "frame extent must be positive");
    require(scene_margin_px >= 0.0, "scene_margin_px must be >= 0");
    require(dwell_threshold_frames > 0, "dwell_threshold_frames must be > 0");
    require(speed_window_frames > 0, "speed_window_frames must be > 0");
    require(speed_stop_threshold_px_per_frame >= 0.0, "speed_stop_threshold_px_per_frame must be >= 0");
    require(stop_radius_px >= 0.0, "stop_radius_px must be >= 0");
    require(max_hypothesized_frames >= 0, "max_hypothesized_frames must be >= 0");
    require(quadtree_capacity > 0, "quadtree_capacity must be > 0");
    require(quadtree_max_depth >= 0, "quadtree_max_depth must be >= 0");
    require(quadtree_radius_px >= 0.0, "quadtree_radius_px must be >= 0");
    require(roi_speed_threshold_px_per_frame >= 0.0, "roi_speed_threshold_px_per_frame must be >= 0");
    require(roi_warmup_frames >= 0, "roi_warmup_frames must be >= 0");
    require(severity_green_s >= 0.0 && severity_green_s <= severity_yellow_s &&
                severity_yellow_s <= severity_red_s,
            "severity boundaries must be ordered green <= yellow <= red");
    require(mot_iou_threshold >= 0.0 && mot_iou_threshold <= 1.0, "mot_iou_threshold must lie in [0,1]");
    require(anomaly_window_s >= 0.0, "anomaly_window_s must be >= 0");
}

EngineConfig parse_config(std::string_view contents) {
    EngineConfig cfg;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = text::trim(line.substr(0, hash));
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw DataError("expected 'key = value'", line_no);
        }
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        const auto it = fields().find(key);
        if (it == fields().end()) {
            throw DataError("unknown config key '" + std::string(key) + "'", line_no);
        }
        try {
            it->second.set(cfg, value);
        } catch (const DataError& e) {
            throw DataError(std::string(key) + ": " + e.what(), line_no);
        }
    });
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(text::read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string to_string(const EngineConfig& cfg) {
    std::ostringstream out;
    for (const auto& [key, field] : fields()) {
        out << key << " = " << field.get(cfg) << '\n';
    }
    return out.str();
}

std::vector<std::string> config_warnings(const EngineConfig& cfg) {
    std::vector<std::string> warnings;
    if (std::abs(cfg.dwell_threshold_frames - 60.0 * cfg.fps) > 0.5) {
        warnings.push_back("dwell_threshold_frames (" + std::to_string(cfg.dwell_threshold_frames) +
                           ") is not one minute at fps " + text::format(cfg.fps));
    }
    return warnings;
}

}  // namespace stallwatch
