// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/ingest.hpp"

#include "stallwatch/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <sstream>

namespace stallwatch {

namespace {

int to_frame(std::string_view field) {
    const auto n = text::to_int(field);
    if (n < 0) {
        throw DataError("negative frame index");
    }
    if (n > std::numeric_limits<int>::max()) {
        throw DataError("frame index out of range");
    }
    return static_cast<int>(n);
}

BBoxd to_bbox(std::span<const std::string_view> f) {
    BBoxd box(text::to_double(f[0]), text::to_double(f[1]), text::to_double(f[2]), text::to_double(f[3]));
    if (!box.valid()) {
        throw DataError("bounding box width and height must be positive");
    }
    return box;
}

template <typename Parse>
auto with_path(const std::filesystem::path& path, Parse&& parse) {
    const auto contents = text::read_file(path);
    try {
        return parse(contents);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what(), e.line());
    }
}

void put_bbox(std::ostream& out, const BBoxd& b) {
    out << text::format(b.x) << ',' << text::format(b.y) << ',' << text::format(b.w) << ','
        << text::format(b.h);
}

}  // namespace

std::vector<DetectionRecord> parse_detections_text(std::string_view contents) {
    std::vector<DetectionRecord> records;
    std::optional<Eigen::Index> dim;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() < 7) {
            throw DataError("expected frame,x,y,w,h,confidence,class[,features...]", line_no);
        }
        try {
            DetectionRecord r;
            r.frame = to_frame(f[0]);
            r.bbox = to_bbox(std::span(f).subspan(1, 4));
            r.confidence = text::to_double(f[5]);
            if (r.confidence < 0.0 || r.confidence > 1.0) {
                throw DataError("confidence outside [0,1]");
            }
            r.class_label = std::string(f[6]);
            if (f.size() > 7) {
                FeatureVector v(static_cast<Eigen::Index>(f.size() - 7));
                for (std::size_t i = 7; i < f.size(); ++i) {
                    v[static_cast<Eigen::Index>(i - 7)] = text::to_double(f[i]);
                }
                if (dim && *dim != v.size()) {
                    throw DataError("feature dimension " + std::to_string(v.size()) + " differs from " +
                                    std::to_string(*dim));
                }
                dim = v.size();
                r.feature = std::move(v);
            }
            records.push_back(std::move(r));
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.frame < b.frame; });
    return records;
}

std::vector<DetectionRecord> parse_detections(const std::filesystem::path& path) {
    return with_path(path, parse_detections_text);
}

std::string serialize_detections(const std::vector<DetectionRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        out << r.frame << ',';
        put_bbox(out, r.bbox);
        out << ',' << text::format(r.confidence) << ',' << r.class_label;
        if (r.feature) {
            for (const double v : *r.feature) {
                out << ',' << text::format(v);
            }
        }
        out << '\n';
    }
    return out.str();
}

std::vector<GroundTruthTrackRecord> parse_mot_ground_truth_text(std::string_view contents) {
    std::vector<GroundTruthTrackRecord> records;
    std::set<std::pair<int, int>> seen;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() != 6) {
            throw DataError("expected frame,id,x,y,w,h", line_no);
        }
        try {
            GroundTruthTrackRecord r;
            r.frame = to_frame(f[0]);
            const auto id = text::to_int(f[1]);
            if (id < std::numeric_limits<int>::min() || id > std::numeric_limits<int>::max()) {
                throw DataError("identity out of range");
            }
            r.identity = static_cast<int>(id);
            r.bbox = to_bbox(std::span(f).subspan(2, 4));
            if (!seen.emplace(r.frame, r.identity).second) {
                throw DataError("duplicate (frame, id) = (" + std::to_string(r.frame) + ", " +
                                std::to_string(r.identity) + ")");
            }
            records.push_back(r);
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    return records;
}

std::vector<GroundTruthTrackRecord> parse_mot_ground_truth(const std::filesystem::path& path) {
    return with_path(path, parse_mot_ground_truth_text);
}

std::string serialize_mot_ground_truth(const std::vector<GroundTruthTrackRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        out << r.frame << ',' << r.identity << ',';
        put_bbox(out, r.bbox);
        out << '\n';
    }
    return out.str();
}

std::vector<AnomalyGroundTruth> parse_anomaly_ground_truth_text(std::string_view contents) {
    std::vector<AnomalyGroundTruth> records;
    text::for_each_record(contents, [&](std::size_t line_no, std::string_view line) {
        const auto f = text::split_csv(line);
        if (f.size() != 3 || f[0].empty()) {
            throw DataError("expected video_id,start_s,end_s", line_no);
        }
        try {
            AnomalyGroundTruth r{std::string(f[0]), text::to_double(f[1]), text::to_double(f[2])};
            if (r.start_s < 0.0) {
                throw DataError("negative start time");
            }
            if (r.end_s < r.start_s) {
                throw DataError("end_s precedes start_s");
            }
            records.push_back(std::move(r));
        } catch (const DataError& e) {
            throw DataError(e.what(), line_no);
        }
    });
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.video_id != b.video_id ? a.video_id < b.video_id : a.start_s < b.start_s;
    });
    return records;
}

std::vector<AnomalyGroundTruth> parse_anomaly_ground_truth(const std::filesystem::path& path) {
    return with_path(path, parse_anomaly_ground_truth_text);
}

std::string serialize_anomaly_ground_truth(const std::vector<AnomalyGroundTruth>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        out << r.video_id << ',' << text::format(r.start_s) << ',' << text::format(r.end_s) << '\n';
    }
    return out.str();
}

}  // namespace stallwatch
