// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#include "stallwatch/metrics.hpp"

#include "stallwatch/assignment.hpp"
#include "stallwatch/text.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace stallwatch {

namespace {

constexpr double kMaxStartErrorS = 300.0;
constexpr double kMostlyTracked = 0.8;
constexpr double kMostlyLost = 0.2;

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

FrameMatch match_frame(std::span<const BBoxd> gt, std::span<const BBoxd> pred, double iou_threshold) {
    const auto rows = static_cast<Eigen::Index>(gt.size());
    const auto cols = static_cast<Eigen::Index>(pred.size());
    WeightMatrix<double> weights = WeightMatrix<double>::Zero(rows, cols);
    AllowedMask allowed = AllowedMask::Constant(rows, cols, false);
    for (Eigen::Index g = 0; g < rows; ++g) {
        for (Eigen::Index p = 0; p < cols; ++p) {
            const double v = iou(gt[static_cast<std::size_t>(g)], pred[static_cast<std::size_t>(p)]);
            if (v >= iou_threshold && v > 0.0) {
                weights(g, p) = v;
                allowed(g, p) = true;
            }
        }
    }
    FrameMatch m;
    m.matches = max_weight_matching(weights, allowed);
    for (const auto& [g, p] : m.matches) {
        m.ious.push_back(weights(g, p));
    }
    m.fn = static_cast<int>(gt.size() - m.matches.size());
    m.fp = static_cast<int>(pred.size() - m.matches.size());
    return m;
}

MotReport clear_mot(std::span<const GroundTruthTrackRecord> gt, std::span<const GroundTruthTrackRecord> pred,
                    double iou_threshold) {
    std::map<int, std::vector<const GroundTruthTrackRecord*>> gt_by_frame;
    std::map<int, std::vector<const GroundTruthTrackRecord*>> pred_by_frame;
    for (const auto& r : gt) {
        gt_by_frame[r.frame].push_back(&r);
        pred_by_frame[r.frame];
    }
    for (const auto& r : pred) {
        pred_by_frame[r.frame].push_back(&r);
        gt_by_frame[r.frame];
    }

    MotReport report;
    std::map<int, int> gt_frames;
    std::map<int, int> gt_matched_frames;
    std::map<int, int> last_pred_of_gt;
    double iou_sum = 0.0;

    for (const auto& [frame, gts] : gt_by_frame) {
        const auto& preds = pred_by_frame[frame];
        std::vector<BBoxd> gb;
        std::vector<BBoxd> pb;
        for (const auto* r : gts) {
            gb.push_back(r->bbox);
            ++gt_frames[r->identity];
        }
        for (const auto* r : preds) {
            pb.push_back(r->bbox);
        }
        const auto m = match_frame(gb, pb, iou_threshold);
        report.fp += m.fp;
        report.fn += m.fn;
        report.gt_total += static_cast<int>(gts.size());
        report.matches += static_cast<int>(m.matches.size());
        for (std::size_t i = 0; i < m.matches.size(); ++i) {
            const int gid = gts[static_cast<std::size_t>(m.matches[i].first)]->identity;
            const int pid = preds[static_cast<std::size_t>(m.matches[i].second)]->identity;
            iou_sum += m.ious[i];
            ++gt_matched_frames[gid];
            const auto it = last_pred_of_gt.find(gid);
            if (it != last_pred_of_gt.end() && it->second != pid) {
                ++report.ids;
            }
            last_pred_of_gt[gid] = pid;
        }
    }

    report.gt_identities = static_cast<int>(gt_frames.size());
    for (const auto& [gid, total] : gt_frames) {
        const double coverage = static_cast<double>(gt_matched_frames[gid]) / total;
        if (coverage >= kMostlyTracked) {
            ++report.mt;
        } else if (coverage <= kMostlyLost) {
            ++report.ml;
        }
    }
    report.motp = report.matches > 0 ? iou_sum / report.matches : 0.0;
    if (report.gt_total > 0) {
        report.mota = 1.0 - static_cast<double>(report.fn + report.fp + report.ids) / report.gt_total;
    }
    return report;
}

MotReport clear_mot(std::span<const GroundTruthTrackRecord> gt, std::span<const Track> pred, double iou_threshold) {
    std::vector<GroundTruthTrackRecord> rows;
    for (const auto& t : pred) {
        for (const auto& s : t.states) {
            rows.push_back({s.frame, t.id, s.bbox});
        }
    }
    return clear_mot(gt, rows, iou_threshold);
}

double f1_score(int tp, int fn, int fp) {
    const int denom = 2 * tp + fn + fp;
    return denom > 0 ? 2.0 * tp / denom : 0.0;
}

double nrmse(std::span<const double> start_errors_s) {
    if (start_errors_s.empty()) {
        return 0.0;
    }
    double sq = 0.0;
    for (const double e : start_errors_s) {
        sq += e * e;
    }
    const double rmse = std::sqrt(sq / static_cast<double>(start_errors_s.size()));
    return std::min(rmse, kMaxStartErrorS) / kMaxStartErrorS;
}

double s4(double f1, double nrmse_value) { return f1 * (1.0 - nrmse_value); }

AnomalyMatch match_anomalies(std::span<const AnomalyGroundTruth> gt, std::span<const AnomalyEvent> pred,
                             double window_s) {
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_video;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        by_video[gt[i].video_id].first.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        by_video[pred[i].video_id].second.push_back(static_cast<int>(i));
    }

    AnomalyMatch result;
    for (const auto& [video, idx] : by_video) {
        const auto& [gi, pi] = idx;
        const auto rows = static_cast<Eigen::Index>(gi.size());
        const auto cols = static_cast<Eigen::Index>(pi.size());
        // Every pair outweighs any possible saving in summed error, so cardinality wins first.
        const double base = static_cast<double>(std::min(rows, cols)) * window_s + 1.0;
        WeightMatrix<double> weights = WeightMatrix<double>::Zero(rows, cols);
        AllowedMask allowed = AllowedMask::Constant(rows, cols, false);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                const double err = std::abs(pred[static_cast<std::size_t>(pi[c])].start_s -
                                            gt[static_cast<std::size_t>(gi[r])].start_s);
                if (err <= window_s) {
                    weights(r, c) = base - err;
                    allowed(r, c) = true;
                }
            }
        }
        const auto pairs = max_weight_matching(weights, allowed);
        for (const auto& [r, c] : pairs) {
            const int g = gi[static_cast<std::size_t>(r)];
            const int p = pi[static_cast<std::size_t>(c)];
            result.pairs.emplace_back(g, p);
            result.errors_s.push_back(pred[static_cast<std::size_t>(p)].start_s - gt[static_cast<std::size_t>(g)].start_s);
        }
        result.fn += static_cast<int>(gi.size() - pairs.size());
        result.fp += static_cast<int>(pi.size() - pairs.size());
    }
    return result;
}

AnomalyScore score_anomalies(std::span<const AnomalyGroundTruth> gt, std::span<const AnomalyEvent> pred,
                             double window_s) {
    const auto m = match_anomalies(gt, pred, window_s);
    AnomalyScore s;
    s.tp = static_cast<int>(m.pairs.size());
    s.fp = m.fp;
    s.fn = m.fn;
    s.f1 = f1_score(s.tp, s.fn, s.fp);
    s.nrmse = nrmse(m.errors_s);
    if (!m.errors_s.empty()) {
        double sq = 0.0;
        for (const double e : m.errors_s) {
            sq += e * e;
        }
        s.rmse_s = std::sqrt(sq / static_cast<double>(m.errors_s.size()));
    }
    s.s4 = s4(s.f1, s.nrmse);
    return s;
}

std::string to_key_value(const MotReport& r) {
    std::ostringstream out;
    out << "mota = " << (r.mota ? text::format(*r.mota) : std::string("undefined")) << '\n'
        << "motp = " << text::format(r.motp) << '\n'
        << "mt = " << r.mt << '\n'
        << "ml = " << r.ml << '\n'
        << "ids = " << r.ids << '\n'
        << "fp = " << r.fp << '\n'
        << "fn = " << r.fn << '\n'
        << "gt_total = " << r.gt_total << '\n'
        << "gt_identities = " << r.gt_identities << '\n'
        << "hz = " << text::format(r.hz) << '\n';
    return out.str();
}

std::string to_key_value(const AnomalyScore& s) {
    std::ostringstream out;
    out << "s4 = " << text::format(s.s4) << '\n'
        << "f1 = " << text::format(s.f1) << '\n'
        << "nrmse = " << text::format(s.nrmse) << '\n'
        << "rmse_s = " << text::format(s.rmse_s) << '\n'
        << "tp = " << s.tp << '\n'
        << "fp = " << s.fp << '\n'
        << "fn = " << s.fn << '\n';
    return out.str();
}

std::string to_table(const MotReport& r) {
    std::ostringstream out;
    out << "  MOTA   " << (r.mota ? fixed(*r.mota) : std::string("n/a")) << '\n'
        << "  MOTP   " << fixed(r.motp) << '\n'
        << "  MT     " << r.mt << " / " << r.gt_identities << '\n'
        << "  ML     " << r.ml << " / " << r.gt_identities << '\n'
        << "  IDS    " << r.ids << '\n'
        << "  FP     " << r.fp << '\n'
        << "  FN     " << r.fn << '\n'
        << "  GT     " << r.gt_total << '\n';
    if (r.hz > 0.0) {
        out << "  Hz     " << fixed(r.hz, 1) << '\n';
    }
    return out.str();
}

std::string to_table(const AnomalyScore& s) {
    std::ostringstream out;
    out << "  S4     " << fixed(s.s4) << '\n'
        << "  F1     " << fixed(s.f1) << '\n'
        << "  NRMSE  " << fixed(s.nrmse) << '\n'
        << "  RMSE   " << fixed(s.rmse_s, 3) << " s\n"
        << "  TP     " << s.tp << '\n'
        << "  FP     " << s.fp << '\n'
        << "  FN     " << s.fn << '\n';
    return out.str();
}

}  // namespace stallwatch
