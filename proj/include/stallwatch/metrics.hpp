// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/anomaly.hpp"
#include "stallwatch/association.hpp"
#include "stallwatch/geometry.hpp"
#include "stallwatch/ingest.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stallwatch {

struct MotReport {
    /// Undefined when there are no ground-truth objects.
    std::optional<double> mota;
    double motp = 0.0;  ///< mean IOU of matched pairs
    int mt = 0;
    int ml = 0;
    int ids = 0;
    int fp = 0;
    int fn = 0;
    int gt_total = 0;
    int matches = 0;
    int gt_identities = 0;
    double hz = 0.0;  ///< filled by the caller from wall-clock timing
};

struct FrameMatch {
    std::vector<std::pair<int, int>> matches;  ///< (gt index, prediction index)
    std::vector<double> ious;                  ///< per match
    int fp = 0;
    int fn = 0;
};

/// One-to-one matching maximizing the summed IOU over pairs with iou >= threshold.
FrameMatch match_frame(std::span<const BBoxd> gt, std::span<const BBoxd> pred, double iou_threshold);

///
/// \brief CLEAR MOT over all frames that appear in either input.
///
/// An identity switch is counted when a ground-truth identity is matched to a
/// different predicted identity than at its previous matched frame. MT and ML
/// use the 80% / 20% matched-frame coverage cutoffs.
///
MotReport clear_mot(std::span<const GroundTruthTrackRecord> gt, std::span<const GroundTruthTrackRecord> pred,
                    double iou_threshold);

/// Convenience overload taking tracker output; hypothesized states count as predictions.
MotReport clear_mot(std::span<const GroundTruthTrackRecord> gt, std::span<const Track> pred, double iou_threshold);

/// 2 tp / (2 tp + fn + fp); 0 when the denominator is 0.
double f1_score(int tp, int fn, int fp);

/// min(RMSE, 300) / 300 over true-positive start-time errors; 0 for an empty list.
double nrmse(std::span<const double> start_errors_s);

double s4(double f1, double nrmse_value);

struct AnomalyMatch {
    std::vector<std::pair<int, int>> pairs;  ///< (gt index, prediction index)
    std::vector<double> errors_s;            ///< pred.start - gt.start per pair
    int fp = 0;
    int fn = 0;
};

///
/// \brief Pairs predictions with ground truth of the same video whose start
/// times lie within window_s. Among valid pairings, the number of pairs is
/// maximized first and the summed absolute start error minimized second.
///
AnomalyMatch match_anomalies(std::span<const AnomalyGroundTruth> gt, std::span<const AnomalyEvent> pred,
                             double window_s = 10.0);

struct AnomalyScore {
    double f1 = 0.0;
    double nrmse = 0.0;
    double rmse_s = 0.0;
    double s4 = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

AnomalyScore score_anomalies(std::span<const AnomalyGroundTruth> gt, std::span<const AnomalyEvent> pred,
                             double window_s = 10.0);

/// `key = value` lines.
std::string to_key_value(const MotReport& r);
std::string to_key_value(const AnomalyScore& s);
/// Aligned two-column tables for terminals.
std::string to_table(const MotReport& r);
std::string to_table(const AnomalyScore& s);

}  // namespace stallwatch
