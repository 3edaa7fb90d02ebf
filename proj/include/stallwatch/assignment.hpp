// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stallwatch {

template <typename Scalar>
using WeightMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using AllowedMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

///
/// \brief Maximum-weight bipartite matching (Kuhn-Munkres with potentials).
///
/// Rows and columns may differ in count. Only pairs with allowed(r, c) set may
/// be matched; weights of allowed pairs must be non-negative. The problem is
/// padded to a square matrix where forbidden or padding cells weigh zero, so
/// dropping them from the optimal perfect matching leaves an optimal partial
/// matching. Runs in O(n^3) for n = max(rows, cols) and is deterministic for
/// a fixed row/column order.
///
/// \return (row, col) pairs sorted by row.
///
template <typename Scalar>
std::vector<std::pair<int, int>> max_weight_matching(const WeightMatrix<Scalar>& weights,
                                                     const AllowedMask& allowed) {
    if (weights.rows() != allowed.rows() || weights.cols() != allowed.cols()) {
        throw std::invalid_argument("max_weight_matching: weight and mask shapes differ");
    }
    const int rows = static_cast<int>(weights.rows());
    const int cols = static_cast<int>(weights.cols());
    const int n = std::max(rows, cols);
    if (n == 0) {
        return {};
    }

    // cost(i, j), 1-based, minimized.
    WeightMatrix<Scalar> cost = WeightMatrix<Scalar>::Zero(n + 1, n + 1);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (allowed(r, c)) {
                if (weights(r, c) < Scalar(0)) {
                    throw std::invalid_argument("max_weight_matching: negative weight");
                }
                cost(r + 1, c + 1) = -weights(r, c);
            }
        }
    }

    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n + 1);
    std::vector<int> match_of_col(n + 1, 0);
    std::vector<int> way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match_of_col[0] = i;
        int j0 = 0;
        std::vector<Scalar> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match_of_col[j0];
            Scalar delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) {
                    continue;
                }
                const Scalar cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match_of_col[j0] != 0);
        do {
            const int j1 = way[j0];
            match_of_col[j0] = match_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::pair<int, int>> pairs;
    for (int j = 1; j <= n; ++j) {
        const int r = match_of_col[j] - 1;
        const int c = j - 1;
        if (r < rows && c < cols && allowed(r, c)) {
            pairs.emplace_back(r, c);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace stallwatch
