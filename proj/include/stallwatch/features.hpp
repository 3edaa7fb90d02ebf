// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <stdexcept>

namespace stallwatch {

/// Appearance descriptor ingested alongside a detection.
using FeatureVector = Eigen::VectorXd;

///
/// \brief Cosine similarity between two appearance descriptors.
///
/// Throws std::invalid_argument on a dimension mismatch or a zero vector.
///
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                                            const Eigen::MatrixBase<DerivedB>& v) {
    using Scalar = typename DerivedA::Scalar;
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    }
    const Scalar nu = u.norm();
    const Scalar nv = v.norm();
    if (!(nu > Scalar(0)) || !(nv > Scalar(0))) {
        throw std::invalid_argument("cosine_similarity: zero vector");
    }
    return std::clamp(u.dot(v) / (nu * nv), Scalar(-1), Scalar(1));
}

}  // namespace stallwatch
