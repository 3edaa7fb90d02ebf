// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stallwatch {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2d = Point2<double>;

///
/// \brief Axis-aligned box in continuous pixel coordinates, (left, top, width, height).
///
template <typename Scalar>
struct BBox {
    Scalar x{0};
    Scalar y{0};
    Scalar w{1};
    Scalar h{1};

    BBox() = default;
    BBox(Scalar left, Scalar top, Scalar width, Scalar height)
        : x(left), y(top), w(width), h(height) {}

    bool valid() const { return w > Scalar(0) && h > Scalar(0); }
    Scalar area() const { return w * h; }
    Scalar right() const { return x + w; }
    Scalar bottom() const { return y + h; }
    Point2<Scalar> center() const { return {x + w / Scalar(2), y + h / Scalar(2)}; }

    bool operator==(const BBox&) const = default;
};

using BBoxd = BBox<double>;

/// Intersection over union; 0 for disjoint boxes.
template <typename Scalar>
Scalar iou(const BBox<Scalar>& a, const BBox<Scalar>& b) {
    const Scalar iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const Scalar ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= Scalar(0) || ih <= Scalar(0)) {
        return Scalar(0);
    }
    // Areas from the same corner differences as the overlap, so iou(a, a) is exactly 1.
    const Scalar inter = iw * ih;
    const Scalar area_a = (a.right() - a.x) * (a.bottom() - a.y);
    const Scalar area_b = (b.right() - b.x) * (b.bottom() - b.y);
    const Scalar uni = area_a + area_b - inter;
    return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar center_distance(const BBox<Scalar>& a, const BBox<Scalar>& b) {
    return (a.center() - b.center()).norm();
}

///
/// \brief Convex polygon with counter-clockwise vertices (y axis pointing up
/// in the orientation test; image coordinates flip the visual sense).
/// An empty vertex list is the explicit "no region" value.
///
template <typename Scalar>
struct Polygon {
    std::vector<Point2<Scalar>> vertices;

    bool empty() const { return vertices.empty(); }
    std::size_t size() const { return vertices.size(); }
};

using Polygond = Polygon<double>;

namespace detail {

template <typename Scalar>
Scalar cross(const Point2<Scalar>& o, const Point2<Scalar>& a, const Point2<Scalar>& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace detail

///
/// \brief Monotone-chain convex hull.
///
/// Collinear points on hull edges are dropped, so every returned vertex is a
/// strict corner. Fewer than three points, or an all-collinear input, yields
/// an empty polygon.
///
template <typename Scalar>
Polygon<Scalar> convex_hull(std::vector<Point2<Scalar>> points) {
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const auto& a, const auto& b) { return a == b; }),
                 points.end());
    if (points.size() < 3) {
        return {};
    }

    std::vector<Point2<Scalar>> hull(2 * points.size());
    std::size_t k = 0;
    for (const auto& p : points) {
        while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= Scalar(0)) {
            --k;
        }
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
        while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], *it) <= Scalar(0)) {
            --k;
        }
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        return {};
    }
    return Polygon<Scalar>{std::move(hull)};
}

/// Boundary points count as inside. An empty polygon contains nothing.
template <typename Scalar>
bool point_in_polygon(const Point2<Scalar>& p, const Polygon<Scalar>& poly) {
    const std::size_t n = poly.size();
    if (n < 3) {
        return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (detail::cross(poly.vertices[i], poly.vertices[(i + 1) % n], p) < Scalar(0)) {
            return false;
        }
    }
    return true;
}

}  // namespace stallwatch
