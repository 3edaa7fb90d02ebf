// Copyright (C) 2026 The stallwatch authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stallwatch/geometry.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stallwatch {

///
/// \brief Point quadtree over a fixed rectangle with radius queries.
///
/// Leaves hold up to `capacity` items and split into four equal quadrants
/// when they overflow, down to `max_depth`; leaves at the depth limit keep
/// growing instead. Quadrant order is (left, top), (right, top),
/// (left, bottom), (right, bottom); a point on a split line goes to the
/// lower-index quadrant.
///
template <typename Scalar, typename Payload = int>
class QuadTree {
public:
    using Point = Point2<Scalar>;
    using Box = Eigen::AlignedBox<Scalar, 2>;

    struct Item {
        Point point;
        Payload payload;
    };

    struct QueryStats {
        std::size_t nodes_visited = 0;
    };

    QuadTree(const Box& bounds, std::size_t capacity = 4, int max_depth = 12)
        : capacity_(capacity), max_depth_(max_depth) {
        if (bounds.isEmpty()) {
            throw std::invalid_argument("QuadTree: empty bounds");
        }
        if (capacity == 0) {
            throw std::invalid_argument("QuadTree: capacity must be positive");
        }
        nodes_.push_back(Node{bounds, 0, {}, {}});
    }

    /// Throws std::out_of_range when the point lies outside the root bounds.
    void insert(const Point& point, const Payload& payload) {
        if (!nodes_.front().bounds.contains(point)) {
            throw std::out_of_range("QuadTree::insert: point outside bounds");
        }
        std::size_t n = 0;
        while (!is_leaf(n)) {
            n = nodes_[n].children[quadrant(nodes_[n], point)];
        }
        nodes_[n].items.push_back({point, payload});
        ++size_;
        if (nodes_[n].items.size() > capacity_ && nodes_[n].depth < max_depth_) {
            split(n);
        }
    }

    /// Payloads of every item within distance r of center (boundary inclusive),
    /// in tree traversal order.
    std::vector<Payload> query_radius(const Point& center, Scalar r, QueryStats* stats = nullptr) const {
        std::vector<Payload> out;
        if (r < Scalar(0)) {
            return out;
        }
        const Scalar r2 = r * r;
        std::vector<std::size_t> stack{0};
        while (!stack.empty()) {
            const std::size_t n = stack.back();
            stack.pop_back();
            const Node& node = nodes_[n];
            if (stats) {
                ++stats->nodes_visited;
            }
            if (node.bounds.squaredExteriorDistance(center) > r2) {
                continue;
            }
            if (is_leaf(n)) {
                for (const auto& item : node.items) {
                    if ((item.point - center).squaredNorm() <= r2) {
                        out.push_back(item.payload);
                    }
                }
            } else {
                for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
                    stack.push_back(*it);
                }
            }
        }
        return out;
    }

    std::size_t size() const { return size_; }
    std::size_t node_count() const { return nodes_.size(); }
    const Box& bounds() const { return nodes_.front().bounds; }

    /// Children of node n, or none for a leaf. Node 0 is the root.
    bool is_leaf(std::size_t n) const { return nodes_[n].children[0] == 0; }
    const std::array<std::size_t, 4>& children(std::size_t n) const { return nodes_[n].children; }
    const Box& node_bounds(std::size_t n) const { return nodes_[n].bounds; }
    const std::vector<Item>& node_items(std::size_t n) const { return nodes_[n].items; }
    int node_depth(std::size_t n) const { return nodes_[n].depth; }

private:
    struct Node {
        Box bounds;
        int depth;
        std::array<std::size_t, 4> children;  // all zero for a leaf
        std::vector<Item> items;
    };

    static int quadrant(const Node& node, const Point& p) {
        const Point mid = node.bounds.center();
        return (p.x() > mid.x() ? 1 : 0) + (p.y() > mid.y() ? 2 : 0);
    }

    void split(std::size_t n) {
        const Box b = nodes_[n].bounds;
        const Point lo = b.min();
        const Point hi = b.max();
        const Point mid = b.center();
        const int depth = nodes_[n].depth + 1;
        const std::array<Box, 4> quads = {
            Box(Point(lo.x(), lo.y()), Point(mid.x(), mid.y())),
            Box(Point(mid.x(), lo.y()), Point(hi.x(), mid.y())),
            Box(Point(lo.x(), mid.y()), Point(mid.x(), hi.y())),
            Box(Point(mid.x(), mid.y()), Point(hi.x(), hi.y())),
        };
        std::array<std::size_t, 4> ids{};
        for (int q = 0; q < 4; ++q) {
            ids[q] = nodes_.size();
            nodes_.push_back(Node{quads[q], depth, {}, {}});
        }
        auto items = std::move(nodes_[n].items);
        nodes_[n].items.clear();
        nodes_[n].children = ids;
        for (const auto& item : items) {
            const std::size_t child = ids[quadrant(nodes_[n], item.point)];
            nodes_[child].items.push_back(item);
        }
        for (const std::size_t child : ids) {
            if (nodes_[child].items.size() > capacity_ && depth < max_depth_) {
                split(child);
            }
        }
    }

    std::size_t capacity_;
    int max_depth_;
    std::size_t size_ = 0;
    std::vector<Node> nodes_;
};

}  // namespace stallwatch
