#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gareg/geometry.hpp"

namespace gareg {

struct NearestHit {
    std::uint32_t index = 0;   // index into the cloud the tree was built on
    double distance = 0.0;     // Euclidean, mm
    double squared_distance = 0.0;
};

// Immutable exact nearest-neighbor index. Axes cycle x->y->z with depth
// and each node stores the median point (median kept in the node, halves
// on either side). Equidistant hits resolve to the smallest original
// index, so queries are fully deterministic.
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud);

    NearestHit nearest(const Point3& query) const;

    // Same search but never returns `excluded`; used for intra-cloud
    // nearest-neighbor spacing.
    NearestHit nearest_excluding(const Point3& query, std::uint32_t excluded) const;

    std::size_t size() const { return nodes_.size(); }
    const PointCloud& cloud() const { return cloud_; }

private:
    struct Node {
        double c[3];
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t point_index = 0;
    };

    std::int32_t build(std::vector<std::uint32_t>& indices, std::int32_t begin, std::int32_t end,
                       int depth);

    PointCloud cloud_;
    std::vector<Node> nodes_;
    // Per-subtree bounds (min xyz, max xyz) for lower-bound pruning; lets
    // far-field queries skip whole subtrees without touching their points.
    std::vector<std::array<double, 6>> bounds_;
    std::int32_t root_ = -1;
};

}  // namespace gareg
