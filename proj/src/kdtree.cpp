#include "gareg/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gareg {

KdTree::KdTree(const PointCloud& cloud) : cloud_(cloud) {
    if (cloud_.empty()) throw EmptyCloudError("KdTree: empty cloud");
    std::vector<std::uint32_t> indices(cloud_.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<std::uint32_t>(i);
    nodes_.reserve(cloud_.size());
    root_ = build(indices, 0, static_cast<std::int32_t>(indices.size()), 0);

    // Children always carry larger ids than their parent, so one reverse
    // pass folds child bounds upward.
    bounds_.resize(nodes_.size());
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const Node& n = nodes_[i];
        auto& b = bounds_[i];
        b = {n.c[0], n.c[1], n.c[2], n.c[0], n.c[1], n.c[2]};
        for (const std::int32_t child : {n.left, n.right}) {
            if (child < 0) continue;
            const auto& cb = bounds_[child];
            for (int a = 0; a < 3; ++a) {
                b[a] = std::min(b[a], cb[a]);
                b[a + 3] = std::max(b[a + 3], cb[a + 3]);
            }
        }
    }
}

namespace {

inline double box_distance_sq(const double q[3], const std::array<double, 6>& box) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = box[a] - q[a];
        const double hi = q[a] - box[a + 3];
        const double excess = lo > 0.0 ? lo : (hi > 0.0 ? hi : 0.0);
        d2 += excess * excess;
    }
    return d2;
}

}  // namespace

std::int32_t KdTree::build(std::vector<std::uint32_t>& indices, std::int32_t begin,
                           std::int32_t end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const std::int32_t mid = begin + (end - begin) / 2;
    // Tie-break on the original index so builds are deterministic.
    std::nth_element(indices.begin() + begin, indices.begin() + mid, indices.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const Point3& pa = cloud_.points[a];
                         const Point3& pb = cloud_.points[b];
                         const double ca = axis == 0 ? pa.x : (axis == 1 ? pa.y : pa.z);
                         const double cb = axis == 0 ? pb.x : (axis == 1 ? pb.y : pb.z);
                         if (ca != cb) return ca < cb;
                         return a < b;
                     });

    const std::uint32_t point_index = indices[mid];
    const Point3& p = cloud_.points[point_index];
    const std::int32_t node_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{{p.x, p.y, p.z}, -1, -1, point_index});
    const std::int32_t left = build(indices, begin, mid, depth + 1);
    const std::int32_t right = build(indices, mid + 1, end, depth + 1);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

NearestHit KdTree::nearest(const Point3& query) const {
    return nearest_excluding(query, std::numeric_limits<std::uint32_t>::max());
}

NearestHit KdTree::nearest_excluding(const Point3& query, std::uint32_t excluded) const {
    const double q[3] = {query.x, query.y, query.z};
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_index = std::numeric_limits<std::uint32_t>::max();

    // Deferred far subtrees; a balanced tree never stacks deeper than its
    // height, so a fixed buffer is plenty.
    struct Pending {
        std::int32_t node;
        std::int32_t depth;
        double plane_d2;
    };
    Pending stack[64];
    int top = 0;

    std::int32_t node = root_;
    int depth = 0;
    for (;;) {
        while (node >= 0) {
            const Node& n = nodes_[node];
            if (n.point_index != excluded) {
                const double dx = q[0] - n.c[0];
                const double dy = q[1] - n.c[1];
                const double dz = q[2] - n.c[2];
                const double d2 = dx * dx + dy * dy + dz * dz;
                if (d2 < best_d2 || (d2 == best_d2 && n.point_index < best_index)) {
                    best_d2 = d2;
                    best_index = n.point_index;
                }
            }
            const int axis = depth % 3;
            const double diff = q[axis] - n.c[axis];
            const std::int32_t near_child = diff < 0.0 ? n.left : n.right;
            const std::int32_t far_child = diff < 0.0 ? n.right : n.left;
            if (far_child >= 0) stack[top++] = {far_child, depth + 1, diff * diff};
            node = near_child;
            ++depth;
        }
        // <= keeps equidistant candidates reachable for the index tie-break.
        for (;;) {
            if (top == 0) {
                if (best_index == std::numeric_limits<std::uint32_t>::max())
                    throw DegenerateCloudError("KdTree: no admissible neighbor");
                return NearestHit{best_index, std::sqrt(best_d2), best_d2};
            }
            const Pending& item = stack[--top];
            if (item.plane_d2 <= best_d2 && box_distance_sq(q, bounds_[item.node]) <= best_d2) {
                node = item.node;
                depth = item.depth;
                break;
            }
        }
    }
}

}  // namespace gareg
