#pragma once

#include <vector>

#include "gareg/geometry.hpp"
#include "gareg/kdtree.hpp"

namespace gareg {

enum class FitnessKind {
    MeanDistance,
    MedianDistance,
};

struct FitnessReport {
    double score = 0.0;            // mm, mean or lower median of per-point distances
    double overlap_percent = 0.0;  // 0..100
    std::vector<double> per_point_distances;
};

// Lower median: element (n-1)/2 of the sorted sequence, so the score is
// always an observed distance. `values` is consumed as scratch.
double lower_median(std::vector<double>& values);

// Aggregate a distance vector into a score without recomputing queries.
double aggregate_score(std::vector<double>& distances, FitnessKind kind);

// Move every source point by `motion`, query its nearest neighbor in the
// target index, and aggregate. Accumulation is sequential in point order,
// so one evaluation is bitwise deterministic regardless of how many
// evaluations run concurrently.
FitnessReport evaluate_motion(const RigidMotion& motion, const PointCloud& source,
                              const KdTree& target_index, FitnessKind kind,
                              double overlap_threshold);

// Score-only variant for the optimizer's inner loop; reuses `scratch` to
// stay allocation-free.
double evaluate_score(const RigidMotion& motion, const PointCloud& source,
                      const KdTree& target_index, FitnessKind kind, std::vector<double>& scratch);

// 2 x the median nearest-neighbor spacing within `target`; the default
// threshold for the reported overlap percentage.
double overlap_threshold_default(const PointCloud& target);
double overlap_threshold_default(const KdTree& target_index);

}  // namespace gareg
