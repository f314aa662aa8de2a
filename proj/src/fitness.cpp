#include "gareg/fitness.hpp"

#include <algorithm>

namespace gareg {

double lower_median(std::vector<double>& values) {
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + k, values.end());
    return values[k];
}

double aggregate_score(std::vector<double>& distances, FitnessKind kind) {
    if (distances.empty()) throw EmptyCloudError("aggregate_score: no distances");
    if (kind == FitnessKind::MeanDistance) {
        double sum = 0.0;
        for (double d : distances) sum += d;
        return sum / static_cast<double>(distances.size());
    }
    return lower_median(distances);
}

FitnessReport evaluate_motion(const RigidMotion& motion, const PointCloud& source,
                              const KdTree& target_index, FitnessKind kind,
                              double overlap_threshold) {
    if (source.empty()) throw EmptyCloudError("evaluate_motion: empty source");
    if (!(overlap_threshold > 0.0))
        throw DegenerateCloudError("evaluate_motion: overlap_threshold must be > 0");

    const Mat3 r = motion.rotation_matrix();
    FitnessReport report;
    report.per_point_distances.reserve(source.size());
    std::size_t within = 0;
    for (const Point3& p : source.points) {
        const Point3 moved = r.apply(p) + motion.translation;
        const double d = target_index.nearest(moved).distance;
        report.per_point_distances.push_back(d);
        if (d < overlap_threshold) ++within;
    }
    std::vector<double> scratch = report.per_point_distances;
    report.score = aggregate_score(scratch, kind);
    report.overlap_percent =
        100.0 * static_cast<double>(within) / static_cast<double>(source.size());
    return report;
}

double evaluate_score(const RigidMotion& motion, const PointCloud& source,
                      const KdTree& target_index, FitnessKind kind, std::vector<double>& scratch) {
    if (source.empty()) throw EmptyCloudError("evaluate_score: empty source");
    const Mat3 r = motion.rotation_matrix();
    scratch.clear();
    for (const Point3& p : source.points) {
        const Point3 moved = r.apply(p) + motion.translation;
        scratch.push_back(target_index.nearest(moved).distance);
    }
    return aggregate_score(scratch, kind);
}

double overlap_threshold_default(const KdTree& target_index) {
    const PointCloud& target = target_index.cloud();
    if (target.size() < 2)
        throw DegenerateCloudError("overlap_threshold_default: need at least 2 points");
    std::vector<double> spacings;
    spacings.reserve(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        spacings.push_back(
            target_index.nearest_excluding(target.points[i], static_cast<std::uint32_t>(i))
                .distance);
    }
    return 2.0 * lower_median(spacings);
}

double overlap_threshold_default(const PointCloud& target) {
    if (target.size() < 2)
        throw DegenerateCloudError("overlap_threshold_default: need at least 2 points");
    return overlap_threshold_default(KdTree(target));
}

}  // namespace gareg
