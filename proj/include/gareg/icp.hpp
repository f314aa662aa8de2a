#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gareg/geometry.hpp"

namespace gareg {

struct CorrespondencePair {
    Point3 source_point;
    Point3 target_point;
};

struct IcpConfig {
    int max_iterations = 50;
    double convergence_epsilon = 1e-4;  // mm, stop when RMS improves less than this
    std::optional<double> correspondence_cutoff;  // mm, drop pairs beyond this NN distance
};

struct IcpResult {
    RigidMotion motion;
    double rms = 0.0;  // mm, over the correspondences of the last iteration
    int iterations = 0;
    std::vector<double> rms_trace;
};

// Least-squares rigid fit (cross-covariance + orthogonal decomposition,
// determinant-corrected to a proper rotation). Needs >= 3 pairs whose
// source points span at least a plane.
RigidMotion fit_rigid(const std::vector<CorrespondencePair>& pairs);

// Point-to-point ICP: alternate nearest-neighbor correspondences under the
// current motion with a closed-form refit. RMS is non-increasing across
// iterations.
IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                     const IcpConfig& config);

// Manual landmark file: one pair per line, six whitespace-separated
// decimals `sx sy sz tx ty tz`; `#` comments and blank lines ignored.
std::vector<CorrespondencePair> load_correspondences(const std::string& path);

}  // namespace gareg
