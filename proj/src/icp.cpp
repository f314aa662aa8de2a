#include "gareg/icp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>

#include "gareg/io.hpp"
#include "gareg/kdtree.hpp"

namespace gareg {

RigidMotion fit_rigid(const std::vector<CorrespondencePair>& pairs) {
    if (pairs.size() < 3)
        throw TooFewPairsError("fit_rigid: need at least 3 correspondence pairs, got " +
                               std::to_string(pairs.size()));
    for (const auto& pair : pairs) {
        if (!pair.source_point.finite() || !pair.target_point.finite())
            throw NonFiniteCoordinateError("fit_rigid: non-finite correspondence point");
    }

    const double n = static_cast<double>(pairs.size());
    Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
    Eigen::Vector3d tgt_mean = Eigen::Vector3d::Zero();
    for (const auto& pair : pairs) {
        src_mean += Eigen::Vector3d(pair.source_point.x, pair.source_point.y, pair.source_point.z);
        tgt_mean += Eigen::Vector3d(pair.target_point.x, pair.target_point.y, pair.target_point.z);
    }
    src_mean /= n;
    tgt_mean /= n;

    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d src_scatter = Eigen::Matrix3d::Zero();
    for (const auto& pair : pairs) {
        const Eigen::Vector3d s =
            Eigen::Vector3d(pair.source_point.x, pair.source_point.y, pair.source_point.z) -
            src_mean;
        const Eigen::Vector3d t =
            Eigen::Vector3d(pair.target_point.x, pair.target_point.y, pair.target_point.z) -
            tgt_mean;
        cross += t * s.transpose();
        src_scatter += s * s.transpose();
    }

    // Source points must span at least a plane; a collinear or coincident
    // configuration leaves the rotation underdetermined.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> scatter_eig(src_scatter);
    const Eigen::Vector3d evals = scatter_eig.eigenvalues();  // ascending
    if (!(evals(2) > 0.0) || evals(1) <= 1e-12 * evals(2))
        throw DegenerateConfigurationError(
            "fit_rigid: source points are collinear or coincident");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Vector3d d = Eigen::Vector3d::Ones();
    if ((u * v.transpose()).determinant() < 0.0) d(2) = -1.0;
    const Eigen::Matrix3d rotation = u * d.asDiagonal() * v.transpose();
    const Eigen::Vector3d translation = tgt_mean - rotation * src_mean;

    Mat3 r;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) r(row, col) = rotation(row, col);

    RigidMotion motion;
    motion.rotation = euler_from_matrix(r);
    motion.translation = {translation(0), translation(1), translation(2)};
    return motion;
}

IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                     const IcpConfig& config) {
    if (source.empty() || target.empty()) throw EmptyCloudError("icp_refine: empty cloud");
    if (config.max_iterations < 1)
        throw DegenerateConfigurationError("icp_refine: max_iterations must be >= 1");
    if (!(config.convergence_epsilon > 0.0))
        throw DegenerateConfigurationError("icp_refine: convergence_epsilon must be > 0");

    const KdTree index(target);
    IcpResult result;
    result.motion = init;

    double prev_rms = std::numeric_limits<double>::infinity();
    std::vector<CorrespondencePair> pairs;
    pairs.reserve(source.size());

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const Mat3 r = result.motion.rotation_matrix();
        pairs.clear();
        for (const Point3& p : source.points) {
            const Point3 moved = r.apply(p) + result.motion.translation;
            const NearestHit hit = index.nearest(moved);
            if (config.correspondence_cutoff && hit.distance > *config.correspondence_cutoff)
                continue;
            pairs.push_back({p, target.points[hit.index]});
        }
        if (pairs.size() < 3)
            throw DegenerateConfigurationError(
                "icp_refine: fewer than 3 correspondences survive the cutoff");

        result.motion = fit_rigid(pairs);

        const Mat3 rn = result.motion.rotation_matrix();
        double sum_sq = 0.0;
        for (const auto& pair : pairs) {
            const Point3 moved = rn.apply(pair.source_point) + result.motion.translation;
            sum_sq += squared_distance(moved, pair.target_point);
        }
        result.rms = std::sqrt(sum_sq / static_cast<double>(pairs.size()));
        result.rms_trace.push_back(result.rms);
        result.iterations = iter;

        if (prev_rms - result.rms < config.convergence_epsilon) break;
        prev_rms = result.rms;
    }
    return result;
}

std::vector<CorrespondencePair> load_correspondences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open correspondence file: " + path);

    std::vector<CorrespondencePair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::vector<double> v = parse_decimal_fields(line, path, line_no);
        if (v.empty()) continue;  // blank or comment-only line
        if (v.size() != 6)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 6 values per correspondence line, got " +
                             std::to_string(v.size()));
        pairs.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
    }
    return pairs;
}

}  // namespace gareg
