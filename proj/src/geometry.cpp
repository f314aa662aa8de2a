#include "gareg/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "gareg/rng.hpp"

namespace gareg {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;
}  // namespace

double Point3::norm() const { return std::sqrt(squared_norm()); }

bool Point3::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double distance(const Point3& a, const Point3& b) { return std::sqrt(squared_distance(a, b)); }

double normalize_angle_deg(double deg) {
    double r = std::fmod(deg + 180.0, 360.0);
    if (r < 0.0) r += 360.0;
    return r - 180.0;
}

Mat3 Mat3::transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
    return t;
}

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) + (*this)(r, 2) * o(2, c);
        }
    }
    return out;
}

Mat3 euler_to_matrix(const EulerAngles& angles) {
    const double a = angles.alpha * kDegToRad;
    const double b = angles.beta * kDegToRad;
    const double p = angles.psi * kDegToRad;
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cp = std::cos(p), sp = std::sin(p);

    // R = Rz(psi) * Ry(beta) * Rx(alpha)
    Mat3 r;
    r(0, 0) = cp * cb;
    r(0, 1) = cp * sb * sa - sp * ca;
    r(0, 2) = cp * sb * ca + sp * sa;
    r(1, 0) = sp * cb;
    r(1, 1) = sp * sb * sa + cp * ca;
    r(1, 2) = sp * sb * ca - cp * sa;
    r(2, 0) = -sb;
    r(2, 1) = cb * sa;
    r(2, 2) = cb * ca;
    return r;
}

EulerAngles euler_from_matrix(const Mat3& r) {
    const double cb = std::hypot(r(0, 0), r(1, 0));  // |cos beta|
    EulerAngles out;
    out.beta = std::atan2(-r(2, 0), cb) * kRadToDeg;
    if (cb < 1e-9) {
        out.alpha = 0.0;
        out.psi = std::atan2(-r(0, 1), r(1, 1)) * kRadToDeg;
    } else {
        out.alpha = std::atan2(r(2, 1), r(2, 2)) * kRadToDeg;
        out.psi = std::atan2(r(1, 0), r(0, 0)) * kRadToDeg;
    }
    return out.normalized();
}

RigidMotion inverse(const RigidMotion& motion) {
    const Mat3 rt = motion.rotation_matrix().transposed();
    RigidMotion inv;
    inv.rotation = euler_from_matrix(rt);
    inv.translation = rt.apply(motion.translation) * -1.0;
    return inv;
}

PointCloud apply_motion(const RigidMotion& motion, const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloudError("apply_motion: empty cloud");
    const Mat3 r = motion.rotation_matrix();
    PointCloud out;
    out.source_id = cloud.source_id;
    out.points.reserve(cloud.size());
    for (const Point3& p : cloud.points) out.points.push_back(r.apply(p) + motion.translation);
    return out;
}

Aabb Aabb::dilated(double fraction) const {
    const Point3 pad = extent() * fraction;
    return {min - pad, max + pad};
}

Point3 centroid(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloudError("centroid: empty cloud");
    Point3 sum;
    for (const Point3& p : cloud.points) sum = sum + p;
    return sum * (1.0 / static_cast<double>(cloud.size()));
}

Aabb bounding_box(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyCloudError("bounding_box: empty cloud");
    Aabb box{cloud.points.front(), cloud.points.front()};
    for (const Point3& p : cloud.points) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.min.z = std::min(box.min.z, p.z);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
        box.max.z = std::max(box.max.z, p.z);
    }
    return box;
}

PointCloud downsample(const PointCloud& cloud, std::size_t target_count, std::uint64_t seed) {
    if (cloud.empty()) throw EmptyCloudError("downsample: empty cloud");
    if (target_count < 1) throw DegenerateCloudError("downsample: target_count must be >= 1");
    if (cloud.size() <= target_count) return cloud;

    // Partial Fisher-Yates over the index vector, then restore input order.
    std::vector<std::uint32_t> indices(cloud.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < target_count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(indices.size() - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(target_count);
    std::sort(indices.begin(), indices.end());

    PointCloud out;
    out.source_id = cloud.source_id;
    out.points.reserve(target_count);
    for (std::uint32_t idx : indices) out.points.push_back(cloud.points[idx]);
    return out;
}

}  // namespace gareg
