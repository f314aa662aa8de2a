#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gareg/errors.hpp"

namespace gareg {

// Units are millimeters for lengths and degrees for angles throughout,
// matching the reporting convention of the CLI.

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Point3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
    double squared_norm() const { return dot(*this); }
    double norm() const;
    bool finite() const;
};

double distance(const Point3& a, const Point3& b);
double squared_distance(const Point3& a, const Point3& b);

struct PointCloud {
    std::vector<Point3> points;
    std::string source_id;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    const Point3& operator[](std::size_t i) const { return points[i]; }
};

// Normalize an angle in degrees to the half-open interval [-180, 180).
double normalize_angle_deg(double deg);

struct EulerAngles {
    double alpha = 0.0;  // about x, degrees
    double beta = 0.0;   // about y, degrees
    double psi = 0.0;    // about z, degrees

    EulerAngles normalized() const {
        return {normalize_angle_deg(alpha), normalize_angle_deg(beta), normalize_angle_deg(psi)};
    }
    bool operator==(const EulerAngles& o) const {
        return alpha == o.alpha && beta == o.beta && psi == o.psi;
    }
};

// Row-major 3x3 matrix, only what rigid motions need.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    Point3 apply(const Point3& p) const {
        return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
                m[3] * p.x + m[4] * p.y + m[5] * p.z,
                m[6] * p.x + m[7] * p.y + m[8] * p.z};
    }
    Mat3 transposed() const;
    Mat3 operator*(const Mat3& o) const;
    double trace() const { return m[0] + m[4] + m[8]; }
};

// Fixed-axis convention: R = Rz(psi) * Ry(beta) * Rx(alpha), applied as
// p' = R * p + t. Angles in degrees.
Mat3 euler_to_matrix(const EulerAngles& angles);

// Inverse of euler_to_matrix. Chooses beta in [-90, 90]; near gimbal lock
// (|cos beta| < 1e-9) alpha is set to 0 and the remainder folds into psi.
EulerAngles euler_from_matrix(const Mat3& r);

struct RigidMotion {
    EulerAngles rotation;
    Point3 translation;  // mm

    Mat3 rotation_matrix() const { return euler_to_matrix(rotation); }
    Point3 apply(const Point3& p) const { return rotation_matrix().apply(p) + translation; }
    bool operator==(const RigidMotion&) const = default;
};

RigidMotion inverse(const RigidMotion& motion);
PointCloud apply_motion(const RigidMotion& motion, const PointCloud& cloud);

struct Aabb {
    Point3 min;
    Point3 max;

    Point3 extent() const { return max - min; }
    double diagonal() const { return extent().norm(); }
    // Grow each side outward by `fraction` of that axis extent.
    Aabb dilated(double fraction) const;
    bool contains(const Point3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
};

Point3 centroid(const PointCloud& cloud);
Aabb bounding_box(const PointCloud& cloud);

// Uniform random subsample without replacement, deterministic under seed.
// Selected points keep their input order. Returns the cloud unchanged if
// it already fits in target_count.
PointCloud downsample(const PointCloud& cloud, std::size_t target_count, std::uint64_t seed);

}  // namespace gareg
