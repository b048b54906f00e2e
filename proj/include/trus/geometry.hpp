#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace trus {

/// 3D vector in mm (or mm/s, N depending on context fixed by the call site).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double squared_norm() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(squared_norm()); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double squared_distance(const Vec3& a, const Vec3& b) { return (a - b).squared_norm(); }

/// 2D image-plane point: u along the probe x-axis, v imaging depth from the
/// probe surface, both in mm.
struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

/// 4x4 homogeneous rigid transform, row-major storage. Rotation block must be
/// orthonormal with det +1; bottom row is exactly [0,0,0,1].
class RigidTransform {
  public:
    RigidTransform() : m_{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1} {}

    static RigidTransform identity() { return RigidTransform{}; }
    static RigidTransform translation(const Vec3& t);
    /// Rotation about an arbitrary axis (Rodrigues), zero translation.
    static RigidTransform axis_angle(const Vec3& axis, double angle);

    double at(int r, int c) const { return m_[static_cast<std::size_t>(r * 4 + c)]; }
    double& at(int r, int c) { return m_[static_cast<std::size_t>(r * 4 + c)]; }

    const std::array<double, 16>& row_major() const { return m_; }
    static RigidTransform from_row_major(const std::array<double, 16>& m);

    Vec3 apply(const Vec3& p) const {
        return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z + m_[3],
                m_[4] * p.x + m_[5] * p.y + m_[6] * p.z + m_[7],
                m_[8] * p.x + m_[9] * p.y + m_[10] * p.z + m_[11]};
    }

    /// Rotation block only (no translation).
    Vec3 rotate(const Vec3& p) const {
        return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z,
                m_[4] * p.x + m_[5] * p.y + m_[6] * p.z,
                m_[8] * p.x + m_[9] * p.y + m_[10] * p.z};
    }

    Vec3 translation_part() const { return {m_[3], m_[7], m_[11]}; }

    /// Orthonormal rotation with det +1 (within tol) and exact [0,0,0,1] bottom row.
    bool valid(double tol = 1e-9) const;

  private:
    std::array<double, 16> m_;
};

/// Flat list of 3D points in mm.
struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Axis-aligned bounds of a cloud; lo/hi undefined for an empty cloud.
struct Bounds {
    Vec3 lo;
    Vec3 hi;
};
Bounds bounds(const PointCloud& pc);

/// Slice-to-volume transform: rotation about the x-axis by phi with the
/// radial probe offset r folded into the translation. A 2D image point (u, v)
/// embedded as (u, v, 0) lands at (u, (v+r)cos phi, (v+r)sin phi).
RigidTransform slice_transform(double phi, double r);

/// Maps every point by T; order and length preserved. Runs the loop in
/// parallel for large clouds; output is identical to the serial path.
PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc);
PointCloud apply_transform_serial(const RigidTransform& t, const PointCloud& pc);

/// compose(A, B) applies B first, then A.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

}  // namespace trus
