#include "trus/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace trus {

RigidTransform RigidTransform::translation(const Vec3& t) {
    RigidTransform out;
    out.at(0, 3) = t.x;
    out.at(1, 3) = t.y;
    out.at(2, 3) = t.z;
    return out;
}

RigidTransform RigidTransform::axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(angle)) {
        throw std::invalid_argument("axis_angle: zero axis or non-finite angle");
    }
    const double ux = axis.x / n, uy = axis.y / n, uz = axis.z / n;
    const double c = std::cos(angle), s = std::sin(angle), v = 1.0 - c;
    RigidTransform out;
    out.at(0, 0) = c + ux * ux * v;
    out.at(0, 1) = ux * uy * v - uz * s;
    out.at(0, 2) = ux * uz * v + uy * s;
    out.at(1, 0) = uy * ux * v + uz * s;
    out.at(1, 1) = c + uy * uy * v;
    out.at(1, 2) = uy * uz * v - ux * s;
    out.at(2, 0) = uz * ux * v - uy * s;
    out.at(2, 1) = uz * uy * v + ux * s;
    out.at(2, 2) = c + uz * uz * v;
    return out;
}

RigidTransform RigidTransform::from_row_major(const std::array<double, 16>& m) {
    RigidTransform out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            out.at(r, c) = m[static_cast<std::size_t>(r * 4 + c)];
        }
    }
    return out;
}

bool RigidTransform::valid(double tol) const {
    if (m_[12] != 0.0 || m_[13] != 0.0 || m_[14] != 0.0 || m_[15] != 1.0) return false;
    for (double v : m_) {
        if (!std::isfinite(v)) return false;
    }
    // R^T R == I
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += at(k, i) * at(k, j);
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(dot - want) > tol) return false;
        }
    }
    const double det = at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
                       at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
                       at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    return std::abs(det - 1.0) <= tol;
}

Bounds bounds(const PointCloud& pc) {
    Bounds b{};
    if (pc.empty()) return b;
    b.lo = b.hi = pc.points.front();
    for (const Vec3& p : pc.points) {
        b.lo.x = std::min(b.lo.x, p.x);
        b.lo.y = std::min(b.lo.y, p.y);
        b.lo.z = std::min(b.lo.z, p.z);
        b.hi.x = std::max(b.hi.x, p.x);
        b.hi.y = std::max(b.hi.y, p.y);
        b.hi.z = std::max(b.hi.z, p.z);
    }
    return b;
}

RigidTransform slice_transform(double phi, double r) {
    if (!std::isfinite(phi) || !std::isfinite(r)) {
        throw std::invalid_argument("slice_transform: non-finite input");
    }
    if (r < 0.0) {
        throw std::invalid_argument("slice_transform: negative probe radius");
    }
    const double c = std::cos(phi), s = std::sin(phi);
    RigidTransform out;
    out.at(1, 1) = c;
    out.at(1, 2) = -s;
    out.at(1, 3) = r * c;
    out.at(2, 1) = s;
    out.at(2, 2) = c;
    out.at(2, 3) = r * s;
    return out;
}

PointCloud apply_transform_serial(const RigidTransform& t, const PointCloud& pc) {
    if (!t.valid()) throw std::invalid_argument("apply_transform: invalid transform");
    PointCloud out;
    out.points.resize(pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) out.points[i] = t.apply(pc.points[i]);
    return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc) {
    if (!t.valid()) throw std::invalid_argument("apply_transform: invalid transform");
    PointCloud out;
    out.points.resize(pc.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pc.size());
#pragma omp parallel for schedule(static) if (n > 8192)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out.points[static_cast<std::size_t>(i)] = t.apply(pc.points[static_cast<std::size_t>(i)]);
    }
    return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) sum += a.at(r, k) * b.at(k, c);
            out.at(r, c) = sum;
        }
        out.at(r, 3) = a.at(r, 0) * b.at(0, 3) + a.at(r, 1) * b.at(1, 3) +
                       a.at(r, 2) * b.at(2, 3) + a.at(r, 3);
    }
    return out;
}

RigidTransform invert(const RigidTransform& t) {
    RigidTransform out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out.at(r, c) = t.at(c, r);
    }
    const Vec3 tr = t.translation_part();
    out.at(0, 3) = -(t.at(0, 0) * tr.x + t.at(1, 0) * tr.y + t.at(2, 0) * tr.z);
    out.at(1, 3) = -(t.at(0, 1) * tr.x + t.at(1, 1) * tr.y + t.at(2, 1) * tr.z);
    out.at(2, 3) = -(t.at(0, 2) * tr.x + t.at(1, 2) * tr.y + t.at(2, 2) * tr.z);
    return out;
}

}  // namespace trus
