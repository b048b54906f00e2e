#pragma once

#include <vector>

#include "trus/geometry.hpp"

namespace trus {

/// Image window and rasterization grid of the simulated linear probe element.
struct ImageSpec {
    double width = 60.0;       // mm, u extent
    double depth = 50.0;       // mm, v extent
    double resolution = 0.1;   // mm per pixel

    int nu() const { return static_cast<int>(width / resolution + 0.5); }
    int nv() const { return static_cast<int>(depth / resolution + 0.5); }
};

/// Tapered-ellipsoid prostate stand-in with a decoupled linear-spring contact
/// model. The taper scales the (y,z) cross-section linearly along x, making
/// one end of the prostate larger. Contact: springs in TCP y/z around a
/// zero-force insertion pose, with optional damping and a horizontal backlash
/// band that models the loose probe fit.
struct PhantomModel {
    Vec3 semi_axes{22.0, 16.0, 23.0};  // mm; x along probe axis, y lateral, z vertical
    double taper = 0.15;               // in [0, 0.9)
    double stiffness_y = 2.0;          // N/mm
    double stiffness_z = 2.0;          // N/mm
    double damping_y = 0.05;           // N*s/mm
    double damping_z = 0.05;           // N*s/mm
    double backlash_y = 0.5;           // mm of horizontal free play at force zero-crossing
    /// Fractional compression of the (y, z) cross-section per newton of
    /// contact-force deviation: transient force squashes the soft prostate
    /// along the loaded axis. Zero force deviation leaves the shape exact.
    double deformation_per_newton = 0.055;
    /// Probe-minus-phantom offset at which contact force is zero.
    Vec3 zero_force_offset{0.0, 30.0, 0.0};
    /// Phantom frame in world (current pose; translation tracks the motion).
    RigidTransform pose;
};

/// Probe/phantom relative state and the resulting TCP-frame contact force.
struct ContactState {
    Vec3 relative_offset;  // mm: probe - phantom - zero_force_offset
    Vec3 force_tcp;        // N: external force on the probe, TCP frame
};

/// Value of the tapered-ellipsoid implicit function at a phantom-frame point;
/// <= 1 inside. s(x) = 1 + taper*(x/a), clamped positive.
double implicit_value(const PhantomModel& model, const Vec3& p_local);

/// Analytic gradient of implicit_value; used to convert implicit residuals to mm.
Vec3 implicit_gradient(const PhantomModel& model, const Vec3& p_local);

bool contains(const PhantomModel& model, const Vec3& p_local);

/// Intersection of the phantom surface with the image plane at probe angle
/// phi, expressed in image coordinates. Returns up to n_samples points,
/// dropping any part of the curve outside the width x depth window; empty
/// when the plane misses the phantom.
std::vector<Point2> slice_contour(const PhantomModel& model, const RigidTransform& probe_pose,
                                  double phi, double probe_radius, const ImageSpec& image,
                                  int n_samples);

ContactState contact_state(const PhantomModel& model, const Vec3& probe_pos_world,
                           const Vec3& probe_vel_world, const Vec3& phantom_pos_world,
                           const Vec3& phantom_vel_world);

/// External force on the probe in the TCP frame. Saturates at +/-50 N.
Vec3 contact_force(const PhantomModel& model, const Vec3& probe_pos_world,
                   const Vec3& probe_vel_world, const Vec3& phantom_pos_world,
                   const Vec3& phantom_vel_world = {});

}  // namespace trus
