#include "trus/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace trus {

namespace {

constexpr double kForceSaturation = 50.0;  // N
constexpr double kDampingRamp = 0.2;       // mm of engagement over which damping fades in

double clamp_force(double f) { return std::clamp(f, -kForceSaturation, kForceSaturation); }

double taper_scale(const PhantomModel& m, double x) {
    return std::max(1.0 + m.taper * (x / m.semi_axes.x), 1e-9);
}

// Horizontal free-play: force engages only outside the backlash band.
double deadband(double d, double band) {
    if (d > band) return d - band;
    if (d < -band) return d + band;
    return 0.0;
}

}  // namespace

double implicit_value(const PhantomModel& model, const Vec3& p_local) {
    const double a = model.semi_axes.x, b = model.semi_axes.y, c = model.semi_axes.z;
    const double s = taper_scale(model, p_local.x);
    const double yb = p_local.y / (b * s);
    const double zc = p_local.z / (c * s);
    return (p_local.x * p_local.x) / (a * a) + yb * yb + zc * zc;
}

Vec3 implicit_gradient(const PhantomModel& model, const Vec3& p_local) {
    const double a = model.semi_axes.x, b = model.semi_axes.y, c = model.semi_axes.z;
    const double s = taper_scale(model, p_local.x);
    const double cross = (p_local.y * p_local.y) / (b * b) + (p_local.z * p_local.z) / (c * c);
    double dfdx = 2.0 * p_local.x / (a * a);
    if (s > 1e-9) dfdx += cross * (-2.0 / (s * s * s)) * (model.taper / a);
    return {dfdx, 2.0 * p_local.y / (b * b * s * s), 2.0 * p_local.z / (c * c * s * s)};
}

bool contains(const PhantomModel& model, const Vec3& p_local) {
    return implicit_value(model, p_local) <= 1.0;
}

std::vector<Point2> slice_contour(const PhantomModel& model, const RigidTransform& probe_pose,
                                  double phi, double probe_radius, const ImageSpec& image,
                                  int n_samples) {
    if (n_samples < 8) throw std::invalid_argument("slice_contour: n_samples must be >= 8");
    if (!probe_pose.valid()) throw std::invalid_argument("slice_contour: invalid probe pose");

    const double cphi = std::cos(phi), sphi = std::sin(phi);
    const RigidTransform world_to_phantom = invert(model.pose);

    // implicit value at image coordinates (u, v); the image plane looks along
    // the -y/-z half of the probe frame (TCP y points away from the tissue)
    const auto eval = [&](double u, double v) {
        const double rho = v + probe_radius;
        const Vec3 probe_frame{u, -rho * cphi, -rho * sphi};
        const Vec3 world = probe_pose.apply(probe_frame);
        return implicit_value(model, world_to_phantom.apply(world));
    };

    // coarse interior seed
    constexpr double kGrid = 1.5;  // mm
    double best_f = std::numeric_limits<double>::infinity();
    double seed_u = 0.0, seed_v = 0.0;
    for (double u = 0.5 * kGrid; u < image.width; u += kGrid) {
        for (double v = 0.5 * kGrid; v < image.depth; v += kGrid) {
            const double f = eval(u, v);
            if (f < best_f) {
                best_f = f;
                seed_u = u;
                seed_v = v;
            }
        }
    }
    std::vector<Point2> contour;
    if (best_f > 1.0) return contour;  // plane misses the phantom (or sliver below grid size)

    contour.reserve(static_cast<std::size_t>(n_samples));
    constexpr double kMarch = 2.0;    // mm bracketing step
    constexpr double kTol = 1e-10;    // mm bisection tolerance
    for (int k = 0; k < n_samples; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / n_samples;
        const double du = std::cos(theta), dv = std::sin(theta);
        // distance to the window boundary along the ray
        double t_max = std::numeric_limits<double>::infinity();
        if (du > 0.0) t_max = std::min(t_max, (image.width - seed_u) / du);
        if (du < 0.0) t_max = std::min(t_max, (0.0 - seed_u) / du);
        if (dv > 0.0) t_max = std::min(t_max, (image.depth - seed_v) / dv);
        if (dv < 0.0) t_max = std::min(t_max, (0.0 - seed_v) / dv);

        double t_in = 0.0, t_out = -1.0;
        for (double t = kMarch; t <= t_max + kMarch; t += kMarch) {
            const double tc = std::min(t, t_max);
            if (eval(seed_u + tc * du, seed_v + tc * dv) > 1.0) {
                t_out = tc;
                break;
            }
            t_in = tc;
            if (tc >= t_max) break;
        }
        if (t_out < 0.0) continue;  // surface crossing lies outside the image window
        while (t_out - t_in > kTol) {
            const double tm = 0.5 * (t_in + t_out);
            if (eval(seed_u + tm * du, seed_v + tm * dv) > 1.0) {
                t_out = tm;
            } else {
                t_in = tm;
            }
        }
        contour.push_back({seed_u + t_in * du, seed_v + t_in * dv});
    }
    return contour;
}

ContactState contact_state(const PhantomModel& model, const Vec3& probe_pos_world,
                           const Vec3& probe_vel_world, const Vec3& phantom_pos_world,
                           const Vec3& phantom_vel_world) {
    if (!probe_pos_world.finite() || !phantom_pos_world.finite()) {
        throw std::invalid_argument("contact_state: non-finite pose");
    }
    ContactState st;
    st.relative_offset = probe_pos_world - phantom_pos_world - model.zero_force_offset;
    const Vec3 rel_vel = probe_vel_world - phantom_vel_world;

    const double engaged_y = deadband(st.relative_offset.y, model.backlash_y);
    const double ramp_y = std::min(std::abs(engaged_y) / kDampingRamp, 1.0);
    double fy = -model.stiffness_y * engaged_y - model.damping_y * rel_vel.y * ramp_y;
    double fz = -model.stiffness_z * st.relative_offset.z - model.damping_z * rel_vel.z;

    st.force_tcp = {0.0, clamp_force(fy), clamp_force(fz)};
    return st;
}

Vec3 contact_force(const PhantomModel& model, const Vec3& probe_pos_world,
                   const Vec3& probe_vel_world, const Vec3& phantom_pos_world,
                   const Vec3& phantom_vel_world) {
    return contact_state(model, probe_pos_world, probe_vel_world, phantom_pos_world,
                         phantom_vel_world)
        .force_tcp;
}

}  // namespace trus
