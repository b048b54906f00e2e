#include "trus/force_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trus {

ForceMeasurement measure_force(const Vec3& true_force, double sigma, GaussianRng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("measure_force: negative sigma");
    ForceMeasurement m{true_force, sigma};
    if (sigma > 0.0) {
        m.f.x += sigma * rng.gaussian();
        m.f.y += sigma * rng.gaussian();
        m.f.z += sigma * rng.gaussian();
    }
    return m;
}

namespace {

struct AxisOut {
    double command;
    double integral;
    double error;
    double filtered;
};

AxisOut axis_step(double measured, double f_ref, double integral, double prev_error,
                  double filtered, bool primed, const PidConfig& cfg, double dt) {
    double f = measured;
    if (cfg.lowpass_tau > 0.0) {
        if (!primed) filtered = measured;
        filtered += (dt / (cfg.lowpass_tau + dt)) * (measured - filtered);
        f = filtered;
    }
    const double raw_error = f_ref - f;
    const bool in_deadzone = std::abs(raw_error) < cfg.deadzone;
    const double error = in_deadzone ? 0.0 : raw_error;

    if (!in_deadzone) {
        integral += error * dt;
        if (cfg.ki > 0.0) {
            const double cap = cfg.integrator_limit / cfg.ki;
            integral = std::clamp(integral, -cap, cap);
        }
    }
    const double derivative = in_deadzone ? 0.0 : (error - prev_error) / dt;
    double u = cfg.kp * error + cfg.ki * integral + cfg.kd * derivative;
    u = std::clamp(u, -cfg.output_limit, cfg.output_limit);
    return {u, integral, error, filtered};
}

}  // namespace

std::pair<Vec3, PidState> pid_step(const PidState& state, const Vec3& measured,
                                   const PidConfig& cfg, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");
    if (!measured.finite()) throw std::invalid_argument("pid_step: non-finite measurement");

    PidState next = state;
    const AxisOut y = axis_step(measured.y, cfg.f_ref_y, state.integral_y, state.prev_error_y,
                                state.filtered_y, state.filter_primed, cfg, dt);
    const AxisOut z = axis_step(measured.z, cfg.f_ref_z, state.integral_z, state.prev_error_z,
                                state.filtered_z, state.filter_primed, cfg, dt);
    next.integral_y = y.integral;
    next.integral_z = z.integral;
    next.prev_error_y = y.error;
    next.prev_error_z = z.error;
    next.filtered_y = y.filtered;
    next.filtered_z = z.filtered;
    next.filter_primed = true;
    next.last_command = {0.0, y.command, z.command};
    return {next.last_command, next};
}

}  // namespace trus
