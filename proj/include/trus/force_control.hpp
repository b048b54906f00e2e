#pragma once

#include <utility>

#include "trus/geometry.hpp"
#include "trus/rng.hpp"

namespace trus {

struct PidConfig {
    double kp = 2.5;   // mm/s per N
    double ki = 0.0;   // mm/s per N*s
    double kd = 0.02;  // mm/s per N/s
    double deadzone = 0.1;         // N
    double f_ref_y = 7.0;          // N
    double f_ref_z = 0.0;          // N
    double integrator_limit = 10.0;  // mm/s cap on the integral contribution
    double output_limit = 25.0;      // mm/s per axis
    double lowpass_tau = 0.0;        // s; 0 disables the measurement filter
};

struct PidState {
    double integral_y = 0.0;  // N*s
    double integral_z = 0.0;
    double prev_error_y = 0.0;  // deadzone-gated error of the previous step
    double prev_error_z = 0.0;
    double filtered_y = 0.0;  // low-pass state, valid when filter_primed
    double filtered_z = 0.0;
    bool filter_primed = false;
    Vec3 last_command;  // mm/s, TCP frame
};

struct ForceMeasurement {
    Vec3 f;              // N, TCP frame
    double noise_sigma;  // N
};

/// Adds independent zero-mean Gaussian noise per axis; exact pass-through at
/// sigma 0. Deterministic for a given rng state.
ForceMeasurement measure_force(const Vec3& true_force, double sigma, GaussianRng& rng);

/// One controller update. Error inside the deadzone contributes neither a
/// proportional nor a derivative term and freezes (does not reset) the
/// integrator. The x command is always zero.
std::pair<Vec3, PidState> pid_step(const PidState& state, const Vec3& measured,
                                   const PidConfig& cfg, double dt);

}  // namespace trus
