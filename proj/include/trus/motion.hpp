#pragma once

#include <cstdint>
#include <string>

#include "trus/geometry.hpp"

namespace trus {

/// Phantom motion scenario: stationary, horizontal, vertical, combined.
enum class Scenario { S, H, V, C };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct MotionConfig {
    /// Velocity scale in mm/s. The default makes the peak-to-peak
    /// displacement of one axis exactly 15 mm (burst excursion sqrt(2)*A).
    double amplitude = 10.606601717798213;
    /// Time shift of the horizontal component in the combined scenario:
    /// one eighth of the 2*pi profile period.
    double phase_shift = 0.7853981633974483;
    double duration = 60.0;
    std::uint64_t seed = 0;  // reserved for stochastic variants; unused
};

/// Piecewise cosine burst profile: cos(t/2) on the last quarter of every
/// 2*pi period, zero otherwise. Horizontal = world y, vertical = world z.
Vec3 velocity(double t, Scenario scenario, const MotionConfig& cfg);

/// Closed-form integral of velocity (no numerical integration).
Vec3 displacement(double t, Scenario scenario, const MotionConfig& cfg);

}  // namespace trus
