#include "trus/motion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trus {

namespace {

constexpr double kPeriod = 2.0 * std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

double base_velocity(double t) {
    const double frac = t / kPeriod - std::floor(t / kPeriod);
    return frac > 0.75 ? std::cos(t * 0.5) : 0.0;
}

// Integral of base_velocity from 0 to t. Bursts alternate sign: burst k
// contributes -(-1)^k * sqrt(2).
double base_displacement(double t) {
    const double k = std::floor(t / kPeriod);
    const double frac = t / kPeriod - k;
    const int k_int = static_cast<int>(k);
    // completed bursts 0..k-1 sum to -sqrt(2) when k is odd, 0 when even
    double d = (k_int % 2 != 0) ? -kSqrt2 : 0.0;
    if (frac > 0.75) {
        const double sign = (k_int % 2 == 0) ? 1.0 : -1.0;
        d += 2.0 * std::sin(t * 0.5) - sign * kSqrt2;
    }
    return d;
}

}  // namespace

Scenario scenario_from_string(const std::string& s) {
    if (s == "S" || s == "s") return Scenario::S;
    if (s == "H" || s == "h") return Scenario::H;
    if (s == "V" || s == "v") return Scenario::V;
    if (s == "C" || s == "c") return Scenario::C;
    throw std::invalid_argument("unknown scenario '" + s + "' (expected S, H, V or C)");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::S: return "S";
        case Scenario::H: return "H";
        case Scenario::V: return "V";
        case Scenario::C: return "C";
    }
    return "?";
}

Vec3 velocity(double t, Scenario scenario, const MotionConfig& cfg) {
    if (!(t >= 0.0)) throw std::invalid_argument("velocity: t must be >= 0");
    const double a = cfg.amplitude;
    switch (scenario) {
        case Scenario::S: return {0.0, 0.0, 0.0};
        case Scenario::H: return {0.0, a * base_velocity(t), 0.0};
        case Scenario::V: return {0.0, 0.0, a * base_velocity(t)};
        case Scenario::C:
            return {0.0, a * base_velocity(t + cfg.phase_shift), a * base_velocity(t)};
    }
    return {0.0, 0.0, 0.0};
}

Vec3 displacement(double t, Scenario scenario, const MotionConfig& cfg) {
    if (!(t >= 0.0)) throw std::invalid_argument("displacement: t must be >= 0");
    const double a = cfg.amplitude;
    switch (scenario) {
        case Scenario::S: return {0.0, 0.0, 0.0};
        case Scenario::H: return {0.0, a * base_displacement(t), 0.0};
        case Scenario::V: return {0.0, 0.0, a * base_displacement(t)};
        case Scenario::C: {
            // shifted horizontal component starts from its own t=0 value
            const double h = base_displacement(t + cfg.phase_shift) - base_displacement(cfg.phase_shift);
            return {0.0, a * h, a * base_displacement(t)};
        }
    }
    return {0.0, 0.0, 0.0};
}

}  // namespace trus
