#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trus/sim_config.hpp"

namespace trus {

struct SweepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ForceAbortError : SweepError {
    using SweepError::SweepError;
};
struct SweepTimeoutError : SweepError {
    using SweepError::SweepError;
};
struct NoProstateError : SweepError {
    using SweepError::SweepError;
};

enum class SweepPhase { Init, FindEdge, Recording, Paused, Done, GotoSlice };

/// Fixed-step world state. Frames: world == TCP; the image looks along the
/// negative y/z half-plane of the probe (TCP y points away from the tissue,
/// so pressing toward the phantom at the force reference reads +7 N).
struct WorldState {
    double t = 0.0;
    std::uint64_t step_count = 0;
    Vec3 probe_pos;
    double probe_phi = 0.0;
    double phi_rate = 0.0;
    Vec3 phantom_base;
    Vec3 phantom_pos;
    PidState pid;
    SweepPhase phase = SweepPhase::Init;
    Scenario scenario = Scenario::S;
    Vec3 last_force_true;
    Vec3 last_force_meas;
    Vec3 last_cmd_world;
    double recorded_phi_min = 0.0;
    double recorded_phi_max = 0.0;
};

struct SweepRecord {
    Scenario scenario = Scenario::S;
    std::uint64_t seed = 0;

    struct Slice {
        double t;
        double phi;
        SegmentationResult seg;
    };
    std::vector<Slice> slices;

    struct ForceSample {
        double t;
        Vec3 measured;
        Vec3 truth;
        Vec3 command_world;
        bool paused;
    };
    std::vector<ForceSample> force_trace;

    struct PoseSample {
        double t;
        Vec3 probe;
        Vec3 phantom;
        double phi;
    };
    std::vector<PoseSample> pose_trace;

    std::vector<std::pair<double, double>> pause_events;
    double duration = 0.0;
    double phi_min = 0.0;
    double phi_max = 0.0;
    double init_visual_offset = 0.0;
    Vec3 probe_init;
    Vec3 phantom_init;
    WorldState final_state;

    std::size_t present_slices() const;
};

/// TCP-frame velocity command to world frame (rotation by pi about x).
inline Vec3 tcp_to_world(const Vec3& cmd) { return {cmd.x, -cmd.y, -cmd.z}; }

/// Norm of the measured force deviation from the controller reference.
double force_deviation(const Vec3& f_meas, const PidConfig& pid);

/// Places the probe at the equilibrium insertion pose and centers it axially
/// with one visual-offset correction. Throws NoProstateError when the
/// segmentation sees nothing.
WorldState init_world(Scenario scenario, const SimConfig& cfg, GaussianRng& rng,
                      SweepRecord* rec = nullptr);

/// One fixed time step: analytic phantom motion, contact force, noisy
/// measurement, PID command, explicit-Euler probe integration, and rotation
/// when the phase rotates (never during Paused).
WorldState step(const WorldState& world, const SimConfig& cfg, GaussianRng& rng);

/// Full sweep: init, edge-finding rotation, recording pass with force pauses.
SweepRecord run_sweep(Scenario scenario, const SimConfig& cfg, std::uint64_t seed);

struct GotoResult {
    WorldState world;
    double max_force_deviation = 0.0;
    double duration = 0.0;
};

/// Rotates to the target slice at the sweep speed with compensation active.
GotoResult goto_slice(const WorldState& world, double phi_target, const SimConfig& cfg,
                      GaussianRng& rng);

/// Compensation-only run (no sweep rotation); used for tracking analysis.
SweepRecord run_tracking(Scenario scenario, const SimConfig& cfg, std::uint64_t seed,
                         double duration);

/// Directory layout: meta.json, slices.csv, forces.csv, trajectory.csv and
/// per-slice contour CSVs under contours/.
void save_record(const SweepRecord& rec, const SimConfig& cfg, const std::string& dir);
SweepRecord load_record(const std::string& dir);

}  // namespace trus
