#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trus/force_control.hpp"
#include "trus/motion.hpp"
#include "trus/phantom.hpp"
#include "trus/segmentation.hpp"

namespace trus {

/// Central simulation configuration. Every value is overridable from a plain
/// key = value config file; see config_keys() for the full list.
struct SimConfig {
    PhantomModel phantom;
    /// Probe-axis-to-phantom-center distance at the force equilibrium (mm).
    double eq_center_distance = 26.0;
    double probe_radius = 9.0;  // mm, rotation center to imaging surface
    ImageSpec image;
    SegOracleConfig seg;
    double force_noise_sigma = 0.02;  // N
    PidConfig pid;
    MotionConfig motion;
    double dt = 0.01;  // s, control and integration period

    // sweep state machine
    double rotation_speed = 0.1;   // rad/s
    double slice_interval = 0.005; // rad between saved slices
    int contour_samples = 1600;
    double pause_threshold = 4.6;  // N deviation from the force reference
    double abort_force = 15.0;     // N hard safety limit
    double max_duration = 120.0;   // s
    int edge_debounce = 3;         // consecutive background frames ending a pass
    bool keep_masks = false;

    // registration
    int icp_max_iterations = 12;
    double icp_eps = 1e-6;
    double icp_voxel = 0.0;  // mm; 0 disables downsampling
    bool icp_symmetric_hausdorff = false;

    // experiment protocol
    int sweeps_per_scenario = 5;
    std::vector<Scenario> scenarios{Scenario::S, Scenario::H, Scenario::V, Scenario::C};
    std::vector<double> thresholds{0.4, 0.6, 0.8, 1.0, 1.2};
    std::uint64_t base_seed = 1;
};

/// Recomputes derived quantities (segmentation window, zero-force contact
/// offset) and validates ranges. Call after any direct field mutation.
void finalize(SimConfig& cfg);

SimConfig default_config();

/// Parses a plain-text config file: one `key = value` per line, `#` comments.
/// Unknown keys are an error.
SimConfig load_config(const std::string& path);

void apply_key(SimConfig& cfg, const std::string& key, const std::string& value);

/// Current configuration as ordered key/value pairs (config-file syntax);
/// used for the meta snapshots written next to results.
std::vector<std::pair<std::string, std::string>> dump_config(const SimConfig& cfg);

/// All recognized keys with their documentation line.
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace trus
