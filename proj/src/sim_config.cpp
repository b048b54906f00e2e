#include "trus/sim_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "trus/num_format.hpp"

namespace trus {

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) {
        throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v + "'");
    }
    return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': expected 0/1, got '" + v + "'");
}

std::vector<std::string> split_list(std::string v) {
    std::vector<std::string> out;
    for (char& c : v) {
        if (c == ',') c = ' ';
    }
    std::istringstream ss(v);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct KeyEntry {
    const char* doc;
    std::function<void(SimConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

std::string scenarios_to_string(const std::vector<Scenario>& sc) {
    std::string s;
    for (std::size_t i = 0; i < sc.size(); ++i) {
        if (i) s += ",";
        s += to_string(sc[i]);
    }
    return s;
}

std::string doubles_to_string(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        append_double(s, v[i]);
    }
    return s;
}

const std::vector<std::pair<std::string, KeyEntry>>& key_table() {
#define DBL(field) \
    [](SimConfig& c, const std::string& k, const std::string& v) { c.field = parse_double(k, v); }, \
    [](const SimConfig& c) { return format_double(c.field); }
#define INT(field) \
    [](SimConfig& c, const std::string& k, const std::string& v) { c.field = parse_int(k, v); }, \
    [](const SimConfig& c) { return std::to_string(c.field); }
#define BOOL(field) \
    [](SimConfig& c, const std::string& k, const std::string& v) { c.field = parse_bool(k, v); }, \
    [](const SimConfig& c) { return std::string(c.field ? "1" : "0"); }

    static const std::vector<std::pair<std::string, KeyEntry>> table = {
        {"phantom.semi_axis_x", {"mm, prostate semi-axis along the probe axis", DBL(phantom.semi_axes.x)}},
        {"phantom.semi_axis_y", {"mm, horizontal lateral semi-axis", DBL(phantom.semi_axes.y)}},
        {"phantom.semi_axis_z", {"mm, vertical semi-axis", DBL(phantom.semi_axes.z)}},
        {"phantom.taper", {"linear cross-section scaling along x, in [0, 0.9)", DBL(phantom.taper)}},
        {"phantom.stiffness_y", {"N/mm contact spring, horizontal", DBL(phantom.stiffness_y)}},
        {"phantom.stiffness_z", {"N/mm contact spring, vertical", DBL(phantom.stiffness_z)}},
        {"phantom.damping_y", {"N*s/mm contact damping, horizontal", DBL(phantom.damping_y)}},
        {"phantom.damping_z", {"N*s/mm contact damping, vertical", DBL(phantom.damping_z)}},
        {"phantom.backlash_y", {"mm horizontal free play around force zero-crossing", DBL(phantom.backlash_y)}},
        {"phantom.deformation_per_newton", {"fractional cross-section squash per N of force deviation", DBL(phantom.deformation_per_newton)}},
        {"contact.equilibrium_distance", {"mm probe axis to phantom center at F_y reference", DBL(eq_center_distance)}},
        {"probe.radius", {"mm rotation center to imaging surface", DBL(probe_radius)}},
        {"image.width", {"mm image width (u extent)", DBL(image.width)}},
        {"image.depth", {"mm imaging depth (v extent)", DBL(image.depth)}},
        {"image.resolution", {"mm per pixel for the segmentation grid", DBL(image.resolution)}},
        {"segmentation.min_area", {"mm^2 below which a frame classifies as background", DBL(seg.min_area)}},
        {"segmentation.jitter_sigma", {"mm Gaussian contour noise emulating segmentation error", DBL(seg.jitter_sigma)}},
        {"force.noise_sigma", {"N Gaussian noise on the force estimate", DBL(force_noise_sigma)}},
        {"pid.kp", {"mm/s per N proportional gain", DBL(pid.kp)}},
        {"pid.ki", {"mm/s per N*s integral gain", DBL(pid.ki)}},
        {"pid.kd", {"mm/s per N/s derivative gain", DBL(pid.kd)}},
        {"pid.deadzone", {"N error band with zero controller output", DBL(pid.deadzone)}},
        {"pid.f_ref_y", {"N horizontal force reference", DBL(pid.f_ref_y)}},
        {"pid.f_ref_z", {"N vertical force reference", DBL(pid.f_ref_z)}},
        {"pid.integrator_limit", {"mm/s cap on the integral contribution", DBL(pid.integrator_limit)}},
        {"pid.output_limit", {"mm/s per-axis command limit", DBL(pid.output_limit)}},
        {"pid.lowpass_tau", {"s measurement low-pass time constant, 0 = off", DBL(pid.lowpass_tau)}},
        {"motion.amplitude", {"mm/s velocity scale of the disturbance profile", DBL(motion.amplitude)}},
        {"motion.phase_shift", {"s shift of the horizontal component in scenario C", DBL(motion.phase_shift)}},
        {"motion.duration", {"s default duration for trace runs", DBL(motion.duration)}},
        {"sim.dt", {"s integration and control period", DBL(dt)}},
        {"sweep.rotation_speed", {"rad/s probe rotation speed", DBL(rotation_speed)}},
        {"sweep.slice_interval", {"rad between saved slices", DBL(slice_interval)}},
        {"sweep.contour_samples", {"points sampled per slice contour", INT(contour_samples)}},
        {"sweep.pause_threshold", {"N force deviation that pauses the sweep", DBL(pause_threshold)}},
        {"sweep.abort_force", {"N hard safety limit aborting the sweep", DBL(abort_force)}},
        {"sweep.max_duration", {"s sweep timeout", DBL(max_duration)}},
        {"sweep.edge_debounce", {"consecutive background frames ending a pass", INT(edge_debounce)}},
        {"sweep.keep_masks", {"keep rasterized masks in sweep records (memory heavy)", BOOL(keep_masks)}},
        {"icp.max_iterations", {"ICP iteration cap", INT(icp_max_iterations)}},
        {"icp.eps", {"ICP convergence threshold on fitness and RMSE deltas", DBL(icp_eps)}},
        {"icp.voxel", {"mm voxel for optional source downsampling, 0 = off", DBL(icp_voxel)}},
        {"icp.symmetric_hausdorff", {"report max of both directed Hausdorff distances", BOOL(icp_symmetric_hausdorff)}},
        {"experiment.sweeps_per_scenario", {"sweeps recorded per scenario", INT(sweeps_per_scenario)}},
        {"experiment.scenarios",
         {"comma list from S,H,V,C",
          [](SimConfig& c, const std::string& k, const std::string& v) {
              std::vector<Scenario> sc;
              for (const std::string& tok : split_list(v)) sc.push_back(scenario_from_string(tok));
              if (sc.empty()) throw std::invalid_argument("config key '" + k + "': empty list");
              c.scenarios = sc;
          },
          [](const SimConfig& c) { return scenarios_to_string(c.scenarios); }}},
        {"experiment.thresholds",
         {"mm comma list of ICP correspondence thresholds",
          [](SimConfig& c, const std::string& k, const std::string& v) {
              std::vector<double> th;
              for (const std::string& tok : split_list(v)) th.push_back(parse_double(k, tok));
              if (th.empty()) throw std::invalid_argument("config key '" + k + "': empty list");
              c.thresholds = th;
          },
          [](const SimConfig& c) { return doubles_to_string(c.thresholds); }}},
        {"experiment.base_seed",
         {"seed of the first sweep; sweep i uses base_seed + i",
          [](SimConfig& c, const std::string& k, const std::string& v) {
              c.base_seed = static_cast<std::uint64_t>(parse_double(k, v));
          },
          [](const SimConfig& c) { return std::to_string(c.base_seed); }}},
    };
#undef DBL
#undef INT
#undef BOOL
    return table;
}

}  // namespace

void finalize(SimConfig& cfg) {
    if (cfg.phantom.semi_axes.x <= 0 || cfg.phantom.semi_axes.y <= 0 || cfg.phantom.semi_axes.z <= 0) {
        throw std::invalid_argument("config: phantom semi-axes must be positive");
    }
    if (cfg.phantom.taper < 0.0 || cfg.phantom.taper >= 1.0) {
        throw std::invalid_argument("config: phantom.taper must be in [0, 1)");
    }
    if (cfg.phantom.stiffness_y < 0.0 || cfg.phantom.stiffness_z < 0.0) {
        throw std::invalid_argument("config: stiffness must be >= 0");
    }
    if (cfg.phantom.deformation_per_newton < 0.0 || cfg.phantom.deformation_per_newton > 0.2) {
        throw std::invalid_argument("config: phantom.deformation_per_newton must be in [0, 0.2]");
    }
    if (cfg.probe_radius < 0.0) throw std::invalid_argument("config: probe.radius must be >= 0");
    if (cfg.dt <= 0.0) throw std::invalid_argument("config: sim.dt must be > 0");
    if (cfg.rotation_speed <= 0.0) throw std::invalid_argument("config: rotation_speed must be > 0");
    if (cfg.pid.deadzone < 0.0) throw std::invalid_argument("config: pid.deadzone must be >= 0");
    if (cfg.pid.output_limit <= 0.0 || cfg.pid.integrator_limit <= 0.0) {
        throw std::invalid_argument("config: pid limits must be > 0");
    }
    if (cfg.motion.amplitude < 0.0) throw std::invalid_argument("config: motion.amplitude must be >= 0");
    for (double th : cfg.thresholds) {
        if (th <= 0.0) throw std::invalid_argument("config: thresholds must be > 0");
    }
    cfg.seg.image = cfg.image;
    // insertion offset at which the contact force vanishes; pressing from
    // there to the equilibrium distance produces exactly the force reference
    double depth = 0.0;
    if (cfg.phantom.stiffness_y > 0.0) depth = cfg.pid.f_ref_y / cfg.phantom.stiffness_y;
    cfg.phantom.zero_force_offset = {0.0, cfg.eq_center_distance + depth + cfg.phantom.backlash_y, 0.0};
}

SimConfig default_config() {
    SimConfig cfg;
    finalize(cfg);
    return cfg;
}

void apply_key(SimConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, entry] : key_table()) {
        if (name == key) {
            entry.set(cfg, key, value);
            return;
        }
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    finalize(cfg);
    return cfg;
}

std::vector<std::pair<std::string, std::string>> dump_config(const SimConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(key_table().size());
    for (const auto& [name, entry] : key_table()) out.emplace_back(name, entry.get(cfg));
    return out;
}

std::vector<std::pair<std::string, std::string>> config_keys() {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(key_table().size());
    for (const auto& [name, entry] : key_table()) out.emplace_back(name, entry.doc);
    return out;
}

}  // namespace trus
