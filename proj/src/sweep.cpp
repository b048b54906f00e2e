#include "trus/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trus/num_format.hpp"

namespace trus {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

RigidTransform probe_pose_of(const WorldState& w) {
    return RigidTransform::translation(w.probe_pos);
}

// Model pose at the phantom's current position. Contact-force deviation from
// the reference squashes the soft cross-section along the loaded axes, which
// is what the probe images during motion transients.
PhantomModel phantom_at(const SimConfig& cfg, const Vec3& phantom_pos, const Vec3& force_true) {
    PhantomModel m = cfg.phantom;
    m.pose = RigidTransform::translation(phantom_pos);
    const double g = m.deformation_per_newton;
    if (g > 0.0) {
        const double dev_y = std::abs(force_true.y - cfg.pid.f_ref_y);
        const double dev_z = std::abs(force_true.z - cfg.pid.f_ref_z);
        m.semi_axes.y *= std::max(1.0 - g * dev_y, 0.5);
        m.semi_axes.z *= std::max(1.0 - g * dev_z, 0.5);
    }
    return m;
}

SegmentationResult segment_at(const WorldState& w, const SimConfig& cfg, GaussianRng& rng) {
    const auto contour = slice_contour(phantom_at(cfg, w.phantom_pos, w.last_force_true),
                                       probe_pose_of(w), w.probe_phi, cfg.probe_radius, cfg.image,
                                       cfg.contour_samples);
    return segment(cfg.seg, contour, &rng, cfg.keep_masks);
}

int slice_every_steps(const SimConfig& cfg) {
    const int n = static_cast<int>(cfg.slice_interval / (cfg.rotation_speed * cfg.dt) + 0.5);
    return std::max(n, 1);
}

WorldState advance(const WorldState& w, const SimConfig& cfg, GaussianRng& rng,
                   SweepRecord& rec) {
    WorldState n = step(w, cfg, rng);
    if (n.last_force_true.norm() > cfg.abort_force) {
        throw ForceAbortError("force safety abort: |F| = " +
                              std::to_string(n.last_force_true.norm()) + " N at t = " +
                              std::to_string(n.t) + " s");
    }
    if (n.t > cfg.max_duration) {
        throw SweepTimeoutError("sweep exceeded max_duration of " +
                                std::to_string(cfg.max_duration) + " s");
    }
    rec.force_trace.push_back(
        {n.t, n.last_force_meas, n.last_force_true, n.last_cmd_world, n.phase == SweepPhase::Paused});
    rec.pose_trace.push_back({n.t, n.probe_pos, n.phantom_pos, n.probe_phi});
    return n;
}

constexpr double kQuarterTurn = 1.5707963267948966;

}  // namespace

std::size_t SweepRecord::present_slices() const {
    std::size_t n = 0;
    for (const Slice& s : slices) {
        if (s.seg.present) ++n;
    }
    return n;
}

double force_deviation(const Vec3& f_meas, const PidConfig& pid) {
    return std::hypot(f_meas.y - pid.f_ref_y, f_meas.z - pid.f_ref_z);
}

WorldState init_world(Scenario scenario, const SimConfig& cfg, GaussianRng& rng,
                      SweepRecord* rec) {
    WorldState w;
    w.scenario = scenario;
    w.phase = SweepPhase::Init;
    w.phantom_base = {0.0, 0.0, 0.0};
    w.phantom_pos = w.phantom_base;
    // equilibrium insertion pose (hand guidance is simulated as placement)
    w.probe_pos = {-0.5 * cfg.image.width, cfg.eq_center_distance, 0.0};
    w.last_force_true = contact_force(cfg.phantom, w.probe_pos, {}, w.phantom_pos);
    // one visual-positioning correction along the probe axis
    const auto contour = slice_contour(phantom_at(cfg, w.phantom_pos, w.last_force_true),
                                       probe_pose_of(w), 0.0,
                                       cfg.probe_radius, cfg.image, cfg.contour_samples);
    const auto seg = segment(cfg.seg, contour, &rng);
    if (!seg.present) throw NoProstateError("no prostate in view at initialization");
    const double offset = visual_offset(seg, cfg.image);
    w.probe_pos.x += offset;
    if (rec) {
        rec->init_visual_offset = offset;
        rec->probe_init = w.probe_pos;
        rec->phantom_init = w.phantom_pos;
    }
    return w;
}

WorldState step(const WorldState& world, const SimConfig& cfg, GaussianRng& rng) {
    if (!world.probe_pos.finite() || !world.phantom_pos.finite() ||
        !std::isfinite(world.probe_phi)) {
        throw SweepError("simulation state became non-finite");
    }
    WorldState n = world;
    n.step_count = world.step_count + 1;
    n.t = static_cast<double>(n.step_count) * cfg.dt;

    // phantom follows the closed-form disturbance displacement
    n.phantom_pos = world.phantom_base + displacement(n.t, world.scenario, cfg.motion);

    // force at the pre-step configuration drives this step's command
    const Vec3 probe_vel = tcp_to_world(world.pid.last_command);
    const Vec3 phantom_vel = velocity(world.t, world.scenario, cfg.motion);
    const Vec3 f_true = contact_force(cfg.phantom, world.probe_pos, probe_vel,
                                      world.phantom_pos, phantom_vel);
    const ForceMeasurement meas = measure_force(f_true, cfg.force_noise_sigma, rng);
    auto [cmd, pid_next] = pid_step(world.pid, meas.f, cfg.pid, cfg.dt);
    n.pid = pid_next;
    n.last_force_true = f_true;
    n.last_force_meas = meas.f;
    n.last_cmd_world = tcp_to_world(cmd);
    n.probe_pos = world.probe_pos + n.last_cmd_world * cfg.dt;

    const bool rotating = world.phase == SweepPhase::FindEdge ||
                          world.phase == SweepPhase::Recording ||
                          world.phase == SweepPhase::GotoSlice;
    if (rotating) n.probe_phi = world.probe_phi + world.phi_rate * cfg.dt;
    return n;
}

SweepRecord run_sweep(Scenario scenario, const SimConfig& cfg, std::uint64_t seed) {
    GaussianRng rng(seed);
    SweepRecord rec;
    rec.scenario = scenario;
    rec.seed = seed;

    WorldState w = init_world(scenario, cfg, rng, &rec);
    const int slice_every = slice_every_steps(cfg);

    // find the near edge rotating in +phi
    w.phase = SweepPhase::FindEdge;
    w.phi_rate = cfg.rotation_speed;
    int rotating_steps = 0;
    int absent_streak = 0;
    while (w.phase == SweepPhase::FindEdge) {
        w = advance(w, cfg, rng, rec);
        ++rotating_steps;
        if (rotating_steps % slice_every == 0) {
            const SegmentationResult seg = segment_at(w, cfg, rng);
            absent_streak = seg.present ? 0 : absent_streak + 1;
            if (absent_streak >= cfg.edge_debounce) {
                w.phase = SweepPhase::Recording;
                w.phi_rate = -cfg.rotation_speed;
            }
        }
        if (w.probe_phi > kQuarterTurn) {
            throw NoProstateError("no prostate edge found within a quarter turn");
        }
    }

    // recording pass in -phi with force pauses
    rotating_steps = 0;
    absent_streak = 0;
    bool seen_present = false;
    bool slice_due = false;
    double pause_start = 0.0;
    while (w.phase != SweepPhase::Done) {
        if (w.phase == SweepPhase::Recording && slice_due) {
            if (force_deviation(w.last_force_meas, cfg.pid) > cfg.pause_threshold) {
                w.phase = SweepPhase::Paused;
                pause_start = w.t;
            } else {
                SegmentationResult seg = segment_at(w, cfg, rng);
                const bool present = seg.present;
                rec.slices.push_back({w.t, w.probe_phi, std::move(seg)});
                slice_due = false;
                if (present) {
                    seen_present = true;
                    absent_streak = 0;
                } else {
                    ++absent_streak;
                    if (seen_present && absent_streak >= cfg.edge_debounce) {
                        w.phase = SweepPhase::Done;
                        break;
                    }
                }
            }
        }
        if (w.phase == SweepPhase::Paused &&
            force_deviation(w.last_force_meas, cfg.pid) <= cfg.pause_threshold) {
            rec.pause_events.emplace_back(pause_start, w.t);
            w.phase = SweepPhase::Recording;
            continue;  // take the pending slice before stepping on
        }
        w = advance(w, cfg, rng, rec);
        if (w.phase == SweepPhase::Recording) {
            ++rotating_steps;
            if (rotating_steps % slice_every == 0) slice_due = true;
        }
        if (w.probe_phi < -kQuarterTurn) {
            throw NoProstateError("far prostate edge not found within a quarter turn");
        }
    }

    rec.duration = w.t;
    rec.phi_min = rec.phi_max = rec.slices.empty() ? 0.0 : rec.slices.front().phi;
    for (const auto& s : rec.slices) {
        rec.phi_min = std::min(rec.phi_min, s.phi);
        rec.phi_max = std::max(rec.phi_max, s.phi);
    }
    w.phi_rate = 0.0;
    w.recorded_phi_min = rec.phi_min;
    w.recorded_phi_max = rec.phi_max;
    rec.final_state = w;
    return rec;
}

GotoResult goto_slice(const WorldState& world, double phi_target, const SimConfig& cfg,
                      GaussianRng& rng) {
    if (world.phase != SweepPhase::Done) {
        throw SweepError("goto_slice requires a completed sweep");
    }
    if (phi_target < world.recorded_phi_min - 1e-12 ||
        phi_target > world.recorded_phi_max + 1e-12) {
        throw std::invalid_argument("goto_slice: target outside the recorded sweep range");
    }
    GotoResult res;
    res.world = world;
    const double tol = 0.5 * cfg.rotation_speed * cfg.dt;
    if (std::abs(world.probe_phi - phi_target) <= tol) return res;

    const double dir = phi_target > world.probe_phi ? 1.0 : -1.0;
    res.world.phase = SweepPhase::GotoSlice;
    res.world.phi_rate = dir * cfg.rotation_speed;
    const double t0 = res.world.t;
    while ((phi_target - res.world.probe_phi) * dir > tol) {
        res.world = step(res.world, cfg, rng);
        res.max_force_deviation =
            std::max(res.max_force_deviation, force_deviation(res.world.last_force_meas, cfg.pid));
        if (res.world.t - t0 > cfg.max_duration) {
            throw SweepTimeoutError("goto_slice exceeded max_duration");
        }
    }
    res.world.phi_rate = 0.0;
    res.world.phase = SweepPhase::Done;
    res.duration = res.world.t - t0;
    return res;
}

SweepRecord run_tracking(Scenario scenario, const SimConfig& cfg, std::uint64_t seed,
                         double duration) {
    GaussianRng rng(seed);
    SweepRecord rec;
    rec.scenario = scenario;
    rec.seed = seed;
    WorldState w = init_world(scenario, cfg, rng, &rec);
    const auto n_steps = static_cast<std::uint64_t>(duration / cfg.dt + 0.5);
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        w = step(w, cfg, rng);
        rec.force_trace.push_back(
            {w.t, w.last_force_meas, w.last_force_true, w.last_cmd_world, false});
        rec.pose_trace.push_back({w.t, w.probe_pos, w.phantom_pos, w.probe_phi});
    }
    rec.duration = w.t;
    rec.final_state = w;
    return rec;
}

// ---------------------------------------------------------------------------
// record serialization

namespace {

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string slice_file_name(std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "slice_%05zu.csv", idx);
    return buf;
}

}  // namespace

void save_record(const SweepRecord& rec, const SimConfig& cfg, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "contours");

    json meta;
    meta["scenario"] = to_string(rec.scenario);
    meta["seed"] = rec.seed;
    meta["duration_s"] = rec.duration;
    meta["phi_min"] = rec.phi_min;
    meta["phi_max"] = rec.phi_max;
    meta["n_slices"] = rec.slices.size();
    meta["n_present_slices"] = rec.present_slices();
    meta["init_visual_offset_mm"] = rec.init_visual_offset;
    meta["probe_init"] = {rec.probe_init.x, rec.probe_init.y, rec.probe_init.z};
    meta["phantom_init"] = {rec.phantom_init.x, rec.phantom_init.y, rec.phantom_init.z};
    json pauses = json::array();
    for (const auto& [a, b] : rec.pause_events) pauses.push_back({a, b});
    meta["pause_events"] = pauses;
    json cfg_json = json::object();
    for (const auto& [k, v] : dump_config(cfg)) cfg_json[k] = v;
    meta["config"] = cfg_json;
    write_file(fs::path(dir) / "meta.json", meta.dump(2) + "\n");

    std::string slices = "index,t,phi,present,area_mm2,centroid_u,centroid_v,n_contour\n";
    for (std::size_t i = 0; i < rec.slices.size(); ++i) {
        const auto& s = rec.slices[i];
        slices += std::to_string(i);
        slices += ',';
        append_double(slices, s.t);
        slices += ',';
        append_double(slices, s.phi);
        slices += ',';
        slices += s.seg.present ? '1' : '0';
        slices += ',';
        append_double(slices, s.seg.area_mm2);
        slices += ',';
        append_double(slices, s.seg.centroid ? s.seg.centroid->u : 0.0);
        slices += ',';
        append_double(slices, s.seg.centroid ? s.seg.centroid->v : 0.0);
        slices += ',';
        slices += std::to_string(s.seg.contour.size());
        slices += '\n';
        if (!s.seg.contour.empty()) {
            write_contour_csv(s.seg.contour, (fs::path(dir) / "contours" / slice_file_name(i)).string());
        }
    }
    write_file(fs::path(dir) / "slices.csv", slices);

    std::string forces = "t,f_meas_y,f_meas_z,f_true_y,f_true_z,cmd_y,cmd_z,paused\n";
    for (const auto& f : rec.force_trace) {
        append_double(forces, f.t);
        forces += ',';
        append_double(forces, f.measured.y);
        forces += ',';
        append_double(forces, f.measured.z);
        forces += ',';
        append_double(forces, f.truth.y);
        forces += ',';
        append_double(forces, f.truth.z);
        forces += ',';
        append_double(forces, f.command_world.y);
        forces += ',';
        append_double(forces, f.command_world.z);
        forces += ',';
        forces += f.paused ? '1' : '0';
        forces += '\n';
    }
    write_file(fs::path(dir) / "forces.csv", forces);

    std::string traj = "t,probe_x,probe_y,probe_z,phantom_x,phantom_y,phantom_z,phi\n";
    for (const auto& p : rec.pose_trace) {
        append_double(traj, p.t);
        traj += ',';
        append_double(traj, p.probe.x);
        traj += ',';
        append_double(traj, p.probe.y);
        traj += ',';
        append_double(traj, p.probe.z);
        traj += ',';
        append_double(traj, p.phantom.x);
        traj += ',';
        append_double(traj, p.phantom.y);
        traj += ',';
        append_double(traj, p.phantom.z);
        traj += ',';
        append_double(traj, p.phi);
        traj += '\n';
    }
    write_file(fs::path(dir) / "trajectory.csv", traj);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

SweepRecord load_record(const std::string& dir) {
    std::ifstream meta_in(fs::path(dir) / "meta.json");
    if (!meta_in) throw std::runtime_error(dir + "/meta.json: cannot open");
    json meta = json::parse(meta_in);

    SweepRecord rec;
    rec.scenario = scenario_from_string(meta.at("scenario").get<std::string>());
    rec.seed = meta.at("seed").get<std::uint64_t>();
    rec.duration = meta.at("duration_s").get<double>();
    rec.phi_min = meta.at("phi_min").get<double>();
    rec.phi_max = meta.at("phi_max").get<double>();
    rec.init_visual_offset = meta.at("init_visual_offset_mm").get<double>();
    for (const auto& ev : meta.at("pause_events")) {
        rec.pause_events.emplace_back(ev.at(0).get<double>(), ev.at(1).get<double>());
    }

    std::ifstream slices_in(fs::path(dir) / "slices.csv");
    if (!slices_in) throw std::runtime_error(dir + "/slices.csv: cannot open");
    std::string line;
    std::getline(slices_in, line);  // header
    while (std::getline(slices_in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw std::runtime_error(dir + "/slices.csv: malformed row");
        SweepRecord::Slice s;
        const std::size_t idx = std::stoul(f[0]);
        s.t = std::stod(f[1]);
        s.phi = std::stod(f[2]);
        s.seg.present = f[3] == "1";
        s.seg.area_mm2 = std::stod(f[4]);
        if (s.seg.present) s.seg.centroid = Point2{std::stod(f[5]), std::stod(f[6])};
        const std::size_t n_contour = std::stoul(f[7]);
        if (n_contour > 0) {
            const fs::path cpath = fs::path(dir) / "contours" / slice_file_name(idx);
            std::ifstream cin(cpath);
            if (!cin) throw std::runtime_error(cpath.string() + ": cannot open");
            std::string cline;
            std::getline(cin, cline);  // header
            while (std::getline(cin, cline)) {
                if (cline.empty()) continue;
                const auto cf = split_csv_line(cline);
                if (cf.size() != 2) throw std::runtime_error(cpath.string() + ": malformed row");
                s.seg.contour.push_back({std::stod(cf[0]), std::stod(cf[1])});
            }
            if (s.seg.contour.size() != n_contour) {
                throw std::runtime_error(cpath.string() + ": contour size mismatch");
            }
        }
        rec.slices.push_back(std::move(s));
    }
    return rec;
}

}  // namespace trus
