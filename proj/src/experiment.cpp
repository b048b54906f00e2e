#include "trus/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include "trus/num_format.hpp"

namespace trus {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string sweep_name(Scenario sc, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s_%02d", to_string(sc).c_str(), index);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;
};

// sample standard deviation (N-1), matching the reported tables
MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double sq = 0.0;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.std_dev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
    return out;
}

std::string threshold_tag(double th) {
    std::string s = "thr";
    append_double(s, th);
    return s;
}

}  // namespace

ExperimentPlan plan_from_config(const SimConfig& cfg) {
    ExperimentPlan plan;
    plan.scenarios = cfg.scenarios;
    plan.sweeps_per_scenario = cfg.sweeps_per_scenario;
    plan.thresholds = cfg.thresholds;
    plan.base_seed = cfg.base_seed;
    return plan;
}

const AggregateRow* AggregateTable::find(const std::string& pair, double threshold) const {
    for (const AggregateRow& r : rows) {
        if (r.pair == pair && r.threshold == threshold) return &r;
    }
    return nullptr;
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const SimConfig& cfg) {
    if (plan.sweeps_per_scenario < 1) {
        throw std::invalid_argument("experiment: sweeps_per_scenario must be >= 1");
    }
    const bool has_s =
        std::find(plan.scenarios.begin(), plan.scenarios.end(), Scenario::S) != plan.scenarios.end();
    if (!has_s) throw std::invalid_argument("experiment: the protocol needs the S scenario");
    if (plan.sweeps_per_scenario < 2) {
        throw std::invalid_argument("experiment: intra-set S-S pairs need at least 2 S sweeps");
    }
    for (double th : plan.thresholds) {
        if (!(th > 0.0)) throw std::invalid_argument("experiment: thresholds must be > 0");
    }

    const bool to_disk = !plan.output_dir.empty();
    if (to_disk) {
        fs::create_directories(fs::path(plan.output_dir) / "clouds");
        fs::create_directories(fs::path(plan.output_dir) / "pairs");
        fs::create_directories(fs::path(plan.output_dir) / "traces");
    }

    // ---- sweep + reconstruction jobs (embarrassingly parallel, slot-indexed)
    struct SweepJob {
        Scenario scenario;
        int index;
        std::uint64_t seed;
        std::string name;
    };
    std::vector<SweepJob> jobs;
    for (Scenario sc : plan.scenarios) {
        for (int i = 0; i < plan.sweeps_per_scenario; ++i) {
            const std::uint64_t seed = plan.base_seed + static_cast<std::uint64_t>(jobs.size());
            jobs.push_back({sc, i, seed, sweep_name(sc, i)});
        }
    }

    ExperimentResult result;
    result.clouds.resize(jobs.size());
    result.sweeps.resize(jobs.size());
    std::vector<std::string> job_errors(jobs.size());

    const std::ptrdiff_t n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t j = 0; j < n_jobs; ++j) {
        const SweepJob& job = jobs[static_cast<std::size_t>(j)];
        try {
            SweepRecord rec = run_sweep(job.scenario, cfg, job.seed);
            PointCloud cloud = reconstruct(rec, cfg.probe_radius);
            SweepSummary sum;
            sum.name = job.name;
            sum.scenario = job.scenario;
            sum.seed = job.seed;
            sum.duration = rec.duration;
            sum.slices = rec.slices.size();
            sum.cloud_points = cloud.size();
            sum.pause_events = rec.pause_events.size();
            if (to_disk) {
                write_ply(cloud, (fs::path(plan.output_dir) / "clouds" / (job.name + ".ply")).string());
                emit_traces(rec, (fs::path(plan.output_dir) / "traces" / job.name).string());
            }
            result.sweeps[static_cast<std::size_t>(j)] = std::move(sum);
            result.clouds[static_cast<std::size_t>(j)] = std::move(cloud);
        } catch (const std::exception& e) {
            job_errors[static_cast<std::size_t>(j)] =
                job.name + " (seed " + std::to_string(job.seed) + "): " + e.what();
        }
    }
    for (const std::string& err : job_errors) {
        if (!err.empty()) throw std::runtime_error("experiment: sweep failed: " + err);
    }

    // ---- registration jobs
    std::map<Scenario, std::vector<std::size_t>> by_scenario;
    for (std::size_t j = 0; j < jobs.size(); ++j) by_scenario[jobs[j].scenario].push_back(j);
    const auto& s_clouds = by_scenario.at(Scenario::S);

    // one tree per stationary target, shared across pair jobs
    std::vector<const KdTree*> s_trees(s_clouds.size(), nullptr);
    std::vector<std::unique_ptr<KdTree>> tree_store(s_clouds.size());
    const std::ptrdiff_t n_targets = static_cast<std::ptrdiff_t>(s_clouds.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n_targets; ++k) {
        tree_store[static_cast<std::size_t>(k)] =
            std::make_unique<KdTree>(result.clouds[s_clouds[static_cast<std::size_t>(k)]]);
    }
    for (std::size_t k = 0; k < s_clouds.size(); ++k) s_trees[k] = tree_store[k].get();

    struct PairJob {
        std::string pair;
        std::size_t source_job;
        std::size_t target_job;
        std::size_t target_s_pos;  // into s_trees
        double threshold;
    };
    std::vector<PairJob> pair_jobs;
    for (double th : plan.thresholds) {
        // S-S over unique unordered pairs: source is the higher-index cloud
        for (std::size_t a = 0; a < s_clouds.size(); ++a) {
            for (std::size_t b = a + 1; b < s_clouds.size(); ++b) {
                pair_jobs.push_back({"S-S", s_clouds[b], s_clouds[a], a, th});
            }
        }
        // S-X over the full cross product: moving cloud as source
        for (Scenario sc : plan.scenarios) {
            if (sc == Scenario::S) continue;
            const std::string tag = "S-" + to_string(sc);
            for (std::size_t src : by_scenario.at(sc)) {
                for (std::size_t tpos = 0; tpos < s_clouds.size(); ++tpos) {
                    pair_jobs.push_back({tag, src, s_clouds[tpos], tpos, th});
                }
            }
        }
    }

    result.pairs.resize(pair_jobs.size());
    std::vector<std::string> pair_errors(pair_jobs.size());
    const std::ptrdiff_t n_pairs = static_cast<std::ptrdiff_t>(pair_jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < n_pairs; ++k) {
        const PairJob& pj = pair_jobs[static_cast<std::size_t>(k)];
        try {
            IcpParams params;
            params.threshold = pj.threshold;
            params.max_iterations = cfg.icp_max_iterations;
            params.eps = cfg.icp_eps;
            params.voxel = cfg.icp_voxel;
            params.symmetric_hausdorff = cfg.icp_symmetric_hausdorff;
            PairResult pr;
            pr.pair = pj.pair;
            pr.source_name = jobs[pj.source_job].name;
            pr.target_name = jobs[pj.target_job].name;
            pr.report = icp(result.clouds[pj.source_job], result.clouds[pj.target_job],
                            *s_trees[pj.target_s_pos], params);
            if (to_disk) {
                const std::string fname = pj.pair + "_" + pr.source_name + "_" + pr.target_name +
                                          "_" + threshold_tag(pj.threshold) + ".json";
                write_file(fs::path(plan.output_dir) / "pairs" / fname,
                           report_to_json(pr.report,
                                          "clouds/" + pr.source_name + ".ply",
                                          "clouds/" + pr.target_name + ".ply"));
            }
            result.pairs[static_cast<std::size_t>(k)] = std::move(pr);
        } catch (const std::exception& e) {
            pair_errors[static_cast<std::size_t>(k)] = e.what();
        }
    }
    for (const std::string& err : pair_errors) {
        if (!err.empty()) throw std::runtime_error("experiment: registration failed: " + err);
    }

    // ---- aggregate rows in fixed order: pair tag blocks, thresholds ascending
    std::vector<std::string> pair_order;
    for (const PairResult& pr : result.pairs) {
        if (std::find(pair_order.begin(), pair_order.end(), pr.pair) == pair_order.end()) {
            pair_order.push_back(pr.pair);
        }
    }
    std::vector<double> sorted_thresholds = plan.thresholds;
    std::sort(sorted_thresholds.begin(), sorted_thresholds.end());
    for (const std::string& tag : pair_order) {
        for (double th : sorted_thresholds) {
            std::vector<double> fit, rmse, haus;
            for (const PairResult& pr : result.pairs) {
                if (pr.pair != tag || pr.report.threshold != th) continue;
                fit.push_back(pr.report.fitness);
                rmse.push_back(pr.report.inlier_rmse);
                haus.push_back(pr.report.hausdorff);
            }
            if (fit.empty()) continue;
            AggregateRow row;
            row.pair = tag;
            row.threshold = th;
            row.samples = static_cast<int>(fit.size());
            const MeanStd f = mean_std(fit), r = mean_std(rmse), h = mean_std(haus);
            row.fitness_mean = f.mean;
            row.fitness_std = f.std_dev;
            row.rmse_mean = r.mean;
            row.rmse_std = r.std_dev;
            row.hausdorff_mean = h.mean;
            row.hausdorff_std = h.std_dev;
            result.table.rows.push_back(row);
        }
    }

    if (to_disk) {
        write_file(fs::path(plan.output_dir) / "aggregate.csv", aggregate_to_csv(result.table));
        write_file(fs::path(plan.output_dir) / "aggregate.md",
                   aggregate_to_markdown(result.table));
    }
    return result;
}

void emit_traces(const SweepRecord& rec, const std::string& out_dir) {
    fs::create_directories(out_dir);

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
    write_file(fs::path(out_dir) / "trajectory.csv", traj);

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
    write_file(fs::path(out_dir) / "forces.csv", forces);

    // phantom displacement from its initial position (the raw disturbance)
    std::string dist = "t,dx,dy,dz\n";
    for (const auto& p : rec.pose_trace) {
        append_double(dist, p.t);
        dist += ',';
        append_double(dist, p.phantom.x - rec.phantom_init.x);
        dist += ',';
        append_double(dist, p.phantom.y - rec.phantom_init.y);
        dist += ',';
        append_double(dist, p.phantom.z - rec.phantom_init.z);
        dist += '\n';
    }
    write_file(fs::path(out_dir) / "disturbance.csv", dist);
}

std::string aggregate_to_csv(const AggregateTable& table) {
    std::string s =
        "pair,threshold_mm,samples,fitness_mean,fitness_std,rmse_mean_mm,rmse_std_mm,"
        "hausdorff_mean_mm,hausdorff_std_mm\n";
    for (const AggregateRow& r : table.rows) {
        s += r.pair;
        s += ',';
        append_double(s, r.threshold);
        s += ',';
        s += std::to_string(r.samples);
        s += ',';
        append_double(s, r.fitness_mean);
        s += ',';
        append_double(s, r.fitness_std);
        s += ',';
        append_double(s, r.rmse_mean);
        s += ',';
        append_double(s, r.rmse_std);
        s += ',';
        append_double(s, r.hausdorff_mean);
        s += ',';
        append_double(s, r.hausdorff_std);
        s += '\n';
    }
    return s;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string aggregate_to_markdown(const AggregateTable& table) {
    std::vector<std::string> pair_order;
    std::vector<double> thresholds;
    for (const AggregateRow& r : table.rows) {
        if (std::find(pair_order.begin(), pair_order.end(), r.pair) == pair_order.end()) {
            pair_order.push_back(r.pair);
        }
        if (std::find(thresholds.begin(), thresholds.end(), r.threshold) == thresholds.end()) {
            thresholds.push_back(r.threshold);
        }
    }
    std::sort(thresholds.begin(), thresholds.end());

    std::string md = "# Registration summary\n\n";
    md += "## Hausdorff distance [mm] (mean +- std over all pairwise registrations)\n\n";
    md += "| set pair |";
    for (double th : thresholds) md += " threshold " + format_double(th) + " mm |";
    md += "\n|---|";
    for (std::size_t i = 0; i < thresholds.size(); ++i) md += "---|";
    md += "\n";
    for (const std::string& pair : pair_order) {
        md += "| " + pair + " |";
        for (double th : thresholds) {
            const AggregateRow* r = table.find(pair, th);
            md += r ? " " + fmt3(r->hausdorff_mean) + " +- " + fmt3(r->hausdorff_std) + " |"
                    : " - |";
        }
        md += "\n";
    }

    md += "\n## ICP fitness and inlier RMSE per correspondence threshold\n";
    for (double th : thresholds) {
        md += "\n**Threshold " + format_double(th) + " mm**\n\n";
        md += "| set pair | fitness | RMSE [mm] | samples |\n|---|---|---|---|\n";
        for (const std::string& pair : pair_order) {
            const AggregateRow* r = table.find(pair, th);
            if (!r) continue;
            md += "| " + pair + " | " + fmt3(r->fitness_mean) + " +- " + fmt3(r->fitness_std) +
                  " | " + fmt3(r->rmse_mean) + " +- " + fmt3(r->rmse_std) + " | " +
                  std::to_string(r->samples) + " |\n";
        }
    }
    return md;
}

}  // namespace trus
