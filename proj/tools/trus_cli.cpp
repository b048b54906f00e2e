// Command-line front end for the rotational TRUS sweep simulator: single
// sweeps, reconstruction, ICP registration, the full multi-scenario
// experiment protocol, and plot-ready trace export.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trus/experiment.hpp"
#include "trus/reconstruction.hpp"
#include "trus/registration.hpp"
#include "trus/sim_config.hpp"
#include "trus/sweep.hpp"

namespace {

namespace fs = std::filesystem;

trus::SimConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return trus::default_config();
    return trus::load_config(config_path);
}

void print_report(const trus::RegistrationReport& rep) {
    std::printf("fitness      %.6f\n", rep.fitness);
    std::printf("inlier RMSE  %.6f mm\n", rep.inlier_rmse);
    std::printf("hausdorff    %.6f mm\n", rep.hausdorff);
    std::printf("inliers      %zu / %zu source points\n", rep.inliers, rep.source_size);
    std::printf("iterations   %d (%s)\n", rep.iterations,
                rep.converged ? "converged" : "not converged");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotational TRUS sweep simulator and registration toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);

    // ---- sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run one sweep and save the record");
    std::string sweep_scenario = "S";
    std::uint64_t sweep_seed = 1;
    std::string sweep_out = "sweep_out";
    sweep_cmd->add_option("--scenario", sweep_scenario, "S, H, V or C");
    sweep_cmd->add_option("--seed", sweep_seed, "simulation seed");
    sweep_cmd->add_option("--out", sweep_out, "output directory");

    // ---- reconstruct
    auto* rec_cmd = app.add_subcommand("reconstruct", "build a point cloud from a saved record");
    std::string rec_record;
    std::string rec_out = "cloud.ply";
    std::string rec_format = "ply";
    rec_cmd->add_option("--record", rec_record, "sweep record directory")->required();
    rec_cmd->add_option("--out", rec_out, "output cloud path");
    rec_cmd->add_option("--format", rec_format, "ply or xyz")->check(CLI::IsMember({"ply", "xyz"}));

    // ---- register
    auto* reg_cmd = app.add_subcommand("register", "ICP-align two point clouds");
    std::string reg_source, reg_target, reg_out;
    double reg_threshold = 0.8;
    reg_cmd->add_option("source", reg_source, "source cloud (.ply or xyz)")->required();
    reg_cmd->add_option("target", reg_target, "target cloud (.ply or xyz)")->required();
    reg_cmd->add_option("--threshold", reg_threshold, "correspondence threshold in mm");
    reg_cmd->add_option("--out", reg_out, "write the JSON report here");

    // ---- experiment
    auto* exp_cmd = app.add_subcommand("experiment", "full multi-scenario validation protocol");
    std::string exp_out = "experiment_out";
    std::uint64_t exp_seed = 0;
    bool exp_seed_set = false;
    int exp_sweeps = 0;
    exp_cmd->add_option("--out", exp_out, "output directory");
    exp_cmd->add_option("--seed", exp_seed, "override experiment.base_seed")
        ->each([&](const std::string&) { exp_seed_set = true; });
    exp_cmd->add_option("--sweeps", exp_sweeps, "override experiment.sweeps_per_scenario");

    // ---- traces
    auto* tr_cmd = app.add_subcommand("traces", "run one sweep and export motion/force traces");
    std::string tr_scenario = "V";
    std::uint64_t tr_seed = 1;
    std::string tr_out = "traces_out";
    tr_cmd->add_option("--scenario", tr_scenario, "S, H, V or C");
    tr_cmd->add_option("--seed", tr_seed, "simulation seed");
    tr_cmd->add_option("--out", tr_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        const trus::SimConfig cfg = load_or_default(config_path);

        if (sweep_cmd->parsed()) {
            const auto scenario = trus::scenario_from_string(sweep_scenario);
            const trus::SweepRecord rec = trus::run_sweep(scenario, cfg, sweep_seed);
            trus::save_record(rec, cfg, sweep_out);
            std::printf("sweep %s seed %llu: %zu slices (%zu with prostate), %.2f s, %zu pauses\n",
                        trus::to_string(scenario).c_str(),
                        static_cast<unsigned long long>(sweep_seed), rec.slices.size(),
                        rec.present_slices(), rec.duration, rec.pause_events.size());
            std::printf("record written to %s\n", sweep_out.c_str());
        } else if (rec_cmd->parsed()) {
            const trus::SweepRecord rec = trus::load_record(rec_record);
            const trus::PointCloud cloud = trus::reconstruct(rec, cfg.probe_radius);
            trus::export_cloud(cloud, rec_out,
                               rec_format == "ply" ? trus::CloudFormat::PLY : trus::CloudFormat::XYZ);
            std::printf("reconstructed %zu points -> %s\n", cloud.size(), rec_out.c_str());
        } else if (reg_cmd->parsed()) {
            const trus::PointCloud source = trus::read_cloud(reg_source);
            const trus::PointCloud target = trus::read_cloud(reg_target);
            trus::IcpParams params;
            params.threshold = reg_threshold;
            params.max_iterations = cfg.icp_max_iterations;
            params.eps = cfg.icp_eps;
            params.voxel = cfg.icp_voxel;
            params.symmetric_hausdorff = cfg.icp_symmetric_hausdorff;
            const trus::RegistrationReport rep = trus::icp(source, target, params);
            print_report(rep);
            if (!reg_out.empty()) {
                std::ofstream out(reg_out);
                if (!out) throw std::runtime_error(reg_out + ": cannot open for writing");
                out << trus::report_to_json(rep, reg_source, reg_target);
            }
        } else if (exp_cmd->parsed()) {
            trus::SimConfig ecfg = cfg;
            if (exp_seed_set) ecfg.base_seed = exp_seed;
            if (exp_sweeps > 0) ecfg.sweeps_per_scenario = exp_sweeps;
            trus::ExperimentPlan plan = trus::plan_from_config(ecfg);
            plan.output_dir = exp_out;
            const trus::ExperimentResult res = trus::run_experiment(plan, ecfg);
            std::printf("%s", trus::aggregate_to_csv(res.table).c_str());
            std::printf("experiment outputs written to %s\n", exp_out.c_str());
        } else if (tr_cmd->parsed()) {
            const auto scenario = trus::scenario_from_string(tr_scenario);
            const trus::SweepRecord rec = trus::run_sweep(scenario, cfg, tr_seed);
            trus::emit_traces(rec, tr_out);
            std::printf("traces for scenario %s written to %s\n",
                        trus::to_string(scenario).c_str(), tr_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
