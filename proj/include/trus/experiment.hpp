#pragma once

#include <string>
#include <vector>

#include "trus/registration.hpp"
#include "trus/reconstruction.hpp"
#include "trus/sim_config.hpp"
#include "trus/sweep.hpp"

namespace trus {

struct ExperimentPlan {
    std::vector<Scenario> scenarios{Scenario::S, Scenario::H, Scenario::V, Scenario::C};
    int sweeps_per_scenario = 5;
    std::vector<double> thresholds{0.4, 0.6, 0.8, 1.0, 1.2};
    std::uint64_t base_seed = 1;
    std::string output_dir;  // empty keeps everything in memory
};

ExperimentPlan plan_from_config(const SimConfig& cfg);

struct PairResult {
    std::string pair;  // "S-S", "S-H", ...
    std::string source_name;
    std::string target_name;
    RegistrationReport report;
};

struct AggregateRow {
    std::string pair;
    double threshold = 0.0;
    int samples = 0;
    double fitness_mean = 0.0, fitness_std = 0.0;
    double rmse_mean = 0.0, rmse_std = 0.0;
    double hausdorff_mean = 0.0, hausdorff_std = 0.0;
};

struct AggregateTable {
    std::vector<AggregateRow> rows;

    const AggregateRow* find(const std::string& pair, double threshold) const;
};

struct SweepSummary {
    std::string name;  // e.g. "S_00"
    Scenario scenario;
    std::uint64_t seed = 0;
    double duration = 0.0;
    std::size_t slices = 0;
    std::size_t cloud_points = 0;
    std::size_t pause_events = 0;
};

struct ExperimentResult {
    AggregateTable table;
    std::vector<PairResult> pairs;
    std::vector<SweepSummary> sweeps;
    /// Clouds in job order (scenario blocks in plan order, index ascending).
    std::vector<PointCloud> clouds;
};

/// Full protocol: runs every sweep with seed base_seed + job index,
/// reconstructs, registers S-S over unique unordered pairs and S-X over the
/// full cross product (moving cloud as source, stationary as target), and
/// aggregates mean +- sample standard deviation per (set pair, threshold).
/// With an output_dir it also writes clouds/*.ply, pairs/*.json,
/// aggregate.csv, aggregate.md and traces/*.csv.
ExperimentResult run_experiment(const ExperimentPlan& plan, const SimConfig& cfg);

/// Plot-ready trace CSVs (trajectory.csv + forces.csv) for one record.
void emit_traces(const SweepRecord& rec, const std::string& out_dir);

std::string aggregate_to_csv(const AggregateTable& table);
std::string aggregate_to_markdown(const AggregateTable& table);

}  // namespace trus
