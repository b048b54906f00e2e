#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trus/experiment.hpp"

using namespace trus;
namespace fs = std::filesystem;

namespace {

// small, fast configuration for protocol-level tests
SimConfig tiny_config() {
    SimConfig cfg = default_config();
    cfg.contour_samples = 200;
    cfg.slice_interval = 0.02;
    cfg.image.resolution = 0.2;
    finalize(cfg);
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("two stationary sweeps produce exactly one S-S pair") {
    SimConfig cfg = tiny_config();
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S};
    plan.sweeps_per_scenario = 2;
    plan.thresholds = {0.8};
    plan.base_seed = 5;
    const ExperimentResult res = run_experiment(plan, cfg);
    CHECK(res.pairs.size() == 1);
    CHECK(res.pairs[0].pair == "S-S");
    CHECK(res.table.rows.size() == 1);
    CHECK(res.table.rows[0].samples == 1);
}

TEST_CASE("pairing rule: unique unordered S-S pairs, full S-X cross product") {
    SimConfig cfg = tiny_config();
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S, Scenario::H};
    plan.sweeps_per_scenario = 3;
    plan.thresholds = {0.8, 0.4};
    plan.base_seed = 9;
    const ExperimentResult res = run_experiment(plan, cfg);
    // per threshold: C(3,2)=3 S-S pairs and 3x3=9 S-H pairs
    std::size_t ss = 0, sh = 0;
    for (const auto& p : res.pairs) {
        if (p.pair == "S-S") ++ss;
        if (p.pair == "S-H") ++sh;
    }
    CHECK(ss == 6);
    CHECK(sh == 18);
    CHECK(res.sweeps.size() == 6);
    // seeds follow base_seed + job index in scenario-block order
    CHECK(res.sweeps[0].seed == 9);
    CHECK(res.sweeps[5].seed == 14);
}

TEST_CASE("aggregate matches an independent recomputation from the pair reports") {
    SimConfig cfg = tiny_config();
    const auto dir = fs::temp_directory_path() / "trus_experiment_test";
    fs::remove_all(dir);
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S, Scenario::V};
    plan.sweeps_per_scenario = 2;
    plan.thresholds = {0.8};
    plan.base_seed = 21;
    plan.output_dir = dir.string();
    const ExperimentResult res = run_experiment(plan, cfg);

    // recompute S-V mean/std from the JSON reports on disk
    std::vector<double> fits;
    for (const auto& entry : fs::directory_iterator(dir / "pairs")) {
        const auto j = nlohmann::json::parse(slurp(entry.path()));
        if (j.at("source").get<std::string>().find("V_") != std::string::npos) {
            fits.push_back(j.at("fitness").get<double>());
        }
    }
    REQUIRE(fits.size() == 4);
    double mean = 0.0;
    for (double f : fits) mean += f;
    mean /= static_cast<double>(fits.size());
    double var = 0.0;
    for (double f : fits) var += (f - mean) * (f - mean);
    const double stddev = std::sqrt(var / static_cast<double>(fits.size() - 1));

    const AggregateRow* row = res.table.find("S-V", 0.8);
    REQUIRE(row != nullptr);
    CHECK(row->samples == 4);
    CHECK(row->fitness_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(row->fitness_std == doctest::Approx(stddev).epsilon(1e-9));

    // output layout
    CHECK(fs::exists(dir / "clouds" / "S_00.ply"));
    CHECK(fs::exists(dir / "clouds" / "V_01.ply"));
    CHECK(fs::exists(dir / "aggregate.csv"));
    CHECK(fs::exists(dir / "aggregate.md"));
    CHECK(fs::exists(dir / "traces" / "S_00" / "trajectory.csv"));
    CHECK(fs::exists(dir / "traces" / "S_00" / "forces.csv"));
}

TEST_CASE("experiment runs are deterministic file for file") {
    SimConfig cfg = tiny_config();
    const auto dir_a = fs::temp_directory_path() / "trus_exp_det_a";
    const auto dir_b = fs::temp_directory_path() / "trus_exp_det_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S, Scenario::C};
    plan.sweeps_per_scenario = 2;
    plan.thresholds = {0.8};
    plan.base_seed = 33;
    plan.output_dir = dir_a.string();
    run_experiment(plan, cfg);
    plan.output_dir = dir_b.string();
    run_experiment(plan, cfg);

    CHECK(slurp(dir_a / "aggregate.csv") == slurp(dir_b / "aggregate.csv"));
    CHECK(slurp(dir_a / "aggregate.md") == slurp(dir_b / "aggregate.md"));
    CHECK(slurp(dir_a / "clouds" / "C_00.ply") == slurp(dir_b / "clouds" / "C_00.ply"));
    for (const auto& entry : fs::directory_iterator(dir_a / "pairs")) {
        CHECK(slurp(entry.path()) == slurp(dir_b / "pairs" / entry.path().filename()));
    }
}

TEST_CASE("a failing sweep aborts the experiment naming the seed") {
    SimConfig cfg = tiny_config();
    cfg.abort_force = 6.0;  // guarantees a force abort
    finalize(cfg);
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S};
    plan.sweeps_per_scenario = 2;
    plan.thresholds = {0.8};
    plan.base_seed = 77;
    try {
        run_experiment(plan, cfg);
        FAIL("expected the experiment to abort");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("seed 77") != std::string::npos);
    }
}

TEST_CASE("plans without enough stationary sweeps are rejected") {
    SimConfig cfg = tiny_config();
    ExperimentPlan plan;
    plan.scenarios = {Scenario::S};
    plan.sweeps_per_scenario = 1;
    CHECK_THROWS_AS(run_experiment(plan, cfg), std::invalid_argument);
    plan.scenarios = {Scenario::H};
    plan.sweeps_per_scenario = 3;
    CHECK_THROWS_AS(run_experiment(plan, cfg), std::invalid_argument);
    plan.scenarios = {Scenario::S};
    plan.thresholds = {0.0};
    CHECK_THROWS_AS(run_experiment(plan, cfg), std::invalid_argument);
}

TEST_CASE("emit_traces writes aligned CSV columns on the dt grid") {
    SimConfig cfg = tiny_config();
    const SweepRecord rec = run_tracking(Scenario::V, cfg, 5, 5.0);
    const auto dir = fs::temp_directory_path() / "trus_traces_test";
    fs::remove_all(dir);
    emit_traces(rec, dir.string());
    const std::string traj = slurp(dir / "trajectory.csv");
    const std::string forces = slurp(dir / "forces.csv");

    std::istringstream ts(traj);
    std::string line;
    std::getline(ts, line);
    CHECK(line == "t,probe_x,probe_y,probe_z,phantom_x,phantom_y,phantom_z,phi");
    std::size_t rows = 0;
    double prev_t = 0.0;
    while (std::getline(ts, line)) {
        if (line.empty()) continue;
        ++rows;
        const double t = std::stod(line.substr(0, line.find(',')));
        CHECK(t - prev_t == doctest::Approx(cfg.dt).epsilon(1e-9));
        prev_t = t;
    }
    CHECK(rows == rec.pose_trace.size());
    CHECK(rows == static_cast<std::size_t>(5.0 / cfg.dt + 0.5));

    std::istringstream fsr(forces);
    std::getline(fsr, line);
    CHECK(line == "t,f_meas_y,f_meas_z,f_true_y,f_true_z,cmd_y,cmd_z,paused");

    // the disturbance trace carries the phantom displacement from its start
    const std::string dist = slurp(dir / "disturbance.csv");
    std::istringstream ds(dist);
    std::getline(ds, line);
    CHECK(line == "t,dx,dy,dz");
    std::getline(ds, line);
    CHECK(line.substr(0, 5) == "0.01,");
}

TEST_CASE("config round trip: dump and reload preserve the experiment keys") {
    SimConfig cfg = default_config();
    cfg.sweeps_per_scenario = 7;
    cfg.thresholds = {0.5, 1.5};
    cfg.scenarios = {Scenario::S, Scenario::C};
    cfg.base_seed = 99;
    finalize(cfg);
    const auto path = fs::temp_directory_path() / "trus_cfg_test.cfg";
    std::ofstream out(path);
    for (const auto& [k, v] : dump_config(cfg)) out << k << " = " << v << "\n";
    out.close();
    const SimConfig back = load_config(path.string());
    CHECK(back.sweeps_per_scenario == 7);
    CHECK(back.thresholds == cfg.thresholds);
    CHECK(back.scenarios == cfg.scenarios);
    CHECK(back.base_seed == 99);
    CHECK(back.pid.kp == cfg.pid.kp);
    CHECK(back.phantom.semi_axes.z == cfg.phantom.semi_axes.z);

    CHECK_THROWS_AS(apply_key(cfg, "no.such.key", "1"), std::invalid_argument);
}
