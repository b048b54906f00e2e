#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "trus/reconstruction.hpp"

using namespace trus;

namespace {

SweepRecord::Slice make_slice(double phi, std::vector<Point2> contour) {
    SweepRecord::Slice s;
    s.t = 0.0;
    s.phi = phi;
    s.seg.present = true;
    s.seg.contour = std::move(contour);
    return s;
}

// ideal sweep of the untapered default phantom: no noise, no jitter
SimConfig ideal_config() {
    SimConfig cfg = default_config();
    cfg.phantom.taper = 0.0;
    cfg.seg.jitter_sigma = 0.0;
    cfg.force_noise_sigma = 0.0;
    cfg.contour_samples = 600;
    cfg.slice_interval = 0.01;
    finalize(cfg);
    return cfg;
}

}  // namespace

TEST_CASE("slice at phi=0 reconstructs as the contour translated by (0, r, 0)") {
    SweepRecord rec;
    rec.slices.push_back(make_slice(0.0, {{10.0, 5.0}, {12.0, 7.0}, {30.0, 20.0}}));
    rec.slices.push_back(make_slice(0.005, {{1.0, 1.0}}));
    const PointCloud pc = reconstruct(rec, 9.0);
    REQUIRE(pc.size() == 4);
    CHECK(pc.points[0].x == doctest::Approx(10.0));
    CHECK(pc.points[0].y == doctest::Approx(14.0));
    CHECK(pc.points[0].z == doctest::Approx(0.0));
    CHECK(pc.points[2].x == doctest::Approx(30.0));
    CHECK(pc.points[2].y == doctest::Approx(29.0));
}

TEST_CASE("reconstruction rejects records with fewer than two usable slices") {
    SweepRecord rec;
    rec.slices.push_back(make_slice(0.0, {{1.0, 1.0}}));
    CHECK_THROWS_AS(reconstruct(rec, 9.0), std::invalid_argument);
    SweepRecord::Slice absent;
    absent.phi = 0.1;
    rec.slices.push_back(absent);  // present = false does not count
    CHECK_THROWS_AS(reconstruct(rec, 9.0), std::invalid_argument);
}

TEST_CASE("absent slices are skipped, order is slice-major then contour order") {
    SweepRecord rec;
    rec.slices.push_back(make_slice(0.1, {{1.0, 1.0}, {2.0, 2.0}}));
    SweepRecord::Slice absent;
    absent.phi = 0.05;
    rec.slices.push_back(absent);
    rec.slices.push_back(make_slice(0.0, {{3.0, 3.0}}));
    const PointCloud pc = reconstruct(rec, 9.0);
    REQUIRE(pc.size() == 3);
    CHECK(pc.points[0].x == doctest::Approx(1.0));
    CHECK(pc.points[1].x == doctest::Approx(2.0));
    CHECK(pc.points[2].x == doctest::Approx(3.0));
}

TEST_CASE("ideal sweep: surface residual, radial floor, bounding box") {
    const SimConfig cfg = ideal_config();
    const SweepRecord rec = run_sweep(Scenario::S, cfg, 3);
    const PointCloud pc = reconstruct(rec, cfg.probe_radius);
    REQUIRE(pc.size() > 10000);

    // map visualization-frame points into the phantom frame: the probe is
    // static for the whole S sweep, phantom fixed at the origin
    const Vec3 probe = rec.probe_init;
    PhantomModel model = cfg.phantom;
    model.pose = RigidTransform::identity();
    double worst_mm = 0.0;
    Bounds bb{};
    bb.lo = bb.hi = Vec3{probe.x + pc.points[0].x, probe.y - pc.points[0].y,
                         probe.z - pc.points[0].z};
    for (const Vec3& p : pc.points) {
        CHECK(std::sqrt(p.y * p.y + p.z * p.z) >= cfg.probe_radius - 1e-9);
        const Vec3 world{probe.x + p.x, probe.y - p.y, probe.z - p.z};
        const double f = implicit_value(model, world);
        const double grad = implicit_gradient(model, world).norm();
        worst_mm = std::max(worst_mm, std::abs(f - 1.0) / std::max(grad, 1e-12));
        bb.lo.x = std::min(bb.lo.x, world.x);
        bb.lo.y = std::min(bb.lo.y, world.y);
        bb.lo.z = std::min(bb.lo.z, world.z);
        bb.hi.x = std::max(bb.hi.x, world.x);
        bb.hi.y = std::max(bb.hi.y, world.y);
        bb.hi.z = std::max(bb.hi.z, world.z);
    }
    CHECK(worst_mm <= 0.05);
    // the cloud bounding box matches the analytic ellipsoid box within 0.5 mm
    CHECK(std::abs(bb.lo.x - (-cfg.phantom.semi_axes.x)) <= 0.5);
    CHECK(std::abs(bb.hi.x - (+cfg.phantom.semi_axes.x)) <= 0.5);
    CHECK(std::abs(bb.lo.y - (-cfg.phantom.semi_axes.y)) <= 0.5);
    CHECK(std::abs(bb.hi.y - (+cfg.phantom.semi_axes.y)) <= 0.5);
    CHECK(std::abs(bb.lo.z - (-cfg.phantom.semi_axes.z)) <= 0.5);
    CHECK(std::abs(bb.hi.z - (+cfg.phantom.semi_axes.z)) <= 0.5);
}

TEST_CASE("reconstruction is pure and the parallel path matches serial bit for bit") {
    SimConfig cfg = ideal_config();
    cfg.seg.jitter_sigma = 0.3;
    finalize(cfg);
    const SweepRecord rec = run_sweep(Scenario::S, cfg, 9);
    const PointCloud a = reconstruct(rec, cfg.probe_radius);
    const PointCloud b = reconstruct(rec, cfg.probe_radius);
    const PointCloud c = reconstruct_serial(rec, cfg.probe_radius);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i].x == b.points[i].x);
        CHECK(a.points[i].x == c.points[i].x);
        CHECK(a.points[i].y == c.points[i].y);
        CHECK(a.points[i].z == c.points[i].z);
    }
}

TEST_CASE("export: PLY and XYZ round trip through the documented formats") {
    SweepRecord rec;
    rec.slices.push_back(make_slice(0.0, {{10.0, 5.0}, {12.0, 7.0}}));
    rec.slices.push_back(make_slice(0.01, {{11.0, 6.0}}));
    const PointCloud pc = reconstruct(rec, 9.0);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string ply = (dir / "trus_recon.ply").string();
    const std::string xyz = (dir / "trus_recon.xyz").string();
    export_cloud(pc, ply, CloudFormat::PLY);
    export_cloud(pc, xyz, CloudFormat::XYZ);
    const PointCloud from_ply = read_ply(ply);
    const PointCloud from_xyz = read_xyz(xyz);
    REQUIRE(from_ply.size() == pc.size());
    REQUIRE(from_xyz.size() == pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) {
        CHECK(from_ply.points[i].y == pc.points[i].y);
        CHECK(from_xyz.points[i].y == pc.points[i].y);
    }
    CHECK_THROWS_AS(export_cloud(PointCloud{}, ply, CloudFormat::PLY), std::invalid_argument);
}
