#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "trus/phantom.hpp"
#include "trus/segmentation.hpp"

using namespace trus;

namespace {

SegOracleConfig clean_oracle() {
    SegOracleConfig cfg;
    cfg.jitter_sigma = 0.0;
    return cfg;
}

std::vector<Point2> rectangle(double u0, double v0, double u1, double v1) {
    return {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
}

std::vector<Point2> ellipse(double cu, double cv, double ru, double rv, int n = 256) {
    std::vector<Point2> out;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n;
        out.push_back({cu + ru * std::cos(th), cv + rv * std::sin(th)});
    }
    return out;
}

// independent quadrature oracle for the area centroid of the phi = 0
// cross-section of a tapered phantom, expressed in image u
double tapered_centroid_u_oracle(const PhantomModel& m, double u_center) {
    const double a = m.semi_axes.x;
    const int n = 20000;
    double area = 0.0, moment = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = -a + 2.0 * a * i / n;
        const double s = 1.0 + m.taper * (x / a);
        const double w = 2.0 * m.semi_axes.y * s * std::sqrt(std::max(1.0 - (x * x) / (a * a), 0.0));
        area += w;
        moment += x * w;
    }
    return u_center + moment / area;
}

}  // namespace

TEST_CASE("empty ground-truth contour classifies as background") {
    const SegmentationResult r = segment(clean_oracle(), {});
    CHECK(!r.present);
    CHECK(r.mask.empty());
    CHECK(r.contour.empty());
    CHECK(!r.centroid.has_value());
    CHECK(r.area_mm2 == 0.0);
}

TEST_CASE("centered rectangle: area and centroid") {
    const SegOracleConfig cfg = clean_oracle();
    const SegmentationResult r = segment(cfg, rectangle(20.0, 20.0, 40.0, 30.0), nullptr, true);
    REQUIRE(r.present);
    CHECK(std::abs(r.area_mm2 - 200.0) <= cfg.image.resolution * cfg.image.resolution * 60.0);
    REQUIRE(r.centroid.has_value());
    CHECK(r.centroid->u == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(r.centroid->v == doctest::Approx(25.0).epsilon(1e-9));
    CHECK(!r.mask.empty());
    // mask pixels agree with the span-derived area
    std::size_t lit = 0;
    for (auto b : r.mask.data) lit += b ? 1 : 0;
    CHECK(static_cast<double>(lit) * cfg.image.resolution * cfg.image.resolution ==
          doctest::Approx(r.area_mm2));
}

TEST_CASE("region below min_area classifies as background with empty outputs") {
    const SegOracleConfig cfg = clean_oracle();  // min_area 10 mm^2
    // ellipse of ~5 mm^2 (pi * 1.7 * 0.94)
    const SegmentationResult r = segment(cfg, ellipse(30.0, 25.0, 1.7, 0.94));
    CHECK(!r.present);
    CHECK(r.mask.empty());
    CHECK(r.contour.empty());
    CHECK(!r.centroid.has_value());
    // the same shape above the threshold is present
    const SegmentationResult big = segment(cfg, ellipse(30.0, 25.0, 3.0, 3.0));
    CHECK(big.present);
}

TEST_CASE("classification and segmentation stay consistent") {
    const SegOracleConfig cfg = clean_oracle();
    for (double r : {0.5, 1.0, 1.6, 1.8, 2.0, 5.0}) {
        const SegmentationResult seg = segment(cfg, ellipse(30.0, 25.0, r, r), nullptr, true);
        CHECK(seg.present == !seg.mask.empty());
        CHECK(seg.present == !seg.contour.empty());
        CHECK(seg.present == seg.centroid.has_value());
    }
}

TEST_CASE("segment is deterministic for fixed inputs") {
    const SegOracleConfig cfg = clean_oracle();
    const auto poly = ellipse(31.3, 22.7, 8.0, 5.0);
    const SegmentationResult a = segment(cfg, poly);
    const SegmentationResult b = segment(cfg, poly);
    CHECK(a.area_mm2 == b.area_mm2);
    CHECK(a.centroid->u == b.centroid->u);
    CHECK(a.centroid->v == b.centroid->v);
}

TEST_CASE("rasterized centroid converges to the analytic centroid") {
    // deliberately off-grid ellipse; the analytic centroid is its center
    const auto poly = ellipse(31.234, 22.777, 8.0, 5.0, 1024);
    auto centroid_err = [&](double res) {
        SegOracleConfig cfg = clean_oracle();
        cfg.image.resolution = res;
        const SegmentationResult r = segment(cfg, poly);
        REQUIRE(r.present);
        return std::hypot(r.centroid->u - 31.234, r.centroid->v - 22.777);
    };
    const double e02 = centroid_err(0.2);
    const double e01 = centroid_err(0.1);
    CHECK(e02 < 0.05);
    CHECK(e01 < 0.02);
    CHECK(e01 <= 0.75 * e02 + 1e-3);
}

TEST_CASE("visual_offset: symmetric mask reads zero, shifted rectangle +5 mm") {
    const SegOracleConfig cfg = clean_oracle();
    const SegmentationResult centered = segment(cfg, rectangle(20.0, 20.0, 40.0, 30.0));
    CHECK(visual_offset(centered, cfg.image) == doctest::Approx(0.0).epsilon(1e-9));

    const SegmentationResult shifted = segment(cfg, rectangle(25.0, 20.0, 45.0, 30.0));
    CHECK(visual_offset(shifted, cfg.image) == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("visual_offset requires a prostate in view") {
    const SegmentationResult none = segment(clean_oracle(), {});
    CHECK_THROWS_WITH_AS(visual_offset(none, ImageSpec{}), "visual_offset: no prostate in view",
                         std::runtime_error);
}

TEST_CASE("tapered phantom shifts the visual offset per the analytic centroid") {
    PhantomModel m;
    m.taper = 0.3;
    m.pose = RigidTransform::identity();
    const RigidTransform probe = RigidTransform::translation({-30.0, 26.0, 0.0});
    const SegOracleConfig cfg = clean_oracle();
    const auto contour = slice_contour(m, probe, 0.0, 9.0, cfg.image, 1024);
    const SegmentationResult seg = segment(cfg, contour);
    REQUIRE(seg.present);
    const double offset = visual_offset(seg, cfg.image);
    CHECK(std::abs(offset) > 0.2);
    const double expected_u = tapered_centroid_u_oracle(m, 30.0);
    CHECK(std::abs(offset - (expected_u - 30.0)) <= 0.2);
}

TEST_CASE("contour jitter perturbs the contour deterministically per seed") {
    SegOracleConfig cfg = clean_oracle();
    cfg.jitter_sigma = 0.2;
    const auto poly = ellipse(30.0, 25.0, 8.0, 6.0);
    GaussianRng rng1(7), rng2(7), rng3(8);
    const SegmentationResult a = segment(cfg, poly, &rng1);
    const SegmentationResult b = segment(cfg, poly, &rng2);
    const SegmentationResult c = segment(cfg, poly, &rng3);
    REQUIRE(a.present);
    CHECK(a.contour[0].u == b.contour[0].u);
    CHECK(a.contour[0].u != c.contour[0].u);
    CHECK(a.contour[0].u != poly[0].u);
}

TEST_CASE("pgm export writes a readable header") {
    const SegmentationResult r =
        segment(clean_oracle(), rectangle(20.0, 20.0, 40.0, 30.0), nullptr, true);
    const auto path = std::filesystem::temp_directory_path() / "trus_mask.pgm";
    write_pgm(r.mask, path.string());
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    int nu = 0, nv = 0;
    in >> magic >> nu >> nv;
    CHECK(magic == "P5");
    CHECK(nu == 600);
    CHECK(nv == 500);
}
