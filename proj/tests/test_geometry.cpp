#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "trus/geometry.hpp"
#include "trus/rng.hpp"

using namespace trus;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 map_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

RigidTransform random_rigid(GaussianRng& rng) {
    const Vec3 axis{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double angle = 3.0 * rng.uniform();
    RigidTransform t = RigidTransform::axis_angle(axis, angle);
    t.at(0, 3) = 10.0 * rng.gaussian();
    t.at(1, 3) = 10.0 * rng.gaussian();
    t.at(2, 3) = 10.0 * rng.gaussian();
    return t;
}

double max_abs_diff(const RigidTransform& a, const RigidTransform& b) {
    double m = 0.0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(a.at(r, c) - b.at(r, c)));
    }
    return m;
}

}  // namespace

TEST_CASE("slice_transform matches the hand-evaluated matrix") {
    // phi=0, r=9: identity rotation, translation (0, 9, 0)
    const Vec3 a = map_point(slice_transform(0.0, 9.0), {10.0, 5.0, 0.0});
    CHECK(a.x == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(a.y == doctest::Approx(14.0).epsilon(1e-12));
    CHECK(a.z == doctest::Approx(0.0).epsilon(1e-12));

    // phi=pi/2, r=9: y' = (v+r)cos = 0, z' = (v+r)sin = 14
    const Vec3 b = map_point(slice_transform(kPi / 2.0, 9.0), {10.0, 5.0, 0.0});
    CHECK(b.x == doctest::Approx(10.0));
    CHECK(std::abs(b.y) < 1e-12);
    CHECK(b.z == doctest::Approx(14.0));

    // phi=pi, r=0: pure 180 degree rotation about x
    const Vec3 c = map_point(slice_transform(kPi, 0.0), {1.0, 2.0, 0.0});
    CHECK(c.x == doctest::Approx(1.0));
    CHECK(c.y == doctest::Approx(-2.0));
    CHECK(std::abs(c.z) < 1e-12);
}

TEST_CASE("slice_transform(0, r) is exact") {
    const RigidTransform t = slice_transform(0.0, 7.5);
    CHECK(t.at(0, 0) == 1.0);
    CHECK(t.at(1, 1) == 1.0);
    CHECK(t.at(2, 2) == 1.0);
    CHECK(t.at(0, 3) == 0.0);
    CHECK(t.at(1, 3) == 7.5);
    CHECK(t.at(2, 3) == 0.0);
    CHECK(t.valid());
}

TEST_CASE("slice_transform rejects bad input") {
    CHECK_THROWS_AS(slice_transform(std::nan(""), 9.0), std::invalid_argument);
    CHECK_THROWS_AS(slice_transform(0.1, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(slice_transform(std::numeric_limits<double>::infinity(), 9.0),
                    std::invalid_argument);
}

TEST_CASE("radial distance preservation: sqrt(y'^2+z'^2) == v + r") {
    GaussianRng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double phi = 8.0 * (rng.uniform() - 0.5);
        const double r = 9.0;
        const double u = 60.0 * rng.uniform();
        const double v = 50.0 * rng.uniform();
        const Vec3 p = map_point(slice_transform(phi, r), {u, v, 0.0});
        CHECK(p.x == doctest::Approx(u).epsilon(1e-12));
        CHECK(std::sqrt(p.y * p.y + p.z * p.z) == doctest::Approx(v + r).epsilon(1e-9));
    }
}

TEST_CASE("apply_transform: identity, translation and slice oracle") {
    PointCloud pc;
    pc.points = {{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}};
    const PointCloud same = apply_transform(RigidTransform::identity(), pc);
    CHECK(same.points[0].x == 0.0);
    CHECK(same.points[1].z == 3.0);

    const PointCloud moved =
        apply_transform(RigidTransform::translation({1.0, 0.0, 0.0}), PointCloud{{{0.0, 0.0, 0.0}}});
    CHECK(moved.points[0].x == doctest::Approx(1.0));
    CHECK(moved.points[0].y == doctest::Approx(0.0));

    const PointCloud slice =
        apply_transform(slice_transform(kPi / 2.0, 9.0), PointCloud{{{10.0, 5.0, 0.0}}});
    CHECK(slice.points[0].x == doctest::Approx(10.0));
    CHECK(std::abs(slice.points[0].y) < 1e-12);
    CHECK(slice.points[0].z == doctest::Approx(14.0));
}

TEST_CASE("parallel apply_transform matches serial bit for bit") {
    GaussianRng rng(3);
    PointCloud pc;
    for (int i = 0; i < 20000; ++i) {
        pc.points.push_back({50.0 * rng.gaussian(), 50.0 * rng.gaussian(), 50.0 * rng.gaussian()});
    }
    const RigidTransform t = random_rigid(rng);
    const PointCloud a = apply_transform(t, pc);
    const PointCloud b = apply_transform_serial(t, pc);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i].x == b.points[i].x);
        CHECK(a.points[i].y == b.points[i].y);
        CHECK(a.points[i].z == b.points[i].z);
    }
}

TEST_CASE("compose and invert") {
    const RigidTransform t = slice_transform(0.3, 9.0);
    CHECK(max_abs_diff(compose(RigidTransform::identity(), t), t) == 0.0);

    const RigidTransform inv_tr = invert(RigidTransform::translation({1.0, 2.0, 3.0}));
    CHECK(inv_tr.at(0, 3) == doctest::Approx(-1.0));
    CHECK(inv_tr.at(1, 3) == doctest::Approx(-2.0));
    CHECK(inv_tr.at(2, 3) == doctest::Approx(-3.0));

    CHECK(max_abs_diff(compose(invert(t), t), RigidTransform::identity()) < 1e-9);
}

TEST_CASE("compose applies the right-hand transform first") {
    const RigidTransform rot = RigidTransform::axis_angle({0.0, 0.0, 1.0}, kPi / 2.0);
    const RigidTransform tr = RigidTransform::translation({1.0, 0.0, 0.0});
    // rot after tr: (0,0,0) -> (1,0,0) -> (0,1,0)
    const Vec3 p = compose(rot, tr).apply({0.0, 0.0, 0.0});
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(1.0));
}

TEST_CASE("group axioms hold on random rigid transforms") {
    GaussianRng rng(11);
    for (int i = 0; i < 100; ++i) {
        const RigidTransform a = random_rigid(rng);
        const RigidTransform b = random_rigid(rng);
        const RigidTransform c = random_rigid(rng);
        CHECK(a.valid(1e-9));
        CHECK(max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
        CHECK(max_abs_diff(compose(a, invert(a)), RigidTransform::identity()) < 1e-9);
        CHECK(max_abs_diff(compose(invert(a), a), RigidTransform::identity()) < 1e-9);
    }
}

TEST_CASE("validity detects corrupted transforms") {
    RigidTransform t;
    CHECK(t.valid());
    t.at(3, 0) = 1e-15;
    CHECK(!t.valid());

    RigidTransform scaled;
    scaled.at(0, 0) = 1.1;
    CHECK(!scaled.valid());
}

TEST_CASE("bounds of a cloud") {
    PointCloud pc;
    pc.points = {{1.0, -2.0, 5.0}, {-3.0, 7.0, 0.0}, {2.0, 0.0, -1.0}};
    const Bounds b = bounds(pc);
    CHECK(b.lo.x == -3.0);
    CHECK(b.lo.y == -2.0);
    CHECK(b.lo.z == -1.0);
    CHECK(b.hi.x == 2.0);
    CHECK(b.hi.y == 7.0);
    CHECK(b.hi.z == 5.0);
}
