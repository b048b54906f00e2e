#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "trus/cloud_io.hpp"
#include "trus/rng.hpp"

using namespace trus;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "trus_io_test";
    fs::create_directories(dir);
    return dir;
}

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    GaussianRng rng(seed);
    PointCloud pc;
    for (std::size_t i = 0; i < n; ++i) {
        pc.points.push_back({100.0 * rng.gaussian(), rng.gaussian() / 3.0, 1e-7 * rng.gaussian()});
    }
    return pc;
}

bool identical(const PointCloud& a, const PointCloud& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.points[i].x != b.points[i].x || a.points[i].y != b.points[i].y ||
            a.points[i].z != b.points[i].z) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("PLY round trip is bit exact") {
    const PointCloud pc = random_cloud(500, 42);
    const std::string path = (temp_dir() / "roundtrip.ply").string();
    write_ply(pc, path);
    CHECK(identical(pc, read_ply(path)));
}

TEST_CASE("XYZ round trip is bit exact") {
    const PointCloud pc = random_cloud(500, 43);
    const std::string path = (temp_dir() / "roundtrip.xyz").string();
    write_xyz(pc, path);
    CHECK(identical(pc, read_xyz(path)));
}

TEST_CASE("PLY header carries the vertex count") {
    const PointCloud pc = random_cloud(37, 44);
    const std::string path = (temp_dir() / "count.ply").string();
    write_ply(pc, path);
    std::ifstream in(path);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
        if (line == "element vertex 37") found = true;
        if (line == "end_header") break;
    }
    CHECK(found);
}

TEST_CASE("XYZ line count equals point count") {
    const PointCloud pc = random_cloud(73, 45);
    const std::string path = (temp_dir() / "count.xyz").string();
    write_xyz(pc, path);
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 73);
}

TEST_CASE("errors carry the path") {
    const std::string missing = (temp_dir() / "missing.ply").string();
    try {
        read_ply(missing);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(missing) != std::string::npos);
    }
    CHECK_THROWS_AS(write_ply(PointCloud{}, (temp_dir() / "empty.ply").string()),
                    std::runtime_error);
}

TEST_CASE("read_cloud dispatches on extension") {
    const PointCloud pc = random_cloud(10, 46);
    const std::string ply = (temp_dir() / "d.ply").string();
    const std::string xyz = (temp_dir() / "d.xyz").string();
    write_cloud(pc, ply, CloudFormat::PLY);
    write_cloud(pc, xyz, CloudFormat::XYZ);
    CHECK(identical(read_cloud(ply), read_cloud(xyz)));
}

TEST_CASE("transform json array has 16 row-major numbers") {
    const RigidTransform t = RigidTransform::translation({1.0, 2.0, 3.0});
    const std::string s = transform_to_json_array(t);
    CHECK(s.front() == '[');
    CHECK(s.back() == ']');
    std::size_t commas = 0;
    for (char c : s) {
        if (c == ',') ++commas;
    }
    CHECK(commas == 15);
    // translation lands at row-major positions 3, 7, 11
    CHECK(s.find("1, 0, 0, 1,") != std::string::npos);  // row 0: 1 0 0 tx=1
}
