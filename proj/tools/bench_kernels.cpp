// Benchmark of the data-parallel kernels against their serial reference
// implementations: brute-force vs kd-tree nearest neighbors (serial and
// OpenMP), reconstruction stacking, and one end-to-end ICP run. Every
// parallel result is checked against the serial path before timing is
// reported.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "trus/geometry.hpp"
#include "trus/reconstruction.hpp"
#include "trus/registration.hpp"
#include "trus/rng.hpp"
#include "trus/sweep.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

trus::PointCloud ellipsoid_cloud(std::size_t n, std::uint64_t seed) {
    trus::GaussianRng rng(seed);
    trus::PointCloud pc;
    pc.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        trus::Vec3 p{rng.gaussian(), rng.gaussian(), rng.gaussian()};
        const double r = p.norm();
        if (r < 1e-9) {
            p = {1.0, 0.0, 0.0};
        } else {
            p = p * (1.0 / r);
        }
        pc.points.push_back({22.0 * p.x + 30.0, 16.0 * p.y + 26.0, 23.0 * p.z});
    }
    return pc;
}

bool neighbors_equal(const std::vector<trus::Neighbor>& a, const std::vector<trus::Neighbor>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].index != b[i].index || a[i].distance != b[i].distance) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 200000;
    std::size_t brute_n = 4000;
    if (argc > 1) n = static_cast<std::size_t>(std::strtoull(argv[1], nullptr, 10));
    if (argc > 2) brute_n = static_cast<std::size_t>(std::strtoull(argv[2], nullptr, 10));

    std::printf("== nearest neighbor kernels ==\n");
    {
        const trus::PointCloud query = ellipsoid_cloud(brute_n, 11);
        const trus::PointCloud target = ellipsoid_cloud(brute_n, 12);
        auto t0 = Clock::now();
        const auto brute = trus::brute_force_nearest_neighbors(query, target);
        const double t_brute = seconds_since(t0);
        const trus::KdTree small_tree(target);
        const auto kd = trus::nearest_neighbors_serial(query, small_tree);
        if (!neighbors_equal(brute, kd)) {
            std::fprintf(stderr, "FAIL: kd-tree disagrees with brute force\n");
            return 1;
        }
        std::printf("brute force (serial reference)  n=%zu  %.3f s\n", brute_n, t_brute);
    }
    {
        const trus::PointCloud query = ellipsoid_cloud(n, 21);
        const trus::PointCloud target = ellipsoid_cloud(n, 22);
        auto t0 = Clock::now();
        const trus::KdTree tree(target);
        const double t_build = seconds_since(t0);

        t0 = Clock::now();
        const auto serial = trus::nearest_neighbors_serial(query, tree);
        const double t_serial = seconds_since(t0);

        t0 = Clock::now();
        const auto parallel = trus::nearest_neighbors(query, tree);
        const double t_parallel = seconds_since(t0);

        if (!neighbors_equal(serial, parallel)) {
            std::fprintf(stderr, "FAIL: parallel batch disagrees with serial batch\n");
            return 1;
        }
        std::printf("kd build                        n=%zu  %.3f s\n", n, t_build);
        std::printf("kd batch query serial           n=%zu  %.3f s\n", n, t_serial);
        std::printf("kd batch query OpenMP           n=%zu  %.3f s  (x%.2f)\n", n, t_parallel,
                    t_serial / t_parallel);
    }

    std::printf("== reconstruction kernel ==\n");
    {
        trus::SweepRecord rec;
        const std::size_t n_slices = 320, per_slice = std::max<std::size_t>(n / 320, 100);
        trus::GaussianRng rng(31);
        for (std::size_t i = 0; i < n_slices; ++i) {
            trus::SweepRecord::Slice s;
            s.t = 0.05 * static_cast<double>(i);
            s.phi = 0.8 - 0.005 * static_cast<double>(i);
            s.seg.present = true;
            for (std::size_t j = 0; j < per_slice; ++j) {
                s.seg.contour.push_back({30.0 + 10.0 * rng.gaussian(), 20.0 + 5.0 * rng.gaussian()});
            }
            rec.slices.push_back(std::move(s));
        }
        auto t0 = Clock::now();
        const auto serial = trus::reconstruct_serial(rec, 9.0);
        const double t_serial = seconds_since(t0);
        t0 = Clock::now();
        const auto parallel = trus::reconstruct(rec, 9.0);
        const double t_parallel = seconds_since(t0);
        bool same = serial.size() == parallel.size();
        for (std::size_t i = 0; same && i < serial.size(); ++i) {
            const trus::Vec3 d = serial.points[i] - parallel.points[i];
            same = d.x == 0.0 && d.y == 0.0 && d.z == 0.0;
        }
        if (!same) {
            std::fprintf(stderr, "FAIL: parallel reconstruction differs from serial\n");
            return 1;
        }
        std::printf("reconstruct serial              n=%zu  %.3f s\n", serial.size(), t_serial);
        std::printf("reconstruct OpenMP              n=%zu  %.3f s  (x%.2f)\n", parallel.size(),
                    t_parallel, t_serial / t_parallel);
    }

    std::printf("== icp ==\n");
    {
        const trus::PointCloud target = ellipsoid_cloud(n, 41);
        trus::PointCloud source = ellipsoid_cloud(n, 42);
        for (trus::Vec3& p : source.points) p += {0.3, -0.2, 0.1};
        trus::IcpParams params;
        params.threshold = 0.8;
        auto t0 = Clock::now();
        const auto rep = trus::icp(source, target, params);
        std::printf("icp n=%zu thr=0.8mm             %.3f s  fitness %.4f rmse %.4f mm iters %d\n",
                    n, seconds_since(t0), rep.fitness, rep.inlier_rmse, rep.iterations);
    }
    return 0;
}
