#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "trus/geometry.hpp"

namespace trus {

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
};

/// Exact nearest-neighbor kd-tree. Median split on the widest axis; ties in
/// distance resolve to the smallest original point index, matching the
/// brute-force reference bit for bit.
class KdTree {
  public:
    explicit KdTree(const PointCloud& cloud);

    std::size_t size() const { return pts_.size(); }
    Neighbor nearest(const Vec3& q) const;
    /// Nearest point no farther than max_dist (inclusive); false when none.
    bool nearest_within(const Vec3& q, double max_dist, Neighbor& out) const;

  private:
    struct Node {
        double split;
        std::int32_t axis;  // -1 for leaves
        std::uint32_t right;
        std::uint32_t begin;
        std::uint32_t end;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::uint32_t node_idx, const Vec3& q, double& best_d2, std::size_t& best_idx,
                bool& found) const;

    std::vector<Vec3> pts_;
    std::vector<std::uint32_t> idx_;
    std::vector<Node> nodes_;
};

/// Exact nearest target point for every query point. The kd-backed batch runs
/// query points in parallel; the serial and brute-force variants are the
/// reference implementations and must agree exactly.
std::vector<Neighbor> nearest_neighbors(const PointCloud& query, const PointCloud& target);
std::vector<Neighbor> nearest_neighbors(const PointCloud& query, const KdTree& target_tree);
std::vector<Neighbor> nearest_neighbors_serial(const PointCloud& query, const KdTree& target_tree);
std::vector<Neighbor> brute_force_nearest_neighbors(const PointCloud& query,
                                                    const PointCloud& target);

/// max over a of the distance to the closest point of b.
double hausdorff_directed(const PointCloud& a, const PointCloud& b);
double hausdorff_directed(const PointCloud& a, const KdTree& b_tree);
double hausdorff_symmetric(const PointCloud& a, const PointCloud& b);

struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares rigid transform mapping source onto target over paired
/// points (cross-covariance SVD, reflection corrected to det +1). Throws
/// DegenerateInputError for fewer than 3 pairs or collinear input.
RigidTransform best_fit_transform(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target);

struct IcpParams {
    double threshold = 0.8;  // mm, largest pairing distance
    int max_iterations = 12;
    double eps = 1e-6;
    double voxel = 0.0;  // mm, optional source/target downsampling; 0 = off
    bool symmetric_hausdorff = false;
};

struct RegistrationReport {
    double fitness = 0.0;      // inliers / source size
    double inlier_rmse = 0.0;  // mm over inlier pairs at the final transform
    double hausdorff = 0.0;    // mm, transformed source -> target
    RigidTransform transform;
    double threshold = 0.0;
    int iterations = 0;
    bool converged = false;
    std::size_t inliers = 0;
    std::size_t source_size = 0;
    std::size_t target_size = 0;
};

/// Point-to-point ICP from the identity initial guess. Correspondences pair
/// each source point with its nearest target point within threshold; stops
/// when both fitness and RMSE move less than eps between iterations.
RegistrationReport icp(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params);
RegistrationReport icp(const PointCloud& source, const PointCloud& target,
                       const KdTree& target_tree, const IcpParams& params);

/// Keeps the first point of every occupied voxel (deterministic order).
PointCloud voxel_downsample(const PointCloud& pc, double voxel);

std::string report_to_json(const RegistrationReport& rep, const std::string& source_name,
                           const std::string& target_name);

}  // namespace trus
