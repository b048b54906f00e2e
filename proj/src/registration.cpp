#include "trus/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <Eigen/Dense>

#include <json.hpp>

#include "trus/num_format.hpp"

namespace trus {

namespace {

constexpr std::uint32_t kLeafSize = 16;

double axis_of(const Vec3& p, int axis) {
    switch (axis) {
        case 0: return p.x;
        case 1: return p.y;
        default: return p.z;
    }
}

}  // namespace

namespace {

struct KdEntry {
    Vec3 p;
    std::uint32_t idx;
};

// build-time scratch shared through a pointer to avoid a per-node allocation
thread_local std::vector<KdEntry>* g_kd_entries = nullptr;

}  // namespace

KdTree::KdTree(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("KdTree: empty cloud");
    std::vector<KdEntry> entries(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        entries[i] = {cloud.points[i], static_cast<std::uint32_t>(i)};
    }
    nodes_.reserve(2 * cloud.size() / kLeafSize + 2);
    g_kd_entries = &entries;
    build(0, static_cast<std::uint32_t>(entries.size()));
    g_kd_entries = nullptr;
    pts_.resize(entries.size());
    idx_.resize(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        pts_[i] = entries[i].p;
        idx_[i] = entries[i].idx;
    }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    std::vector<KdEntry>& entries = *g_kd_entries;
    const std::uint32_t me = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({0.0, -1, 0, begin, end});
    if (end - begin <= kLeafSize) return me;

    Vec3 lo = entries[begin].p, hi = entries[begin].p;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        const Vec3& p = entries[i].p;
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
        hi.z = std::max(hi.z, p.z);
    }
    const Vec3 extent = hi - lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > axis_of(extent, axis)) axis = 2;
    if (axis_of(extent, axis) == 0.0) return me;  // all points identical: keep as leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(entries.begin() + begin, entries.begin() + mid, entries.begin() + end,
                     [axis](const KdEntry& a, const KdEntry& b) {
                         const double ca = axis_of(a.p, axis), cb = axis_of(b.p, axis);
                         if (ca != cb) return ca < cb;
                         return a.idx < b.idx;
                     });
    nodes_[me].axis = axis;
    nodes_[me].split = axis_of(entries[mid].p, axis);
    build(begin, mid);
    nodes_[me].right = build(mid, end);
    return me;
}

void KdTree::search(std::uint32_t node_idx, const Vec3& q, double& best_d2,
                    std::size_t& best_idx, bool& found) const {
    const Node& node = nodes_[node_idx];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const double d2 = squared_distance(q, pts_[i]);
            if (d2 < best_d2 || (d2 == best_d2 && (!found || idx_[i] < best_idx))) {
                best_d2 = d2;
                best_idx = idx_[i];
                found = true;
            }
        }
        return;
    }
    const double diff = axis_of(q, node.axis) - node.split;
    const std::uint32_t near = diff <= 0.0 ? node_idx + 1 : node.right;
    const std::uint32_t far = diff <= 0.0 ? node.right : node_idx + 1;
    search(near, q, best_d2, best_idx, found);
    if (diff * diff <= best_d2) search(far, q, best_d2, best_idx, found);
}

Neighbor KdTree::nearest(const Vec3& q) const {
    double best_d2 = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    bool found = false;
    search(0, q, best_d2, best_idx, found);
    return {best_idx, std::sqrt(best_d2)};
}

bool KdTree::nearest_within(const Vec3& q, double max_dist, Neighbor& out) const {
    double best_d2 = max_dist * max_dist;
    std::size_t best_idx = 0;
    bool found = false;
    search(0, q, best_d2, best_idx, found);
    if (!found) return false;
    out = {best_idx, std::sqrt(best_d2)};
    return true;
}

std::vector<Neighbor> nearest_neighbors(const PointCloud& query, const KdTree& target_tree) {
    std::vector<Neighbor> out(query.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(query.size());
#pragma omp parallel for schedule(static) if (n > 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = target_tree.nearest(query.points[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<Neighbor> nearest_neighbors_serial(const PointCloud& query,
                                               const KdTree& target_tree) {
    std::vector<Neighbor> out(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) {
        out[i] = target_tree.nearest(query.points[i]);
    }
    return out;
}

std::vector<Neighbor> nearest_neighbors(const PointCloud& query, const PointCloud& target) {
    if (target.empty()) throw std::invalid_argument("nearest_neighbors: empty target");
    const KdTree tree(target);
    return nearest_neighbors(query, tree);
}

std::vector<Neighbor> brute_force_nearest_neighbors(const PointCloud& query,
                                                    const PointCloud& target) {
    if (target.empty()) throw std::invalid_argument("nearest_neighbors: empty target");
    std::vector<Neighbor> out(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) {
        double best_d2 = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t j = 0; j < target.size(); ++j) {
            const double d2 = squared_distance(query.points[i], target.points[j]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best_idx = j;
            }
        }
        out[i] = {best_idx, std::sqrt(best_d2)};
    }
    return out;
}

double hausdorff_directed(const PointCloud& a, const KdTree& b_tree) {
    if (a.empty()) throw std::invalid_argument("hausdorff_directed: empty cloud");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
    std::vector<double> dists(a.size());
#pragma omp parallel for schedule(static) if (n > 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        dists[static_cast<std::size_t>(i)] = b_tree.nearest(a.points[static_cast<std::size_t>(i)]).distance;
    }
    double h = 0.0;
    for (double d : dists) h = std::max(h, d);
    return h;
}

double hausdorff_directed(const PointCloud& a, const PointCloud& b) {
    if (b.empty()) throw std::invalid_argument("hausdorff_directed: empty cloud");
    const KdTree tree(b);
    return hausdorff_directed(a, tree);
}

double hausdorff_symmetric(const PointCloud& a, const PointCloud& b) {
    return std::max(hausdorff_directed(a, b), hausdorff_directed(b, a));
}

RigidTransform best_fit_transform(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target) {
    if (source.size() != target.size()) {
        throw std::invalid_argument("best_fit_transform: pair count mismatch");
    }
    if (source.size() < 3) {
        throw DegenerateInputError("best_fit_transform: needs at least 3 pairs");
    }
    const double n = static_cast<double>(source.size());
    Vec3 cs{}, ct{};
    for (std::size_t i = 0; i < source.size(); ++i) {
        cs += source[i];
        ct += target[i];
    }
    cs = cs * (1.0 / n);
    ct = ct * (1.0 / n);

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        const Vec3 s = source[i] - cs;
        const Vec3 t = target[i] - ct;
        h(0, 0) += s.x * t.x;
        h(0, 1) += s.x * t.y;
        h(0, 2) += s.x * t.z;
        h(1, 0) += s.y * t.x;
        h(1, 1) += s.y * t.y;
        h(1, 2) += s.y * t.z;
        h(2, 0) += s.z * t.x;
        h(2, 1) += s.z * t.y;
        h(2, 2) += s.z * t.z;
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // rank < 2 leaves the rotation about the point line undetermined
    if (!(sv(1) > sv(0) * 1e-12)) {
        throw DegenerateInputError("best_fit_transform: collinear or coincident points");
    }
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d r = v * u.transpose();
    if (r.determinant() < 0.0) {
        v.col(2) *= -1.0;
        r = v * u.transpose();
    }

    RigidTransform out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out.at(i, j) = r(i, j);
    }
    const Vec3 rcs{r(0, 0) * cs.x + r(0, 1) * cs.y + r(0, 2) * cs.z,
                   r(1, 0) * cs.x + r(1, 1) * cs.y + r(1, 2) * cs.z,
                   r(2, 0) * cs.x + r(2, 1) * cs.y + r(2, 2) * cs.z};
    out.at(0, 3) = ct.x - rcs.x;
    out.at(1, 3) = ct.y - rcs.y;
    out.at(2, 3) = ct.z - rcs.z;
    return out;
}

PointCloud voxel_downsample(const PointCloud& pc, double voxel) {
    if (voxel <= 0.0) return pc;
    std::map<std::tuple<long long, long long, long long>, std::size_t> seen;
    PointCloud out;
    for (std::size_t i = 0; i < pc.size(); ++i) {
        const Vec3& p = pc.points[i];
        const auto key = std::make_tuple(static_cast<long long>(std::floor(p.x / voxel)),
                                         static_cast<long long>(std::floor(p.y / voxel)),
                                         static_cast<long long>(std::floor(p.z / voxel)));
        if (seen.emplace(key, i).second) out.points.push_back(p);
    }
    return out;
}

namespace {

struct CorrespondenceScratch {
    std::vector<Vec3> transformed;
    std::vector<std::uint8_t> found;
    std::vector<std::uint32_t> target_idx;
    std::vector<double> dist;
    bool warm = false;          // dist/found describe the previous iteration
    double max_point_norm = 0;  // max |T*p| seen, for the displacement bound
};

struct IterationMetrics {
    double fitness = 0.0;
    double rmse = 0.0;
    std::size_t inliers = 0;
};

// Upper bound on how far any transformed point can move under delta. The
// absolute slack covers the rounding of composing transforms and re-applying
// them (a few 1e-14 mm at scan scale); without it a nearest neighbor sitting
// exactly on the bound can be missed.
double max_displacement_bound(const RigidTransform& delta, double max_norm) {
    double rot = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double want = r == c ? 1.0 : 0.0;
            const double d = delta.at(r, c) - want;
            rot += d * d;
        }
    }
    return delta.translation_part().norm() + std::sqrt(rot) * max_norm + 1e-9;
}

// an update this small cannot move any inlier by more than ~1e-9 mm at
// scan scale, so the metrics are pinned and the loop has converged
bool rigid_update_negligible(const RigidTransform& delta) {
    double dev = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double want = r == c ? 1.0 : 0.0;
            dev = std::max(dev, std::abs(delta.at(r, c) - want));
        }
        dev = std::max(dev, std::abs(delta.at(r, 3)) * 1e-2);
    }
    return dev < 1e-11;
}

// One correspondence pass at transform t. When the scratch already holds the
// previous iteration's distances, each query is bounded by that distance plus
// the worst-case displacement of the update; the true nearest neighbor is
// always within that bound, so the result is exactly the unbounded search.
IterationMetrics correspond(const PointCloud& src, const RigidTransform& t,
                            const KdTree& tree, double threshold,
                            CorrespondenceScratch& scratch, double displacement_bound) {
    const std::size_t n = src.size();
    scratch.transformed.resize(n);
    const bool warm = scratch.warm && scratch.dist.size() == n;
    if (!warm) {
        scratch.found.assign(n, 0);
        scratch.dist.assign(n, 0.0);
    }
    scratch.target_idx.resize(n);
    const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(n);
    double max_norm = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_norm) if (pn > 512)
    for (std::ptrdiff_t i = 0; i < pn; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const Vec3 q = t.apply(src.points[ui]);
        scratch.transformed[ui] = q;
        max_norm = std::max(max_norm, q.squared_norm());
        double bound = threshold;
        if (warm && scratch.found[ui]) {
            bound = std::min(threshold, scratch.dist[ui] + displacement_bound);
        }
        Neighbor nb;
        if (tree.nearest_within(q, bound, nb)) {
            scratch.found[ui] = 1;
            scratch.target_idx[ui] = static_cast<std::uint32_t>(nb.index);
            scratch.dist[ui] = nb.distance;
        } else {
            scratch.found[ui] = 0;
        }
    }
    scratch.max_point_norm = std::sqrt(max_norm);
    scratch.warm = true;
    IterationMetrics m;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!scratch.found[i]) continue;
        ++m.inliers;
        sum_sq += scratch.dist[i] * scratch.dist[i];
    }
    m.fitness = n == 0 ? 0.0 : static_cast<double>(m.inliers) / static_cast<double>(n);
    m.rmse = m.inliers == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(m.inliers));
    return m;
}

}  // namespace

RegistrationReport icp(const PointCloud& source, const PointCloud& target,
                       const KdTree& target_tree, const IcpParams& params) {
    if (source.empty() || target.empty()) throw std::invalid_argument("icp: empty cloud");
    if (!(params.threshold > 0.0)) throw std::invalid_argument("icp: threshold must be > 0");

    const PointCloud src =
        params.voxel > 0.0 ? voxel_downsample(source, params.voxel) : source;

    RegistrationReport rep;
    rep.threshold = params.threshold;
    rep.source_size = src.size();
    rep.target_size = target.size();

    RigidTransform t;
    CorrespondenceScratch scratch;
    IterationMetrics m = correspond(src, t, target_tree, params.threshold, scratch, 0.0);
    std::vector<Vec3> pair_src, pair_tgt;
    for (int it = 1; it <= params.max_iterations; ++it) {
        if (m.inliers == 0) break;
        pair_src.clear();
        pair_tgt.clear();
        pair_src.reserve(m.inliers);
        pair_tgt.reserve(m.inliers);
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (!scratch.found[i]) continue;
            pair_src.push_back(scratch.transformed[i]);
            pair_tgt.push_back(target.points[scratch.target_idx[i]]);
        }
        RigidTransform delta;
        try {
            delta = best_fit_transform(pair_src, pair_tgt);
        } catch (const DegenerateInputError&) {
            break;  // not enough geometry to update; report the current state
        }
        t = compose(delta, t);
        const double shift = max_displacement_bound(delta, scratch.max_point_norm);
        const IterationMetrics next =
            correspond(src, t, target_tree, params.threshold, scratch, shift);
        rep.iterations = it;
        const bool settled = std::abs(next.fitness - m.fitness) < params.eps &&
                             std::abs(next.rmse - m.rmse) < params.eps;
        m = next;
        if (settled || rigid_update_negligible(delta)) {
            rep.converged = true;
            break;
        }
    }

    rep.fitness = m.fitness;
    rep.inlier_rmse = m.rmse;
    rep.inliers = m.inliers;
    rep.transform = t;
    // directed Hausdorff at the final transform: inlier distances are already
    // exact from the last correspondence pass, only outliers need a full query
    double haus = 0.0;
    {
        const std::ptrdiff_t pn = static_cast<std::ptrdiff_t>(src.size());
        std::vector<double> dists(src.size());
#pragma omp parallel for schedule(static) if (pn > 512)
        for (std::ptrdiff_t i = 0; i < pn; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            dists[ui] = scratch.found[ui] ? scratch.dist[ui]
                                          : target_tree.nearest(scratch.transformed[ui]).distance;
        }
        for (double d : dists) haus = std::max(haus, d);
    }
    rep.hausdorff = haus;
    if (params.symmetric_hausdorff) {
        PointCloud moved;
        moved.points = scratch.transformed;
        const KdTree moved_tree(moved);
        rep.hausdorff = std::max(rep.hausdorff, hausdorff_directed(target, moved_tree));
    }
    return rep;
}

RegistrationReport icp(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params) {
    if (target.empty()) throw std::invalid_argument("icp: empty target");
    const PointCloud tgt = params.voxel > 0.0 ? voxel_downsample(target, params.voxel) : target;
    const KdTree tree(tgt);
    return icp(source, tgt, tree, params);
}

std::string report_to_json(const RegistrationReport& rep, const std::string& source_name,
                           const std::string& target_name) {
    nlohmann::json j;
    j["source"] = source_name;
    j["target"] = target_name;
    j["threshold_mm"] = rep.threshold;
    j["fitness"] = rep.fitness;
    j["inlier_rmse_mm"] = rep.inlier_rmse;
    j["hausdorff_mm"] = rep.hausdorff;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    j["inliers"] = rep.inliers;
    j["source_points"] = rep.source_size;
    j["target_points"] = rep.target_size;
    nlohmann::json tf = nlohmann::json::array();
    for (double v : rep.transform.row_major()) tf.push_back(v);
    j["transform_row_major"] = tf;
    return j.dump(2) + "\n";
}

}  // namespace trus
