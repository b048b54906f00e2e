#include "trus/reconstruction.hpp"

#include <stdexcept>

namespace trus {

namespace {

std::vector<std::size_t> slice_offsets(const SweepRecord& rec, std::size_t& total) {
    std::vector<std::size_t> offsets(rec.slices.size() + 1, 0);
    for (std::size_t i = 0; i < rec.slices.size(); ++i) {
        const auto& s = rec.slices[i];
        offsets[i + 1] = offsets[i] + (s.seg.present ? s.seg.contour.size() : 0);
    }
    total = offsets.back();
    return offsets;
}

void check_preconditions(const SweepRecord& rec) {
    if (rec.present_slices() < 2) {
        throw std::invalid_argument("reconstruct: record needs at least 2 slices with a prostate");
    }
}

void fill_slice(const SweepRecord::Slice& s, double probe_radius, double phi_center,
                Vec3* out) {
    const RigidTransform t = slice_transform(s.phi - phi_center, probe_radius);
    for (std::size_t j = 0; j < s.seg.contour.size(); ++j) {
        const Point2& p = s.seg.contour[j];
        out[j] = t.apply({p.u, p.v, 0.0});
    }
}

}  // namespace

PointCloud reconstruct_serial(const SweepRecord& rec, double probe_radius, double phi_center) {
    check_preconditions(rec);
    std::size_t total = 0;
    const auto offsets = slice_offsets(rec, total);
    PointCloud pc;
    pc.points.resize(total);
    for (std::size_t i = 0; i < rec.slices.size(); ++i) {
        if (!rec.slices[i].seg.present) continue;
        fill_slice(rec.slices[i], probe_radius, phi_center, pc.points.data() + offsets[i]);
    }
    return pc;
}

PointCloud reconstruct(const SweepRecord& rec, double probe_radius, double phi_center) {
    check_preconditions(rec);
    std::size_t total = 0;
    const auto offsets = slice_offsets(rec, total);
    PointCloud pc;
    pc.points.resize(total);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rec.slices.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& s = rec.slices[static_cast<std::size_t>(i)];
        if (!s.seg.present) continue;
        fill_slice(s, probe_radius, phi_center,
                   pc.points.data() + offsets[static_cast<std::size_t>(i)]);
    }
    return pc;
}

void export_cloud(const PointCloud& pc, const std::string& path, CloudFormat format) {
    if (pc.empty()) throw std::invalid_argument("export_cloud: empty cloud");
    write_cloud(pc, path, format);
}

}  // namespace trus
