#pragma once

#include <string>

#include "trus/cloud_io.hpp"
#include "trus/sweep.hpp"

namespace trus {

/// Stacks every present slice contour into the 3D visualization frame:
/// contour point (u, v) embeds as (u, v, 0) and maps through
/// slice_transform(phi - phi_center, probe_radius). Slice order, then contour
/// order; the parallel path produces bit-identical output.
PointCloud reconstruct(const SweepRecord& rec, double probe_radius, double phi_center = 0.0);
PointCloud reconstruct_serial(const SweepRecord& rec, double probe_radius,
                              double phi_center = 0.0);

void export_cloud(const PointCloud& pc, const std::string& path, CloudFormat format);

}  // namespace trus
