#pragma once

#include <string>

#include "trus/geometry.hpp"

namespace trus {

enum class CloudFormat { PLY, XYZ };

/// ASCII PLY, element vertex with double x/y/z in mm. Written values
/// round-trip bit-exactly through read_ply.
void write_ply(const PointCloud& pc, const std::string& path);
PointCloud read_ply(const std::string& path);

/// Plain three-column whitespace-separated x y z.
void write_xyz(const PointCloud& pc, const std::string& path);
PointCloud read_xyz(const std::string& path);

void write_cloud(const PointCloud& pc, const std::string& path, CloudFormat format);
/// Picks the format from the extension (.ply or anything else as xyz).
PointCloud read_cloud(const std::string& path);

/// 16 numbers row-major; used inside the JSON report schema.
std::string transform_to_json_array(const RigidTransform& t);

}  // namespace trus
