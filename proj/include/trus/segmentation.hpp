#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trus/phantom.hpp"
#include "trus/rng.hpp"

namespace trus {

struct SegOracleConfig {
    ImageSpec image;
    double min_area = 10.0;     // mm^2 below which the slice classifies as background
    double jitter_sigma = 0.45; // mm of Gaussian noise on contour points; 0 disables
};

struct Mask {
    int nu = 0;
    int nv = 0;
    double resolution = 0.0;
    std::vector<std::uint8_t> data;  // row-major, nv rows of nu

    bool empty() const { return data.empty(); }
    bool at(int iu, int iv) const {
        return data[static_cast<std::size_t>(iv) * static_cast<std::size_t>(nu) +
                    static_cast<std::size_t>(iu)] != 0;
    }
};

/// Classification + segmentation output. present is false exactly when the
/// mask and contour are empty and the centroid is absent (background frame).
struct SegmentationResult {
    bool present = false;
    Mask mask;
    std::vector<Point2> contour;
    std::optional<Point2> centroid;
    double area_mm2 = 0.0;
};

/// Rasterizes the filled ground-truth contour on the image grid and
/// classifies the frame: present iff the rasterized area reaches min_area.
/// Area and centroid are pixel-exact (computed from scanline spans). The mask
/// grid is materialized only when requested; the span math is identical.
SegmentationResult segment(const SegOracleConfig& cfg, const std::vector<Point2>& contour_gt,
                           GaussianRng* rng = nullptr, bool materialize_mask = false);

/// Signed mm distance of the mask centroid from the image center along the
/// probe x-axis. Throws when no prostate is in view.
double visual_offset(const SegmentationResult& seg, const ImageSpec& image);

void write_pgm(const Mask& mask, const std::string& path);
void write_contour_csv(const std::vector<Point2>& contour, const std::string& path);

}  // namespace trus
