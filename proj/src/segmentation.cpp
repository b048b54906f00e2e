#include "trus/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "trus/num_format.hpp"

namespace trus {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

SegmentationResult segment(const SegOracleConfig& cfg, const std::vector<Point2>& contour_gt,
                           GaussianRng* rng, bool materialize_mask) {
    SegmentationResult out;
    if (contour_gt.size() < 3) return out;  // background frame

    std::vector<Point2> poly = contour_gt;
    if (cfg.jitter_sigma > 0.0 && rng != nullptr) {
        for (Point2& p : poly) {
            p.u = clamp(p.u + cfg.jitter_sigma * rng->gaussian(), 0.0, cfg.image.width);
            p.v = clamp(p.v + cfg.jitter_sigma * rng->gaussian(), 0.0, cfg.image.depth);
        }
    }

    const double res = cfg.image.resolution;
    const int nu = cfg.image.nu(), nv = cfg.image.nv();

    // scanline crossings of the closed polygon at pixel-center rows
    std::vector<std::vector<double>> crossings(static_cast<std::size_t>(nv));
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        if (a.v == b.v) continue;
        const double vmin = std::min(a.v, b.v), vmax = std::max(a.v, b.v);
        int j0 = static_cast<int>(std::ceil((vmin - 0.5 * res) / res));
        int j1 = static_cast<int>(std::floor((vmax - 0.5 * res) / res));
        j0 = std::max(j0, 0);
        j1 = std::min(j1, nv - 1);
        for (int j = j0; j <= j1; ++j) {
            const double vc = (j + 0.5) * res;
            if ((a.v <= vc) == (b.v <= vc)) continue;
            const double u = a.u + (vc - a.v) * (b.u - a.u) / (b.v - a.v);
            crossings[static_cast<std::size_t>(j)].push_back(u);
        }
    }

    std::size_t count = 0;
    double sum_u = 0.0, sum_v = 0.0;
    Mask mask;
    if (materialize_mask) {
        mask.nu = nu;
        mask.nv = nv;
        mask.resolution = res;
        mask.data.assign(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv), 0);
    }
    for (int j = 0; j < nv; ++j) {
        auto& xs = crossings[static_cast<std::size_t>(j)];
        if (xs.size() < 2) continue;
        std::sort(xs.begin(), xs.end());
        const double vc = (j + 0.5) * res;
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            // pixel centers strictly inside the span, clipped to the window
            int i0 = static_cast<int>(std::ceil((xs[k] - 0.5 * res) / res));
            int i1 = static_cast<int>(std::floor((xs[k + 1] - 0.5 * res) / res));
            if ((i1 + 0.5) * res > xs[k + 1]) --i1;
            if ((i0 + 0.5) * res < xs[k]) ++i0;
            i0 = std::max(i0, 0);
            i1 = std::min(i1, nu - 1);
            if (i1 < i0) continue;
            const std::size_t run = static_cast<std::size_t>(i1 - i0 + 1);
            count += run;
            // arithmetic series of the pixel-center u coordinates
            sum_u += 0.5 * static_cast<double>(run) * ((i0 + 0.5) * res + (i1 + 0.5) * res);
            sum_v += static_cast<double>(run) * vc;
            if (materialize_mask) {
                for (int i = i0; i <= i1; ++i) {
                    mask.data[static_cast<std::size_t>(j) * static_cast<std::size_t>(nu) +
                              static_cast<std::size_t>(i)] = 255;
                }
            }
        }
    }

    const double area = static_cast<double>(count) * res * res;
    if (area < cfg.min_area) return SegmentationResult{};  // background: everything empty

    out.present = true;
    out.area_mm2 = area;
    out.contour = std::move(poly);
    out.centroid = Point2{sum_u / static_cast<double>(count), sum_v / static_cast<double>(count)};
    out.mask = std::move(mask);
    return out;
}

double visual_offset(const SegmentationResult& seg, const ImageSpec& image) {
    if (!seg.present || !seg.centroid.has_value()) {
        throw std::runtime_error("visual_offset: no prostate in view");
    }
    return seg.centroid->u - 0.5 * image.width;
}

void write_pgm(const Mask& mask, const std::string& path) {
    if (mask.empty()) throw std::runtime_error(path + ": refusing to write an empty mask");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << mask.nu << " " << mask.nv << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.data.data()),
              static_cast<std::streamsize>(mask.data.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

void write_contour_csv(const std::vector<Point2>& contour, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::string body = "u,v\n";
    for (const Point2& p : contour) {
        append_double(body, p.u);
        body += ',';
        append_double(body, p.v);
        body += '\n';
    }
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace trus
