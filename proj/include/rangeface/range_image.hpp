#pragma once

#include <cstdint>
#include <vector>

#include "rangeface/image.hpp"
#include "rangeface/point_cloud.hpp"
#include "rangeface/registration.hpp"

namespace rangeface {

/// Raster layout: node (i, j) sits at world (x0 + i*dx, y0 + j*dy), with
/// node 0 on the low edge and the last node on the high edge.
struct GridSpec {
    int width = 128;
    int height = 128;
    double x0 = 0.0, x1 = 1.0;
    double y0 = 0.0, y1 = 1.0;

    double pixel_width() const { return (x1 - x0) / (width - 1); }
    double pixel_height() const { return (y1 - y0) / (height - 1); }
    double node_x(int i) const { return x0 + i * pixel_width(); }
    double node_y(int j) const { return y0 + j * pixel_height(); }

    void validate() const;  // throws on nonsense dimensions or ranges

    /// Grid over the cloud's xy bounding box, padded by margin (a fraction of
    /// the box size) on each side; the pad never drops below half a scanner
    /// unit, which keeps flat or single-row clouds rasterizable.
    static GridSpec fit(const PointCloud& cloud, int width = 128, int height = 128,
                        double margin = 0.05);
};

/// Depth raster. Valid pixels span up to 255 with the nearest surface
/// brightest; background and invalid pixels hold 0.
struct RangeImage {
    Image depth;
    std::vector<std::uint8_t> valid;
    GridSpec grid;

    int width() const { return depth.width; }
    int height() const { return depth.height; }
    bool is_valid(int x, int y) const {
        return valid[static_cast<std::size_t>(y) * depth.width + x] != 0;
    }
    void set_valid(int x, int y, bool v) {
        valid[static_cast<std::size_t>(y) * depth.width + x] = v ? 1 : 0;
    }
};

/// Projects the cloud along -z onto the grid and linearly interpolates depth
/// across the projected surface (triangulated). Grid nodes outside the
/// points' convex hull stay invalid. Where several points project onto the
/// same spot, the one nearest the scanner (largest z) wins. Valid depths are
/// affinely mapped so the maximum is 255 (and the minimum 0).
RangeImage rasterize(const PointCloud& cloud, const GridSpec& spec);

/// Centroid of the largest connected plateau within flat_tol of the maximum
/// valid depth; ties go to the region seen first in row-major order.
PixelCoord find_nose_tip(const RangeImage& img, double flat_tol = 1.0);

/// Keeps pixels with ((u-cu)/a)^2 + ((v-cv)/b)^2 <= 1; everything else
/// becomes invalid background. Idempotent.
RangeImage crop_ellipse(const RangeImage& img, PixelCoord center, double a, double b);

struct PreprocessConfig {
    int grid_width = 128;
    int grid_height = 128;
    double grid_margin = 0.05;  // padding around the registered bounding box
    // crop ellipse semi-axes as fractions of the grid dimensions
    double crop_a_frac = 0.35;
    double crop_b_frac = 0.45;
    IcpParams icp;

    void validate() const;
};

struct PreprocessResult {
    RangeImage image;
    PixelCoord nose_tip;
    bool registered = false;
    int icp_iterations = 0;
    double icp_rms = 0.0;
};

/// Full front end: optional ICP onto the reference cloud, grid fitted to the
/// registered bounding box, rasterize, locate the nose tip, crop an ellipse
/// there.
PreprocessResult preprocess(const PointCloud& cloud, const PointCloud* reference,
                            const PreprocessConfig& cfg = {});

}  // namespace rangeface
