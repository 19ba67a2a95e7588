#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace rangeface {

/// Dense row-major grid of doubles.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

/// Sub-pixel position; u runs along columns, v along rows.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Bilinear sample at real coordinates; caller guarantees
/// 0 <= u <= width-1 and 0 <= v <= height-1.
inline double sample_bilinear(const Image& img, double u, double v) {
    assert(img.width >= 2 && img.height >= 2);
    assert(u >= 0.0 && v >= 0.0 && u <= img.width - 1.0 && v <= img.height - 1.0);
    int x0 = static_cast<int>(std::floor(u));
    int y0 = static_cast<int>(std::floor(v));
    if (x0 > img.width - 2) x0 = img.width - 2;
    if (y0 > img.height - 2) y0 = img.height - 2;
    const double fx = u - x0;
    const double fy = v - y0;
    const double a = img.at(x0, y0);
    const double b = img.at(x0 + 1, y0);
    const double c = img.at(x0, y0 + 1);
    const double d = img.at(x0 + 1, y0 + 1);
    return (1.0 - fx) * ((1.0 - fy) * a + fy * c) + fx * ((1.0 - fy) * b + fy * d);
}

}  // namespace rangeface
