#pragma once

#include <vector>

#include "rangeface/image.hpp"

namespace rangeface {

/// Cumulative-sum table with one extra zero row and column, so rectangle
/// sums touching the image edge need no special cases. tab(x, y) holds the
/// sum of all pixels (i, j) with i < x and j < y.
struct IntegralImage {
    int width = 0;  // source image dimensions
    int height = 0;
    std::vector<double> table;  // (width+1) x (height+1), row-major

    double tab(int x, int y) const {
        return table[static_cast<std::size_t>(y) * (width + 1) + x];
    }
};

/// Inclusive pixel bounds. May extend past the image; the out-of-range part
/// contributes zero.
struct Rect {
    int left = 0;
    int top = 0;
    int right = 0;
    int bottom = 0;
};

IntegralImage integral_image(const Image& img);

/// Sum of img over r using four table lookups.
double rect_sum(const IntegralImage& ii, const Rect& r);

}  // namespace rangeface
