#include "rangeface/integral.hpp"

#include <algorithm>
#include <stdexcept>

namespace rangeface {

IntegralImage integral_image(const Image& img) {
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("integral_image: empty image");
    IntegralImage ii;
    ii.width = img.width;
    ii.height = img.height;
    ii.table.assign(static_cast<std::size_t>(img.width + 1) * (img.height + 1), 0.0);
    const int w = img.width;
    for (int y = 0; y < img.height; ++y) {
        const double* src = &img.data[static_cast<std::size_t>(y) * w];
        const double* prev = &ii.table[static_cast<std::size_t>(y) * (w + 1)];
        double* cur = &ii.table[static_cast<std::size_t>(y + 1) * (w + 1)];
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += src[x];
            cur[x + 1] = prev[x + 1] + row;
        }
    }
    return ii;
}

double rect_sum(const IntegralImage& ii, const Rect& r) {
    const int l = std::max(r.left, 0);
    const int t = std::max(r.top, 0);
    const int rr = std::min(r.right, ii.width - 1);
    const int b = std::min(r.bottom, ii.height - 1);
    if (l > rr || t > b) return 0.0;
    return ii.tab(rr + 1, b + 1) - ii.tab(l, b + 1) - ii.tab(rr + 1, t) + ii.tab(l, t);
}

}  // namespace rangeface
