#include "rangeface/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace rangeface {

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma < 0.0 || !std::isfinite(sigma))
        throw std::invalid_argument("gaussian sigma must be finite and >= 0");
    const int r = static_cast<int>(3.0 * sigma);
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        total += v;
    }
    if (r == 0) return {1.0};
    for (double& v : k) v /= total;
    return k;
}

namespace {

// half-sample symmetric fold: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

Image gaussian_smooth(const Image& src, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const int r = (static_cast<int>(k.size()) - 1) / 2;
    if (r == 0) return src;

    Image tmp(src.width, src.height, 0.0);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * src.at(reflect(x + i, src.width), y);
            tmp.at(x, y) = acc;
        }

    Image out(src.width, src.height, 0.0);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * tmp.at(x, reflect(y + i, src.height));
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace rangeface
