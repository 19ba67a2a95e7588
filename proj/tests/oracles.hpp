#pragma once

// Independent reference implementations the unit and acceptance tests check
// the library against. Everything here favours the most literal possible
// formulation (per-entry double sums, dense mask application) over speed,
// and shares no code with the library paths under test.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rangeface/image.hpp"
#include "rangeface/suld.hpp"

namespace oracle {

/// Integral table entry by direct double sum: sum of img(i, j), i < x, j < y.
inline double integral_entry(const rangeface::Image& img, int x, int y) {
    double total = 0.0;
    for (int j = 0; j < y; ++j)
        for (int i = 0; i < x; ++i) total += img.at(i, j);
    return total;
}

/// Inclusive rectangle sum by direct loop, clipped to the image.
inline double rect_sum(const rangeface::Image& img, int left, int top, int right,
                       int bottom) {
    left = std::max(left, 0);
    top = std::max(top, 0);
    right = std::min(right, img.width - 1);
    bottom = std::min(bottom, img.height - 1);
    double total = 0.0;
    for (int j = top; j <= bottom; ++j)
        for (int i = left; i <= right; ++i) total += img.at(i, j);
    return total;
}

/// Dense weight mask over inclusive offset ranges.
struct Mask {
    int min_dx = 0, max_dx = 0, min_dy = 0, max_dy = 0;
    std::vector<double> w;  // (max_dx-min_dx+1) x (max_dy-min_dy+1), row-major in dy

    double& at(int dx, int dy) {
        return w[static_cast<std::size_t>(dy - min_dy) * (max_dx - min_dx + 1) +
                 (dx - min_dx)];
    }
    double at(int dx, int dy) const {
        return w[static_cast<std::size_t>(dy - min_dy) * (max_dx - min_dx + 1) +
                 (dx - min_dx)];
    }
    static Mask zeros(int min_dx, int max_dx, int min_dy, int max_dy) {
        Mask m;
        m.min_dx = min_dx;
        m.max_dx = max_dx;
        m.min_dy = min_dy;
        m.max_dy = max_dy;
        m.w.assign(static_cast<std::size_t>(max_dx - min_dx + 1) *
                       static_cast<std::size_t>(max_dy - min_dy + 1),
                   0.0);
        return m;
    }
};

/// The second-derivative box mask in x for filter side L: +1 over the full
/// (2*lobe-1)-row band, an extra -3 over its middle third.
inline Mask box_dxx_mask(int L) {
    const int lobe = L / 3;
    const int b = (L - 1) / 2;
    Mask m = Mask::zeros(-b, b, -(lobe - 1), lobe - 1);
    for (int dy = -(lobe - 1); dy <= lobe - 1; ++dy)
        for (int dx = -b; dx <= b; ++dx) {
            m.at(dx, dy) = 1.0;
            if (std::abs(dx) <= lobe / 2) m.at(dx, dy) -= 3.0;
        }
    return m;
}

inline Mask box_dyy_mask(int L) {
    const Mask t = box_dxx_mask(L);
    Mask m = Mask::zeros(t.min_dy, t.max_dy, t.min_dx, t.max_dx);
    for (int dy = m.min_dy; dy <= m.max_dy; ++dy)
        for (int dx = m.min_dx; dx <= m.max_dx; ++dx) m.at(dx, dy) = t.at(dy, dx);
    return m;
}

/// Quadrant mask: +1 in the top-right and bottom-left lobe x lobe squares
/// one pixel off the axes, -1 in the other two.
inline Mask box_dxy_mask(int L) {
    const int lobe = L / 3;
    Mask m = Mask::zeros(-lobe, lobe, -lobe, lobe);
    for (int dy = 1; dy <= lobe; ++dy)
        for (int dx = 1; dx <= lobe; ++dx) {
            m.at(dx, -dy) = 1.0;
            m.at(-dx, dy) = 1.0;
            m.at(-dx, -dy) = -1.0;
            m.at(dx, dy) = -1.0;
        }
    return m;
}

/// Horizontal Haar mask of side h: -1 on the left h/2 columns, +1 on the
/// right, window columns [x-h/2, x+h/2-1].
inline Mask haar_x_mask(int h) {
    const int half = h / 2;
    Mask m = Mask::zeros(-half, half - 1, -half, half - 1);
    for (int dy = -half; dy <= half - 1; ++dy)
        for (int dx = -half; dx <= half - 1; ++dx) m.at(dx, dy) = dx < 0 ? -1.0 : 1.0;
    return m;
}

inline Mask haar_y_mask(int h) {
    const int half = h / 2;
    Mask m = Mask::zeros(-half, half - 1, -half, half - 1);
    for (int dy = -half; dy <= half - 1; ++dy)
        for (int dx = -half; dx <= half - 1; ++dx) m.at(dx, dy) = dy < 0 ? -1.0 : 1.0;
    return m;
}

/// Dense correlation. Pixels whose mask support leaves the image get `fill`;
/// `post` scales each supported result (the box filters divide by area).
inline rangeface::Image apply_mask(const rangeface::Image& img, const Mask& m,
                                   double post = 1.0, double fill = 0.0) {
    rangeface::Image out(img.width, img.height, fill);
    for (int y = 0; y < img.height; ++y) {
        if (y + m.min_dy < 0 || y + m.max_dy >= img.height) continue;
        for (int x = 0; x < img.width; ++x) {
            if (x + m.min_dx < 0 || x + m.max_dx >= img.width) continue;
            double acc = 0.0;
            for (int dy = m.min_dy; dy <= m.max_dy; ++dy)
                for (int dx = m.min_dx; dx <= m.max_dx; ++dx)
                    acc += m.at(dx, dy) * img.at(x + dx, y + dy);
            out.at(x, y) = acc * post;
        }
    }
    return out;
}

/// ... 1 0 | 0 1 ... n-1 | n-1 n-2 ... index fold, as the library documents
/// for its smoothing borders.
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

/// Full 2D Gaussian convolution as one dense pass: kernel built from the
/// same truncation rule the contract states (radius 3*sigma, renormalized),
/// applied as an outer product with reflected borders.
inline rangeface::Image dense_gaussian(const rangeface::Image& img, double sigma) {
    const int r = static_cast<int>(3.0 * sigma);
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
        total += k[static_cast<std::size_t>(i + r)];
    }
    for (double& v : k) v /= total;

    rangeface::Image out(img.width, img.height, 0.0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    acc += k[static_cast<std::size_t>(dx + r)] *
                           k[static_cast<std::size_t>(dy + r)] *
                           img.at(reflect_index(x + dx, img.width),
                                  reflect_index(y + dy, img.height));
            out.at(x, y) = acc;
        }
    return out;
}

struct OracleMatch {
    int probe_index;
    int gallery_index;
    double best_dist;
    double second_dist;
};

/// The ratio test applied literally: all pairwise distances, pick the two
/// smallest, accept iff best < threshold * second.
inline std::vector<OracleMatch> lowe_matches(
    const std::vector<rangeface::SuldDescriptor>& probe,
    const std::vector<rangeface::SuldDescriptor>& gallery, double threshold) {
    std::vector<OracleMatch> out;
    if (gallery.size() < 2) return out;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(gallery.size());
        for (std::size_t j = 0; j < gallery.size(); ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < probe[i].values.size(); ++c) {
                const double d = probe[i].values[c] - gallery[j].values[c];
                acc += d * d;
            }
            dists.emplace_back(std::sqrt(acc), j);
        }
        std::stable_sort(dists.begin(), dists.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        const double best = dists[0].first;
        const double second = dists[1].first;
        if (best < threshold * second)
            out.push_back({static_cast<int>(i), static_cast<int>(dists[0].second), best,
                           second});
    }
    return out;
}

}  // namespace oracle
