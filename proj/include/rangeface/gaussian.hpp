#pragma once

#include <vector>

#include "rangeface/image.hpp"

namespace rangeface {

/// Discrete Gaussian taps for the given sigma, truncated at 3*sigma and
/// renormalised to unit mass. A sigma too small to produce off-centre taps
/// yields the identity kernel {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing. Borders fold back symmetrically (index -1
/// reads pixel 0), which preserves total mass on constant images.
Image gaussian_smooth(const Image& src, double sigma);

}  // namespace rangeface
