#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rangeface/image.hpp"
#include "rangeface/integral.hpp"

namespace rangeface {

struct DetectorConfig {
    double hessian_weight = 0.9;  // balances the cross-derivative box response
    int octaves = 3;
    int levels_per_octave = 4;
    int base_filter_size = 9;
    // absolute response cutoff; when unset the detector keeps the
    // target_points strongest responses instead
    std::optional<double> response_threshold;
    int target_points = 24;

    void validate() const;  // throws on out-of-contract values
};

/// Hessian determinant response at one filter size, full image resolution.
/// Pixels without complete filter support hold 0.
struct ResponseMap {
    Image values;
    int filter_size = 9;
    double scale = 1.2;  // sigma of the Gaussian the box filters approximate

    int border_margin() const { return (filter_size - 1) / 2; }
};

struct ScaleSpace {
    std::vector<ResponseMap> maps;  // octave-major: maps[octave * levels + level]
    int octaves = 0;
    int levels = 0;

    const ResponseMap& at(int octave, int level) const {
        return maps[static_cast<std::size_t>(octave) * levels + level];
    }
};

struct SignificantPoint {
    PixelCoord location;
    double scale = 0.0;
    double response = 0.0;
};

/// Area-normalized second-derivative box responses.
struct HessianComponents {
    Image dxx, dyy, dxy;
    int filter_size = 9;
};

HessianComponents hessian_components(const IntegralImage& ii, int filter_size);

/// det(H) = Dxx*Dyy - (w*Dxy)^2 per pixel. filter_size must be odd, >= 9 and
/// congruent to 9 mod 6; it must also fit inside the image.
ResponseMap hessian_response_map(const IntegralImage& ii, int filter_size, double weight);

/// Filter size at (octave, level): octave 0 starts at the base size with
/// step 6; each further octave starts at the previous octave's second size
/// and doubles the step (9,15,21,27 / 15,27,39,51 / 27,51,75,99 ...).
int filter_size_for(const DetectorConfig& cfg, int octave, int level);
int filter_step_for(const DetectorConfig& cfg, int octave);

/// All response maps, octave-major. Throws before building anything if some
/// requested filter outgrows the image, naming that size.
ScaleSpace build_scale_space(const IntegralImage& ii, const DetectorConfig& cfg);

/// Scale-space maxima: strictly greater than all 26 neighbours across
/// position and level, at or above the threshold, refined to sub-pixel with
/// a quadratic fit. Sorted by descending response.
std::vector<SignificantPoint> detect_significant_points(const IntegralImage& ii,
                                                        const DetectorConfig& cfg);

/// Text form: one "u v scale response" line per point.
void save_points(const std::vector<SignificantPoint>& points,
                 const std::filesystem::path& path);
std::vector<SignificantPoint> load_points(const std::filesystem::path& path);

}  // namespace rangeface
