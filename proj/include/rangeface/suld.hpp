#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rangeface/detector.hpp"
#include "rangeface/image.hpp"

namespace rangeface {

struct DescriptorConfig {
    int haar_size = 4;   // side of the Haar window, even
    int directions = 8;  // samples per ring
    std::array<double, 3> radii{5.0, 10.0, 15.0};
    std::array<double, 3> sigmas{2.5, 5.0, 7.5};
    double epsilon_norm = 1e-12;  // below this a sample vector stays zero
    // when set, ring radii and the Haar window grow with the detected scale
    // (factor scale / 1.2); default keeps them fixed
    bool scale_proportional = false;

    int length() const { return 4 * (1 + 3 * directions); }
    void validate() const;  // throws on out-of-contract values
};

/// First-derivative box responses plus their pointwise absolute values.
/// Pixels whose Haar window leaves the image hold 0 in all four maps.
struct ResponseMaps {
    Image gx, gy, abs_gx, abs_gy;
    int haar_size = 4;
};

/// The response maps smoothed to each configured sigma, coarsest last.
struct ConvolvedStack {
    std::array<ResponseMaps, 3> levels;
    std::array<double, 3> sigmas{};
    int width = 0;
    int height = 0;
};

struct SuldDescriptor {
    PixelCoord anchor;
    double scale = 0.0;
    std::vector<double> values;  // 4 * (1 + 3 * directions) entries
};

/// Signed horizontal / vertical Haar responses over an h x h window; each
/// half-window sum comes from the integral image. The window for pixel x
/// covers columns [x - h/2, x + h/2 - 1], so the positive half starts at the
/// pixel itself.
ResponseMaps haar_response_maps(const Image& img, int haar_size);

/// Incremental smoothing: level 0 carries sigma[0]; each next level smooths
/// the previous one by sqrt(s[k+1]^2 - s[k]^2), which equals direct
/// smoothing at s[k+1] up to kernel truncation.
ConvolvedStack gaussian_cascade(const ResponseMaps& maps,
                                const std::array<double, 3>& sigmas);

/// Bilinear 4-vector (gx, gy, |gx|, |gy|) at one stack level, normalized to
/// unit length; vectors with norm below epsilon stay zero. Throws when the
/// coordinate leaves the image.
std::array<double, 4> sample_vector(const ConvolvedStack& stack, int level,
                                    PixelCoord at, double epsilon_norm);

/// Assembles center + three rings (N points each) into one vector: center
/// and innermost ring read level 0, the middle ring level 1, the outer ring
/// level 2. Returns nothing when any sample would leave the image; callers
/// count such rejections.
std::optional<SuldDescriptor> build_descriptor(const ConvolvedStack& stack,
                                               const SignificantPoint& point,
                                               const DescriptorConfig& cfg);

struct DescribeResult {
    std::vector<SuldDescriptor> descriptors;  // input point order, minus skips
    int skipped = 0;
};

/// Response maps and cascade are computed once per image (per effective Haar
/// size in scale-proportional mode) and sampled for every point.
DescribeResult describe_all(const Image& img, const std::vector<SignificantPoint>& points,
                            const DescriptorConfig& cfg);

/// Descriptor file header as stored on disk.
struct DescriptorFileHeader {
    std::uint32_t version = 1;
    std::uint32_t directions = 8;
    std::array<double, 3> radii{5.0, 10.0, 15.0};
    std::array<double, 3> sigmas{2.5, 5.0, 7.5};
    std::uint32_t haar_size = 4;
};

struct DescriptorFile {
    DescriptorFileHeader header;
    std::vector<SuldDescriptor> descriptors;
};

/// Binary little-endian format: magic "SULD", version, N, radii, sigmas, h,
/// record count; each record stores u, v, scale as 64-bit floats and the
/// vector as 32-bit floats.
void save_descriptors(const std::vector<SuldDescriptor>& descriptors,
                      const DescriptorConfig& cfg, const std::filesystem::path& path);
DescriptorFile load_descriptors(const std::filesystem::path& path);

}  // namespace rangeface
