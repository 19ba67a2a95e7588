#pragma once

#include <filesystem>

#include "rangeface/range_image.hpp"

namespace rangeface {

/// Depth goes to a 16-bit big-endian PGM (0..65535 over the 0..255 depth
/// scale); grid geometry and the validity mask go to a text sidecar next to
/// it (same name, .meta extension).
void save_range_image(const RangeImage& img, const std::filesystem::path& pgm_path);

RangeImage load_range_image(const std::filesystem::path& pgm_path);

std::filesystem::path range_image_sidecar_path(const std::filesystem::path& pgm_path);

}  // namespace rangeface
