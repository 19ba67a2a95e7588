#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "rangeface/image.hpp"

namespace testutil {

/// Self-deleting scratch directory under the system temp root.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        const auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(i));
            if (std::filesystem::create_directory(path_)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64{seed}; }

/// Random integer-valued image; integers keep double arithmetic exact, which
/// the bit-equality oracles rely on.
inline rangeface::Image random_int_image(std::mt19937_64& rng, int w, int h, int lo = 0,
                                         int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    rangeface::Image img(w, h, 0.0);
    for (double& v : img.data) v = dist(rng);
    return img;
}

inline rangeface::Image random_real_image(std::mt19937_64& rng, int w, int h, double lo = 0.0,
                                          double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    rangeface::Image img(w, h, 0.0);
    for (double& v : img.data) v = dist(rng);
    return img;
}

inline double max_abs(const rangeface::Image& img) {
    double m = 0.0;
    for (double v : img.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace testutil
