#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rangeface/geometry.hpp"

namespace rangeface {

/// Unordered 3D samples from a scanner. +z points toward the scanner, so the
/// nearest surface has the largest z.
struct PointCloud {
    std::vector<Vec3> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

struct Bounds3 {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Zero();
    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return extent().norm(); }
};

inline Bounds3 bounding_box(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("bounding_box: empty cloud");
    Bounds3 b{cloud.points.front(), cloud.points.front()};
    for (const Vec3& p : cloud.points) {
        b.lo = b.lo.cwiseMin(p);
        b.hi = b.hi.cwiseMax(p);
    }
    return b;
}

}  // namespace rangeface
