#pragma once

#include <optional>
#include <vector>

#include "rangeface/geometry.hpp"
#include "rangeface/point_cloud.hpp"

namespace rangeface {

struct IcpParams {
    int max_iterations = 50;
    // stop once the RMS improves by less than this; default 1e-6 x target
    // bounding-box diagonal
    std::optional<double> convergence_eps;
    // pairs farther apart than this are dropped from the fit; unbounded when
    // unset (the default keeps the per-iteration RMS monotone)
    std::optional<double> max_correspondence_dist;
};

struct IcpResult {
    RigidTransform transform;  // maps source points onto the target
    double final_rms = 0.0;    // nearest-neighbour RMS of the transformed source
    int iterations = 0;
    std::vector<double> rms_history;  // one value per iteration, non-increasing
};

/// Point-to-point alignment: nearest-neighbour correspondences, closed-form
/// rigid fit each round, identity start. Throws if the source points are
/// coincident or collinear.
IcpResult icp_align(const PointCloud& source, const PointCloud& target,
                    const IcpParams& params = {});

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

}  // namespace rangeface
