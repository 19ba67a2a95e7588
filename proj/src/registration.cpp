#include "rangeface/registration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "rangeface/kdtree.hpp"

namespace rangeface {

namespace {

void check_source_rank(const PointCloud& cloud) {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : cloud.points) mean += p;
    mean /= static_cast<double>(cloud.size());
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : cloud.points) {
        const Vec3 d = p - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const auto& ev = es.eigenvalues();  // ascending
    if (ev[2] <= 0.0 || ev[1] <= ev[2] * 1e-12)
        throw std::runtime_error("icp_align: source points are coincident or collinear");
}

/// Least-squares rigid fit of src onto dst (closed form via SVD of the
/// cross-covariance, with the reflection case corrected).
RigidTransform fit_rigid(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
    const double n = static_cast<double>(src.size());
    Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        mu_s += src[i];
        mu_d += dst[i];
    }
    mu_s /= n;
    mu_d /= n;
    Mat3 h = Mat3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        h += (src[i] - mu_s) * (dst[i] - mu_d).transpose();
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    RigidTransform t;
    t.rotation = v * d * u.transpose();
    t.translation = mu_d - t.rotation * mu_s;
    return t;
}

}  // namespace

IcpResult icp_align(const PointCloud& source, const PointCloud& target,
                    const IcpParams& params) {
    if (source.empty() || target.empty())
        throw std::invalid_argument("icp_align: empty cloud");
    if (params.max_iterations < 1)
        throw std::invalid_argument("icp_align: max_iterations must be >= 1");
    if (params.convergence_eps && *params.convergence_eps < 0.0)
        throw std::invalid_argument("icp_align: convergence_eps must be >= 0");
    check_source_rank(source);

    const double diag = bounding_box(target).diagonal();
    const double eps = params.convergence_eps.value_or(1e-6 * diag);
    const double max_corr_sq =
        params.max_correspondence_dist
            ? *params.max_correspondence_dist * *params.max_correspondence_dist
            : std::numeric_limits<double>::infinity();

    KdTree3 tree(target.points);

    // one nearest-neighbour pass: fills the correspondence set under the
    // current transform and reports the RMS of those distances
    std::vector<Vec3> corr_src, corr_dst;
    corr_src.reserve(source.size());
    corr_dst.reserve(source.size());
    auto correspond = [&](const RigidTransform& t) -> double {
        corr_src.clear();
        corr_dst.clear();
        double sum_sq = 0.0;
        for (const Vec3& p : source.points) {
            const Vec3 q = t.apply(p);
            const KdTree3::Hit hit = tree.nearest(q);
            sum_sq += hit.dist_sq;
            if (hit.dist_sq <= max_corr_sq) {
                corr_src.push_back(p);
                corr_dst.push_back(target.points[hit.index]);
            }
        }
        return std::sqrt(sum_sq / static_cast<double>(source.size()));
    };

    IcpResult res;
    double prev_rms = correspond(res.transform);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        if (corr_src.size() < 3)
            throw std::runtime_error("icp_align: too few correspondences");
        res.transform = fit_rigid(corr_src, corr_dst);
        const double rms = correspond(res.transform);
        res.rms_history.push_back(rms);
        res.iterations = iter + 1;
        if (prev_rms - rms < eps) break;
        prev_rms = rms;
    }
    res.final_rms = res.rms_history.back();
    return res;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
    if (!t.is_valid(1e-9))
        throw std::invalid_argument("apply_transform: rotation is not orthonormal");
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
    return out;
}

}  // namespace rangeface
