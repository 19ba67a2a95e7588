#include "rangeface/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rangeface {

namespace {

// Fixed 53-bit recipe; std::uniform_real_distribution is implementation-defined.
double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

/// Box-Muller normal deviates over a fixed PRNG.
class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        // (0, 1] keeps the log finite
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_ = false;
};

double gauss2(double dx, double dy, double sigma) {
    return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

PointCloud synth_face(const SynthFaceOptions& opt, SynthFaceInfo* info) {
    for (int i = 0; i < 3; ++i)
        if (!(std::abs(opt.pose_deg[i]) <= 45.0))
            throw std::invalid_argument("synth_face: |pose angle| must be <= 45 degrees");
    if (!(opt.noise_sigma >= 0.0))
        throw std::invalid_argument("synth_face: noise_sigma must be >= 0");

    std::mt19937_64 geo(mix_seed(opt.geometry_seed, 0x67656f6d));

    const double a = uniform(geo, 55.0, 70.0);  // half-width
    const double b = uniform(geo, 70.0, 88.0);  // half-height
    const double c = uniform(geo, 34.0, 46.0);  // depth of the ellipsoid cap

    const double nose_x = uniform(geo, -2.5, 2.5);
    const double nose_y = uniform(geo, -0.22, -0.10) * b;
    const double nose_amp = uniform(geo, 12.0, 18.0);
    const double nose_sigma = uniform(geo, 7.5, 10.5);

    const double eye_x = uniform(geo, 0.30, 0.42) * a;
    const double eye_y = uniform(geo, 0.22, 0.34) * b;
    const double eye_amp = uniform(geo, 8.0, 14.0);
    const double eye_sigma = uniform(geo, 5.5, 8.5);

    const double mouth_y = uniform(geo, -0.55, -0.42) * b;
    const double mouth_amp = uniform(geo, 5.0, 9.0);
    const double mouth_sx = uniform(geo, 10.0, 14.0);
    const double mouth_sy = uniform(geo, 3.5, 5.5);

    const double brow_y = uniform(geo, 0.42, 0.55) * b;
    const double brow_amp = uniform(geo, 3.0, 7.0);
    const double brow_sx = uniform(geo, 14.0, 20.0);
    const double brow_sy = uniform(geo, 3.5, 5.5);

    const double chin_y = uniform(geo, -0.78, -0.66) * b;
    const double chin_amp = uniform(geo, 3.0, 7.0);
    const double chin_sigma = uniform(geo, 6.0, 10.0);

    const double cheek_x = uniform(geo, 0.42, 0.58) * a;
    const double cheek_y = uniform(geo, -0.28, -0.08) * b;
    const double cheek_amp = uniform(geo, 2.0, 6.0);
    const double cheek_sigma = uniform(geo, 7.0, 11.0);

    const double bridge_amp = uniform(geo, 2.0, 5.0);
    const double bridge_sx = uniform(geo, 3.0, 5.0);
    const double bridge_sy = uniform(geo, 8.0, 12.0);
    const double bridge_y = 0.5 * (nose_y + brow_y);

    // nose_amp >> c * (1 - sqrt(1 - (nose_y/b)^2)) and every other bump is at
    // least 5 units weaker than the nose even where two of them stack, so the
    // nose apex tops the bare ellipsoid and stays the global maximum
    auto ridge = [](double dx, double dy, double sx, double sy) {
        return std::exp(-(dx * dx) / (2.0 * sx * sx) - (dy * dy) / (2.0 * sy * sy));
    };
    auto surface = [&](double x, double y) {
        const double q = 1.0 - (x / a) * (x / a) - (y / b) * (y / b);
        double z = c * std::sqrt(std::max(q, 0.0));
        z += nose_amp * gauss2(x - nose_x, y - nose_y, nose_sigma);
        z -= eye_amp * (gauss2(x - eye_x, y - eye_y, eye_sigma) +
                        gauss2(x + eye_x, y - eye_y, eye_sigma));
        z += mouth_amp * ridge(x, y - mouth_y, mouth_sx, mouth_sy);
        z += brow_amp * ridge(x, y - brow_y, brow_sx, brow_sy);
        z += chin_amp * gauss2(x, y - chin_y, chin_sigma);
        z += cheek_amp * (gauss2(x - cheek_x, y - cheek_y, cheek_sigma) +
                          gauss2(x + cheek_x, y - cheek_y, cheek_sigma));
        z += bridge_amp * ridge(x - nose_x, y - bridge_y, bridge_sx, bridge_sy);
        return z;
    };

    const Mat3 rot = euler_deg_to_matrix(opt.pose_deg[0], opt.pose_deg[1], opt.pose_deg[2]);

    const double reach = 0.93;  // sampled fraction of each semi-axis
    const double spacing = 1.5;
    const int ny = static_cast<int>(std::floor(2.0 * reach * b / spacing));
    const int nx = static_cast<int>(std::floor(2.0 * reach * a / spacing));

    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(nx) * ny);
    std::size_t apex_index = 0;
    double apex_z = -std::numeric_limits<double>::infinity();
    for (int iy = 0; iy <= ny; ++iy) {
        const double y = -reach * b + iy * spacing;
        for (int ix = 0; ix <= nx; ++ix) {
            const double x = -reach * a + ix * spacing;
            // jitter breaks the exact lattice; drawn even for rejected samples
            // so the stream stays aligned
            const double jx = x + uniform(geo, -0.45, 0.45) * spacing;
            const double jy = y + uniform(geo, -0.45, 0.45) * spacing;
            if ((jx / a) * (jx / a) + (jy / b) * (jy / b) > reach * reach) continue;
            const double z = surface(jx, jy);
            if (z > apex_z) {
                apex_z = z;
                apex_index = cloud.points.size();
            }
            cloud.points.push_back(rot * Vec3(jx, jy, z));
        }
    }

    if (info) info->nose_apex = cloud.points[apex_index];

    if (opt.noise_sigma > 0.0) {
        GaussStream noise(mix_seed(opt.noise_seed, 0x6e6f6973));
        for (Vec3& p : cloud.points) p.z() += opt.noise_sigma * noise.next();
    }
    return cloud;
}

PointCloud synth_face(std::uint64_t seed, const Vec3& pose_deg, double noise_sigma) {
    SynthFaceOptions opt;
    opt.geometry_seed = seed;
    opt.noise_seed = seed;
    opt.pose_deg = pose_deg;
    opt.noise_sigma = noise_sigma;
    return synth_face(opt);
}

}  // namespace rangeface
