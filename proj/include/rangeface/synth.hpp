#pragma once

#include <cstdint>

#include "rangeface/point_cloud.hpp"

namespace rangeface {

struct SynthFaceOptions {
    std::uint64_t geometry_seed = 0;  // face shape and sampling lattice
    std::uint64_t noise_seed = 0;     // measurement noise stream
    Vec3 pose_deg = Vec3::Zero();     // rotations about x, y, z in degrees, each in [-45, 45]
    double noise_sigma = 0.0;         // stddev of additive z noise, scanner units
};

struct SynthFaceInfo {
    Vec3 nose_apex = Vec3::Zero();  // posed position of the highest pre-noise sample
};

/// Deterministic face-like surface: an ellipsoid cap with a protruding nose
/// bump (the global z maximum when frontal), eye sockets and a mouth ridge,
/// sampled on a jittered lattice, rotated by pose_deg, then disturbed by
/// Gaussian z noise. Same options, same cloud.
PointCloud synth_face(const SynthFaceOptions& opt, SynthFaceInfo* info = nullptr);

/// Single-seed form; the seed drives both geometry and noise.
PointCloud synth_face(std::uint64_t seed, const Vec3& pose_deg, double noise_sigma);

/// Stable seed derivation for per-subject / per-scan streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace rangeface
