#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rangeface/point_cloud.hpp"

namespace rangeface {

/// Capture poses of the 16-scan acquisition protocol.
enum class PoseTag {
    Frontal,
    TurnYRight,
    TurnYLeft,
    TurnZSevere,
    TurnZSmall,
    Smile,
    OpenMouth,
    LookUp,
    LookDown,
    FrontalIllum,
};

const char* to_string(PoseTag tag);
PoseTag pose_tag_from_string(const std::string& s);  // throws on unknown tag

/// Pose of scan_id under the standard 1..16 numbering.
PoseTag default_pose_tag_for_scan(int scan_id);

struct ManifestEntry {
    std::string subject_id;
    int scan_id = 0;  // 1..16
    PoseTag pose_tag = PoseTag::Frontal;
    std::filesystem::path path;  // resolved against the manifest directory on load
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

/// One "x y z" line per point; '#' starts a comment, blank lines are skipped.
PointCloud load_xyz(const std::filesystem::path& path);

/// Writes coordinates in shortest round-trip decimal form.
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);

/// Tab-separated: subject_id, scan_id, pose_tag, path. Verifies that
/// (subject, scan) pairs are unique and every referenced file exists.
DatasetManifest load_manifest(const std::filesystem::path& path);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace rangeface
