#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "rangeface/run_config.hpp"

namespace rangeface {

/// Batch entry points behind the CLI. Each returns a process exit status
/// (0 = success) and throws on hard errors; the caller turns exceptions
/// into a nonzero exit. All file writes go through a temp-then-rename step
/// so interrupted runs never leave half-written outputs.

/// Generates subjects x scans_per XYZ clouds plus manifest.tsv. Scan poses
/// follow the 16-scan numbering convention with per-axis jitter up to
/// pose_jitter_deg; everything derives from cfg.seed.
int cmd_synth(const std::filesystem::path& out_dir, int subjects, int scans_per,
              double pose_jitter_deg, double noise_sigma, const RunConfig& cfg,
              std::ostream& log);

/// Registers every scan onto its subject's scan 1 and writes one range
/// image (PGM + sidecar) per scan, plus images.tsv describing the outputs.
int cmd_preprocess(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& out_dir, const RunConfig& cfg,
                   std::ostream& log);

/// Detects significant points and writes one descriptor file per range
/// image, plus descriptors.tsv with per-image point counts.
int cmd_describe(const std::filesystem::path& image_dir,
                 const std::filesystem::path& out_dir, const RunConfig& cfg,
                 std::ostream& log);

/// Prints the ratio-test match count between two descriptor files.
int cmd_match(const std::filesystem::path& probe_file,
              const std::filesystem::path& gallery_file, const RunConfig& cfg,
              std::ostream& log);

/// Scores the named protocols over staged descriptors; writes report.txt
/// and report.json into report_dir and prints the text form. Low accuracy
/// is a result, not an error.
int cmd_evaluate(const std::filesystem::path& desc_dir,
                 const std::filesystem::path& manifest_path,
                 const std::vector<std::string>& protocols,
                 const std::filesystem::path& report_dir, const RunConfig& cfg,
                 std::ostream& log);

}  // namespace rangeface
