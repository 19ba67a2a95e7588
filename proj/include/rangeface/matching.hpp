#pragma once

#include <string>
#include <vector>

#include "rangeface/cloud_io.hpp"
#include "rangeface/detector.hpp"
#include "rangeface/range_image.hpp"
#include "rangeface/suld.hpp"

namespace rangeface {

struct MatcherConfig {
    double ratio_threshold = 0.8;  // best/second-best distance cutoff
    // when set, a match also requires the gallery point's nearest probe to
    // be the probe point itself
    bool mutual_consistency = false;

    void validate() const;
};

struct Match {
    int probe_index = 0;
    int gallery_index = 0;
    double best_dist = 0.0;
    double second_dist = 0.0;  // >= best_dist
};

/// One-way nearest-neighbour ratio test, probe against gallery. A probe
/// point matches iff best < threshold * second-best; ties at distance zero
/// on both neighbours never match. Galleries with fewer than two entries
/// yield no matches (no second neighbour exists).
std::vector<Match> match_descriptors(const std::vector<SuldDescriptor>& probe,
                                     const std::vector<SuldDescriptor>& gallery,
                                     const MatcherConfig& cfg = {});

/// Number of ratio-test matches.
int similarity(const std::vector<SuldDescriptor>& probe,
               const std::vector<SuldDescriptor>& gallery, const MatcherConfig& cfg = {});

struct GalleryEntry {
    std::string identity;
    std::vector<SuldDescriptor> descriptors;
};

struct RankedEntry {
    std::string identity;
    int similarity = 0;
    double mean_best_dist = 0.0;  // infinity when nothing matched
};

struct RecognitionResult {
    std::vector<RankedEntry> ranked;  // similarity non-increasing
    std::string rank1;
    bool zero_confidence = false;  // no gallery entry matched anything
};

/// Ranks gallery entries by match count; equal counts break on the smaller
/// mean matched distance, then on gallery order.
RecognitionResult recognize(const std::vector<SuldDescriptor>& probe,
                            const std::vector<GalleryEntry>& gallery,
                            const MatcherConfig& cfg = {});

enum class ProtocolKind {
    TrainTest,    // per-subject gallery from train scans, probes from test scans
    LeaveOneOut,  // every scan probes against all remaining scans
    Sanity,       // every scan probes a gallery that still contains it
};

struct Protocol {
    std::string name;
    ProtocolKind kind = ProtocolKind::TrainTest;
    std::vector<int> train_scans;
    std::vector<int> test_scans;
};

/// Named presets: T1 (train 1-3, test 4), T2 (train 1-4, test 11), T3 (test
/// 12), T4 (test 15,16), T5 (test 7,8), LOO, SANITY. Case-insensitive;
/// throws on anything else.
Protocol standard_protocol(const std::string& name);

struct PipelineConfig {
    PreprocessConfig preprocess;
    DetectorConfig detector;
    DescriptorConfig descriptor;
    MatcherConfig matcher;
};

/// Descriptors of one preprocessed scan plus detection bookkeeping.
struct ImageDescriptors {
    std::string subject;
    int scan = 0;
    std::vector<SuldDescriptor> descriptors;
    int detected = 0;  // significant points before border rejection
    int skipped = 0;   // points whose descriptor left the image
};

/// Runs register + rasterize + detect + describe for every manifest entry.
/// Scans register onto their subject's scan 1, which itself passes through
/// unregistered. Entry order follows the manifest.
std::vector<ImageDescriptors> compute_corpus_descriptors(const DatasetManifest& manifest,
                                                         const PipelineConfig& cfg);

struct ProtocolReport {
    std::string protocol;
    int subjects = 0;
    int probes = 0;
    int correct = 0;
    double accuracy = 0.0;  // percent
    double mean_points_per_image = 0.0;
    long skipped_descriptors = 0;
};

/// Scores one protocol over precomputed per-scan descriptors. Throws when a
/// scan the protocol needs is missing, naming subject and scan.
ProtocolReport evaluate_descriptors(const std::vector<ImageDescriptors>& corpus,
                                    const Protocol& protocol, const MatcherConfig& cfg);

/// Full pipeline: compute_corpus_descriptors then evaluate_descriptors.
ProtocolReport evaluate(const DatasetManifest& manifest, const Protocol& protocol,
                        const PipelineConfig& cfg);

/// One aligned row per report; accuracies and means carry two decimals.
std::string format_report_text(const std::vector<ProtocolReport>& reports);
/// JSON array of per-protocol records, numeric values rounded the same way.
std::string format_report_json(const std::vector<ProtocolReport>& reports);

}  // namespace rangeface
