#include "rangeface/matching.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace rangeface {

void MatcherConfig::validate() const {
    if (!(ratio_threshold > 0.0) || !(ratio_threshold < 1.0))
        throw std::invalid_argument("matcher: ratio threshold must lie in (0, 1)");
}

namespace {

double dist_sq(const SuldDescriptor& a, const SuldDescriptor& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("matcher: descriptor lengths differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return acc;
}

/// index of the descriptor in `set` closest to q; first hit wins ties
int nearest_index(const SuldDescriptor& q, const std::vector<SuldDescriptor>& set) {
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < set.size(); ++j) {
        const double d = dist_sq(q, set[j]);
        if (d < best_sq) {
            best_sq = d;
            best = static_cast<int>(j);
        }
    }
    return best;
}

}  // namespace

std::vector<Match> match_descriptors(const std::vector<SuldDescriptor>& probe,
                                     const std::vector<SuldDescriptor>& gallery,
                                     const MatcherConfig& cfg) {
    cfg.validate();
    std::vector<Match> matches;
    if (probe.empty() || gallery.size() < 2) return matches;

    // nearest probe per gallery point, filled on demand for the cross-check
    std::vector<int> nearest_probe;
    if (cfg.mutual_consistency) {
        nearest_probe.resize(gallery.size(), -1);
    }

    for (std::size_t i = 0; i < probe.size(); ++i) {
        double best_sq = std::numeric_limits<double>::infinity();
        double second_sq = std::numeric_limits<double>::infinity();
        int best_j = -1;
        for (std::size_t j = 0; j < gallery.size(); ++j) {
            const double d = dist_sq(probe[i], gallery[j]);
            if (d < best_sq) {
                second_sq = best_sq;
                best_sq = d;
                best_j = static_cast<int>(j);
            } else if (d < second_sq) {
                second_sq = d;
            }
        }
        const double best = std::sqrt(best_sq);
        const double second = std::sqrt(second_sq);
        // a zero second-best means duplicates; 0 < t*0 is false, so the 0/0
        // pair drops out without a special case
        if (!(best < cfg.ratio_threshold * second)) continue;
        if (cfg.mutual_consistency) {
            int& back = nearest_probe[static_cast<std::size_t>(best_j)];
            if (back == -1) back = nearest_index(gallery[static_cast<std::size_t>(best_j)], probe);
            if (back != static_cast<int>(i)) continue;
        }
        matches.push_back({static_cast<int>(i), best_j, best, second});
    }
    return matches;
}

int similarity(const std::vector<SuldDescriptor>& probe,
               const std::vector<SuldDescriptor>& gallery, const MatcherConfig& cfg) {
    return static_cast<int>(match_descriptors(probe, gallery, cfg).size());
}

namespace {

RecognitionResult recognize_refs(const std::vector<SuldDescriptor>& probe,
                                 const std::vector<const GalleryEntry*>& gallery,
                                 const MatcherConfig& cfg) {
    if (gallery.empty()) throw std::invalid_argument("recognize: empty gallery");
    RecognitionResult result;
    result.ranked.reserve(gallery.size());
    for (const GalleryEntry* entry : gallery) {
        const std::vector<Match> matches = match_descriptors(probe, entry->descriptors, cfg);
        RankedEntry r;
        r.identity = entry->identity;
        r.similarity = static_cast<int>(matches.size());
        if (matches.empty()) {
            r.mean_best_dist = std::numeric_limits<double>::infinity();
        } else {
            double total = 0.0;
            for (const Match& m : matches) total += m.best_dist;
            r.mean_best_dist = total / static_cast<double>(matches.size());
        }
        result.ranked.push_back(std::move(r));
    }
    std::stable_sort(result.ranked.begin(), result.ranked.end(),
                     [](const RankedEntry& a, const RankedEntry& b) {
                         if (a.similarity != b.similarity) return a.similarity > b.similarity;
                         return a.mean_best_dist < b.mean_best_dist;
                     });
    result.rank1 = result.ranked.front().identity;
    result.zero_confidence = result.ranked.front().similarity == 0;
    return result;
}

}  // namespace

RecognitionResult recognize(const std::vector<SuldDescriptor>& probe,
                            const std::vector<GalleryEntry>& gallery,
                            const MatcherConfig& cfg) {
    std::vector<const GalleryEntry*> refs;
    refs.reserve(gallery.size());
    for (const GalleryEntry& g : gallery) refs.push_back(&g);
    return recognize_refs(probe, refs, cfg);
}

Protocol standard_protocol(const std::string& name) {
    std::string key;
    for (char c : name) key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));

    Protocol p;
    p.name = key;
    if (key == "T1") {
        p.train_scans = {1, 2, 3};
        p.test_scans = {4};
    } else if (key == "T2") {
        p.train_scans = {1, 2, 3, 4};
        p.test_scans = {11};
    } else if (key == "T3") {
        p.train_scans = {1, 2, 3, 4};
        p.test_scans = {12};
    } else if (key == "T4") {
        p.train_scans = {1, 2, 3, 4};
        p.test_scans = {15, 16};
    } else if (key == "T5") {
        p.train_scans = {1, 2, 3, 4};
        p.test_scans = {7, 8};
    } else if (key == "LOO") {
        p.kind = ProtocolKind::LeaveOneOut;
    } else if (key == "SANITY") {
        p.kind = ProtocolKind::Sanity;
    } else {
        throw std::invalid_argument("unknown protocol '" + name +
                                    "' (expected T1..T5, LOO or SANITY)");
    }
    return p;
}

std::vector<ImageDescriptors> compute_corpus_descriptors(const DatasetManifest& manifest,
                                                         const PipelineConfig& cfg) {
    cfg.preprocess.validate();
    cfg.descriptor.validate();
    if (manifest.entries.empty()) throw std::invalid_argument("empty manifest");

    // every subject registers onto its scan 1, so pull those clouds first
    std::map<std::string, PointCloud> references;
    for (const ManifestEntry& e : manifest.entries)
        if (e.scan_id == 1) references.emplace(e.subject_id, load_xyz(e.path));
    for (const ManifestEntry& e : manifest.entries)
        if (references.find(e.subject_id) == references.end())
            throw std::runtime_error("subject " + e.subject_id +
                                     " has no scan 1 to register against");

    std::vector<ImageDescriptors> corpus;
    corpus.reserve(manifest.entries.size());
    for (const ManifestEntry& e : manifest.entries) {
        const PointCloud& ref = references.at(e.subject_id);
        const bool is_reference = e.scan_id == 1;
        const PointCloud cloud = is_reference ? ref : load_xyz(e.path);
        const PreprocessResult pre =
            preprocess(cloud, is_reference ? nullptr : &ref, cfg.preprocess);

        const IntegralImage ii = integral_image(pre.image.depth);
        const std::vector<SignificantPoint> points =
            detect_significant_points(ii, cfg.detector);
        DescribeResult described = describe_all(pre.image.depth, points, cfg.descriptor);

        ImageDescriptors img;
        img.subject = e.subject_id;
        img.scan = e.scan_id;
        img.descriptors = std::move(described.descriptors);
        img.detected = static_cast<int>(points.size());
        img.skipped = described.skipped;
        corpus.push_back(std::move(img));
    }
    return corpus;
}

namespace {

struct CorpusIndex {
    std::vector<std::string> subjects;  // first-appearance order
    std::map<std::pair<std::string, int>, std::size_t> by_scan;
};

CorpusIndex index_corpus(const std::vector<ImageDescriptors>& corpus) {
    CorpusIndex idx;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const ImageDescriptors& img = corpus[i];
        if (!idx.by_scan.emplace(std::make_pair(img.subject, img.scan), i).second)
            throw std::invalid_argument("duplicate scan " + std::to_string(img.scan) +
                                        " for subject " + img.subject);
        if (std::find(idx.subjects.begin(), idx.subjects.end(), img.subject) ==
            idx.subjects.end())
            idx.subjects.push_back(img.subject);
    }
    return idx;
}

std::size_t require_scan(const CorpusIndex& idx, const Protocol& protocol,
                         const std::string& subject, int scan) {
    auto it = idx.by_scan.find({subject, scan});
    if (it == idx.by_scan.end())
        throw std::runtime_error("protocol " + protocol.name + ": subject " + subject +
                                 " is missing scan " + std::to_string(scan));
    return it->second;
}

}  // namespace

ProtocolReport evaluate_descriptors(const std::vector<ImageDescriptors>& corpus,
                                    const Protocol& protocol, const MatcherConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("evaluate: empty corpus");
    const CorpusIndex idx = index_corpus(corpus);

    ProtocolReport report;
    report.protocol = protocol.name;
    report.subjects = static_cast<int>(idx.subjects.size());
    long detected_total = 0;
    for (const ImageDescriptors& img : corpus) {
        detected_total += img.detected;
        report.skipped_descriptors += img.skipped;
    }
    report.mean_points_per_image =
        static_cast<double>(detected_total) / static_cast<double>(corpus.size());

    std::vector<std::pair<const ImageDescriptors*, const GalleryEntry*>> probes;
    if (protocol.kind == ProtocolKind::TrainTest) {
        if (protocol.train_scans.empty() || protocol.test_scans.empty())
            throw std::invalid_argument("protocol " + protocol.name +
                                        ": train and test scan sets must be non-empty");
        for (int s : protocol.train_scans)
            if (std::find(protocol.test_scans.begin(), protocol.test_scans.end(), s) !=
                protocol.test_scans.end())
                throw std::invalid_argument("protocol " + protocol.name +
                                            ": train and test scans overlap");

        std::vector<GalleryEntry> gallery;
        gallery.reserve(idx.subjects.size());
        for (const std::string& subject : idx.subjects) {
            GalleryEntry entry;
            entry.identity = subject;
            for (int s : protocol.train_scans) {
                const ImageDescriptors& img = corpus[require_scan(idx, protocol, subject, s)];
                entry.descriptors.insert(entry.descriptors.end(), img.descriptors.begin(),
                                         img.descriptors.end());
            }
            gallery.push_back(std::move(entry));
        }
        std::vector<const GalleryEntry*> refs;
        for (const GalleryEntry& g : gallery) refs.push_back(&g);

        for (const std::string& subject : idx.subjects)
            for (int s : protocol.test_scans) {
                const ImageDescriptors& img = corpus[require_scan(idx, protocol, subject, s)];
                ++report.probes;
                if (recognize_refs(img.descriptors, refs, cfg).rank1 == subject)
                    ++report.correct;
            }
    } else {
        // leave-one-out and sanity share per-scan gallery entries; sanity
        // keeps the probe's own entry in the gallery
        std::vector<GalleryEntry> entries;
        entries.reserve(corpus.size());
        for (const ImageDescriptors& img : corpus)
            entries.push_back({img.subject, img.descriptors});

        for (std::size_t p = 0; p < corpus.size(); ++p) {
            std::vector<const GalleryEntry*> refs;
            refs.reserve(entries.size());
            for (std::size_t g = 0; g < entries.size(); ++g) {
                if (protocol.kind == ProtocolKind::LeaveOneOut && g == p) continue;
                refs.push_back(&entries[g]);
            }
            ++report.probes;
            if (recognize_refs(corpus[p].descriptors, refs, cfg).rank1 == corpus[p].subject)
                ++report.correct;
        }
    }

    report.accuracy =
        report.probes == 0
            ? 0.0
            : 100.0 * static_cast<double>(report.correct) / static_cast<double>(report.probes);
    return report;
}

ProtocolReport evaluate(const DatasetManifest& manifest, const Protocol& protocol,
                        const PipelineConfig& cfg) {
    return evaluate_descriptors(compute_corpus_descriptors(manifest, cfg), protocol,
                                cfg.matcher);
}

std::string format_report_text(const std::vector<ProtocolReport>& reports) {
    std::string out =
        "protocol subjects probes correct accuracy mean_points_per_image "
        "skipped_descriptors\n";
    char line[256];
    for (const ProtocolReport& r : reports) {
        std::snprintf(line, sizeof line, "%s %d %d %d %.2f %.2f %ld\n", r.protocol.c_str(),
                      r.subjects, r.probes, r.correct, r.accuracy, r.mean_points_per_image,
                      r.skipped_descriptors);
        out += line;
    }
    return out;
}

std::string format_report_json(const std::vector<ProtocolReport>& reports) {
    auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
    nlohmann::json arr = nlohmann::json::array();
    for (const ProtocolReport& r : reports) {
        arr.push_back({{"protocol", r.protocol},
                       {"subjects", r.subjects},
                       {"probes", r.probes},
                       {"correct", r.correct},
                       {"accuracy", round2(r.accuracy)},
                       {"mean_points_per_image", round2(r.mean_points_per_image)},
                       {"skipped_descriptors", r.skipped_descriptors}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace rangeface
