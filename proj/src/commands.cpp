#include "rangeface/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "rangeface/cloud_io.hpp"
#include "rangeface/matching.hpp"
#include "rangeface/range_image_io.hpp"
#include "rangeface/synth.hpp"

namespace fs = std::filesystem;

namespace rangeface {

namespace {

/// Runs fn(0..count-1) over `jobs` threads. Work is claimed through a
/// shared counter; the first failure (by item index) is rethrown after all
/// threads finish, so error reporting is deterministic.
void run_items(int jobs, std::size_t count,
               const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    std::vector<std::exception_ptr> errors(count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    threads.reserve(n);
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

/// write-temp-then-rename; the writer receives the temporary path
void atomic_write(const fs::path& target, const std::function<void(const fs::path&)>& writer) {
    fs::path tmp = target;
    tmp += ".tmp";
    writer(tmp);
    fs::rename(tmp, target);
}

void write_text_atomic(const fs::path& target, const std::string& text) {
    atomic_write(target, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("write error on " + tmp.string());
    });
}

std::string scan_stem(const std::string& subject, int scan) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%02d", scan);
    return subject + buf;
}

// uniform double in [0, 1) from the top 53 bits, stable across platforms
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec3 base_pose_for(PoseTag tag) {
    switch (tag) {
        case PoseTag::TurnYRight: return {0.0, 25.0, 0.0};
        case PoseTag::TurnYLeft: return {0.0, -25.0, 0.0};
        case PoseTag::TurnZSevere: return {0.0, 0.0, 30.0};
        case PoseTag::TurnZSmall: return {0.0, 0.0, 15.0};
        case PoseTag::LookUp: return {-20.0, 0.0, 0.0};
        case PoseTag::LookDown: return {20.0, 0.0, 0.0};
        case PoseTag::Frontal:
        case PoseTag::Smile:
        case PoseTag::OpenMouth:
        case PoseTag::FrontalIllum: return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

int parse_int_field(const std::string& s, const std::string& where) {
    int v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error(where + ": expected an integer, got '" + s + "'");
    return v;
}

struct StagedImage {
    std::string subject;
    int scan = 0;
    PoseTag pose = PoseTag::Frontal;
    std::string file;  // relative to the listing's directory
};

constexpr const char* kImagesListing = "images.tsv";
constexpr const char* kDescriptorsListing = "descriptors.tsv";

void write_images_listing(const fs::path& dir, const std::vector<StagedImage>& images) {
    std::string text;
    for (const StagedImage& img : images) {
        text += img.subject;
        text += '\t';
        text += std::to_string(img.scan);
        text += '\t';
        text += to_string(img.pose);
        text += '\t';
        text += img.file;
        text += '\n';
    }
    write_text_atomic(dir / kImagesListing, text);
}

std::vector<StagedImage> read_images_listing(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<StagedImage> images;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_tabs(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 4) throw std::runtime_error(where + ": expected 4 tab-separated fields");
        StagedImage img;
        img.subject = f[0];
        img.scan = parse_int_field(f[1], where);
        img.pose = pose_tag_from_string(f[2]);
        img.file = f[3];
        images.push_back(std::move(img));
    }
    return images;
}

struct StagedDescriptors {
    std::string subject;
    int scan = 0;
    std::string file;
    int detected = 0;
    int described = 0;
    int skipped = 0;
};

void write_descriptors_listing(const fs::path& dir,
                               const std::vector<StagedDescriptors>& rows) {
    std::string text;
    for (const StagedDescriptors& r : rows) {
        text += r.subject;
        text += '\t';
        text += std::to_string(r.scan);
        text += '\t';
        text += r.file;
        text += '\t';
        text += std::to_string(r.detected);
        text += '\t';
        text += std::to_string(r.described);
        text += '\t';
        text += std::to_string(r.skipped);
        text += '\n';
    }
    write_text_atomic(dir / kDescriptorsListing, text);
}

std::vector<StagedDescriptors> read_descriptors_listing(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string() +
                                 " (run the describe step first)");
    std::vector<StagedDescriptors> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_tabs(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 6) throw std::runtime_error(where + ": expected 6 tab-separated fields");
        StagedDescriptors r;
        r.subject = f[0];
        r.scan = parse_int_field(f[1], where);
        r.file = f[2];
        r.detected = parse_int_field(f[3], where);
        r.described = parse_int_field(f[4], where);
        r.skipped = parse_int_field(f[5], where);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

int cmd_synth(const fs::path& out_dir, int subjects, int scans_per,
              double pose_jitter_deg, double noise_sigma, const RunConfig& cfg,
              std::ostream& log) {
    if (subjects < 1) throw std::invalid_argument("synth: subjects must be >= 1");
    if (scans_per < 1 || scans_per > 16)
        throw std::invalid_argument("synth: scans per subject must lie in 1..16");
    if (pose_jitter_deg < 0.0 || noise_sigma < 0.0)
        throw std::invalid_argument("synth: jitter and noise must be >= 0");
    fs::create_directories(out_dir);

    const int width = subjects >= 100 ? 3 : 2;
    std::vector<ManifestEntry> entries(static_cast<std::size_t>(subjects) *
                                       static_cast<std::size_t>(scans_per));
    std::vector<std::string> lines(entries.size());

    run_items(cfg.jobs, entries.size(), [&](std::size_t item) {
        const int si = static_cast<int>(item) / scans_per + 1;
        const int scan = static_cast<int>(item) % scans_per + 1;
        char name[32];
        std::snprintf(name, sizeof name, "s%0*d", width, si);

        const PoseTag tag = default_pose_tag_for_scan(scan);
        // one stream per (subject, scan) so any scan regenerates alone
        const std::uint64_t scan_salt = (static_cast<std::uint64_t>(si) << 20) |
                                        static_cast<std::uint64_t>(scan);
        std::mt19937_64 pose_rng(mix_seed(cfg.seed, scan_salt ^ 0x706f7365ull));
        SynthFaceOptions opt;
        opt.geometry_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(si));
        opt.noise_seed = mix_seed(cfg.seed, scan_salt);
        opt.noise_sigma = noise_sigma;
        opt.pose_deg = base_pose_for(tag);
        for (int axis = 0; axis < 3; ++axis)
            opt.pose_deg[axis] += (2.0 * unit_uniform(pose_rng) - 1.0) * pose_jitter_deg;

        const PointCloud cloud = synth_face(opt);
        const std::string file = scan_stem(name, scan) + ".xyz";
        atomic_write(out_dir / file,
                     [&](const fs::path& tmp) { save_xyz(cloud, tmp); });

        ManifestEntry e;
        e.subject_id = name;
        e.scan_id = scan;
        e.pose_tag = tag;
        e.path = file;
        entries[item] = std::move(e);
        lines[item] = file + ": " + std::to_string(cloud.points.size()) + " points";
    });

    if (cfg.verbose)
        for (const std::string& line : lines) log << line << "\n";

    DatasetManifest manifest;
    manifest.entries = std::move(entries);
    atomic_write(out_dir / "manifest.tsv",
                 [&](const fs::path& tmp) { save_manifest(manifest, tmp); });
    log << "synthesized " << subjects << " subjects x " << scans_per << " scans in "
        << out_dir.string() << "\n";
    return 0;
}

int cmd_preprocess(const fs::path& manifest_path, const fs::path& out_dir,
                   const RunConfig& cfg, std::ostream& log) {
    const DatasetManifest manifest = load_manifest(manifest_path);
    fs::create_directories(out_dir);

    // registration references: every subject must provide scan 1
    std::map<std::string, PointCloud> references;
    for (const ManifestEntry& e : manifest.entries)
        if (e.scan_id == 1) references.emplace(e.subject_id, load_xyz(e.path));
    for (const ManifestEntry& e : manifest.entries)
        if (references.find(e.subject_id) == references.end())
            throw std::runtime_error("subject " + e.subject_id +
                                     " has no scan 1 (registration reference)");

    std::vector<StagedImage> images(manifest.entries.size());
    std::vector<std::string> lines(manifest.entries.size());

    run_items(cfg.jobs, manifest.entries.size(), [&](std::size_t item) {
        const ManifestEntry& e = manifest.entries[item];
        const std::string stem = scan_stem(e.subject_id, e.scan_id);
        try {
            const PointCloud& ref = references.at(e.subject_id);
            const bool is_reference = e.scan_id == 1;
            const PointCloud cloud = is_reference ? ref : load_xyz(e.path);
            const PreprocessResult pre =
                preprocess(cloud, is_reference ? nullptr : &ref, cfg.pipeline.preprocess);

            const std::string file = stem + ".pgm";
            // the sidecar rename follows the pgm rename; both paths derive
            // from the same temp stem
            atomic_write(out_dir / file, [&](const fs::path& tmp) {
                save_range_image(pre.image, tmp);
                fs::rename(range_image_sidecar_path(tmp),
                           range_image_sidecar_path(out_dir / file));
            });

            images[item] = {e.subject_id, e.scan_id, e.pose_tag, file};
            char buf[160];
            if (pre.registered)
                std::snprintf(buf, sizeof buf,
                              "%s: registered iters=%d rms=%.6f nose=(%.2f, %.2f)",
                              stem.c_str(), pre.icp_iterations, pre.icp_rms,
                              pre.nose_tip.u, pre.nose_tip.v);
            else
                std::snprintf(buf, sizeof buf, "%s: reference nose=(%.2f, %.2f)",
                              stem.c_str(), pre.nose_tip.u, pre.nose_tip.v);
            lines[item] = buf;
        } catch (const std::exception& ex) {
            throw std::runtime_error("scan " + stem + ": " + ex.what());
        }
    });

    for (const std::string& line : lines) log << line << "\n";
    write_images_listing(out_dir, images);
    log << "preprocessed " << images.size() << " scans into " << out_dir.string() << "\n";
    return 0;
}

int cmd_describe(const fs::path& image_dir, const fs::path& out_dir, const RunConfig& cfg,
                 std::ostream& log) {
    std::vector<StagedImage> images;
    if (fs::exists(image_dir / kImagesListing)) {
        images = read_images_listing(image_dir / kImagesListing);
    } else {
        // fall back to directory contents; stems look like subject_NN
        std::vector<fs::path> pgms;
        if (fs::exists(image_dir))
            for (const fs::directory_entry& e : fs::directory_iterator(image_dir))
                if (e.path().extension() == ".pgm") pgms.push_back(e.path());
        std::sort(pgms.begin(), pgms.end());
        for (const fs::path& p : pgms) {
            const std::string stem = p.stem().string();
            const std::size_t us = stem.rfind('_');
            if (us == std::string::npos || us == 0 || us + 1 >= stem.size())
                throw std::runtime_error(p.string() +
                                         ": cannot infer subject and scan from the name");
            StagedImage img;
            img.subject = stem.substr(0, us);
            img.scan = parse_int_field(stem.substr(us + 1), p.string());
            img.pose = default_pose_tag_for_scan(img.scan);
            img.file = p.filename().string();
            images.push_back(std::move(img));
        }
    }

    fs::create_directories(out_dir);
    if (images.empty()) {
        log << "warning: no range images found in " << image_dir.string() << "\n";
        write_descriptors_listing(out_dir, {});
        return 0;
    }

    std::vector<StagedDescriptors> rows(images.size());
    std::vector<std::string> lines(images.size());

    run_items(cfg.jobs, images.size(), [&](std::size_t item) {
        const StagedImage& img = images[item];
        const std::string stem = scan_stem(img.subject, img.scan);
        try {
            const RangeImage ri = load_range_image(image_dir / img.file);
            const std::vector<SignificantPoint> points =
                detect_significant_points(integral_image(ri.depth), cfg.pipeline.detector);
            const DescribeResult described =
                describe_all(ri.depth, points, cfg.pipeline.descriptor);

            const std::string file = stem + ".suld";
            atomic_write(out_dir / file, [&](const fs::path& tmp) {
                save_descriptors(described.descriptors, cfg.pipeline.descriptor, tmp);
            });

            rows[item] = {img.subject,
                          img.scan,
                          file,
                          static_cast<int>(points.size()),
                          static_cast<int>(described.descriptors.size()),
                          described.skipped};
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s: points=%d described=%d skipped=%d",
                          stem.c_str(), rows[item].detected, rows[item].described,
                          rows[item].skipped);
            lines[item] = buf;
        } catch (const std::exception& ex) {
            throw std::runtime_error("image " + stem + ": " + ex.what());
        }
    });

    for (const std::string& line : lines) log << line << "\n";
    write_descriptors_listing(out_dir, rows);
    log << "described " << rows.size() << " images into " << out_dir.string() << "\n";
    return 0;
}

int cmd_match(const fs::path& probe_file, const fs::path& gallery_file, const RunConfig& cfg,
              std::ostream& log) {
    const DescriptorFile probe = load_descriptors(probe_file);
    const DescriptorFile gallery = load_descriptors(gallery_file);
    const std::vector<Match> matches =
        match_descriptors(probe.descriptors, gallery.descriptors, cfg.pipeline.matcher);
    if (cfg.verbose)
        for (const Match& m : matches) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%d -> %d best=%.6f second=%.6f", m.probe_index,
                          m.gallery_index, m.best_dist, m.second_dist);
            log << buf << "\n";
        }
    log << matches.size() << "\n";
    return 0;
}

int cmd_evaluate(const fs::path& desc_dir, const fs::path& manifest_path,
                 const std::vector<std::string>& protocols, const fs::path& report_dir,
                 const RunConfig& cfg, std::ostream& log) {
    if (protocols.empty()) throw std::invalid_argument("evaluate: no protocol named");
    const DatasetManifest manifest = load_manifest(manifest_path);
    const std::vector<StagedDescriptors> rows =
        read_descriptors_listing(desc_dir / kDescriptorsListing);

    std::map<std::pair<std::string, int>, const StagedDescriptors*> staged;
    for (const StagedDescriptors& r : rows) staged[{r.subject, r.scan}] = &r;

    // descriptor files load once and are shared across protocols
    std::map<std::pair<std::string, int>, ImageDescriptors> loaded;
    auto corpus_image = [&](const std::string& subject, int scan,
                            const std::string& protocol) -> const ImageDescriptors& {
        const auto key = std::make_pair(subject, scan);
        auto it = loaded.find(key);
        if (it != loaded.end()) return it->second;
        auto row = staged.find(key);
        if (row == staged.end())
            throw std::runtime_error("protocol " + protocol + ": no descriptors for subject " +
                                     subject + " scan " + std::to_string(scan));
        ImageDescriptors img;
        img.subject = subject;
        img.scan = scan;
        img.descriptors = load_descriptors(desc_dir / row->second->file).descriptors;
        img.detected = row->second->detected;
        img.skipped = row->second->skipped;
        return loaded.emplace(key, std::move(img)).first->second;
    };

    std::vector<ProtocolReport> reports;
    for (const std::string& name : protocols) {
        const Protocol protocol = standard_protocol(name);

        // the scans this protocol touches; LOO and sanity take the whole
        // manifest
        std::vector<ImageDescriptors> corpus;
        for (const ManifestEntry& e : manifest.entries) {
            bool wanted = true;
            if (protocol.kind == ProtocolKind::TrainTest) {
                wanted = std::find(protocol.train_scans.begin(), protocol.train_scans.end(),
                                   e.scan_id) != protocol.train_scans.end() ||
                         std::find(protocol.test_scans.begin(), protocol.test_scans.end(),
                                   e.scan_id) != protocol.test_scans.end();
            }
            if (wanted) corpus.push_back(corpus_image(e.subject_id, e.scan_id, protocol.name));
        }
        reports.push_back(evaluate_descriptors(corpus, protocol, cfg.pipeline.matcher));
    }

    const std::string text = format_report_text(reports);
    fs::create_directories(report_dir);
    write_text_atomic(report_dir / "report.txt", text);
    write_text_atomic(report_dir / "report.json", format_report_json(reports));
    log << text;
    return 0;
}

}  // namespace rangeface
