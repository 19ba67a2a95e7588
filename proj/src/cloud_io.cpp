#include "rangeface/cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace rangeface {

namespace {

struct TagName {
    PoseTag tag;
    const char* name;
};

constexpr TagName kTagNames[] = {
    {PoseTag::Frontal, "frontal"},
    {PoseTag::TurnYRight, "turn-y-right"},
    {PoseTag::TurnYLeft, "turn-y-left"},
    {PoseTag::TurnZSevere, "turn-z-severe"},
    {PoseTag::TurnZSmall, "turn-z-small"},
    {PoseTag::Smile, "smile"},
    {PoseTag::OpenMouth, "open-mouth"},
    {PoseTag::LookUp, "look-up"},
    {PoseTag::LookDown, "look-down"},
    {PoseTag::FrontalIllum, "frontal-illum"},
};

bool parse_double(std::string_view tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(std::string_view tok, int& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void chomp_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

const char* to_string(PoseTag tag) {
    for (const auto& t : kTagNames)
        if (t.tag == tag) return t.name;
    throw std::logic_error("to_string: unknown pose tag");
}

PoseTag pose_tag_from_string(const std::string& s) {
    for (const auto& t : kTagNames)
        if (s == t.name) return t.tag;
    throw std::runtime_error("unknown pose tag '" + s + "'");
}

PoseTag default_pose_tag_for_scan(int scan_id) {
    switch (scan_id) {
        case 1: case 2: case 3: case 4: return PoseTag::Frontal;
        case 5: case 6: return PoseTag::TurnYRight;
        case 7: case 8: return PoseTag::TurnYLeft;
        case 9: return PoseTag::TurnZSevere;
        case 10: return PoseTag::TurnZSmall;
        case 11: return PoseTag::Smile;
        case 12: return PoseTag::OpenMouth;
        case 13: return PoseTag::LookUp;
        case 14: return PoseTag::LookDown;
        case 15: case 16: return PoseTag::FrontalIllum;
        default: throw std::invalid_argument("scan id outside 1..16");
    }
}

PointCloud load_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    PointCloud cloud;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp_cr(line);
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0].front() == '#') continue;
        double x, y, z;
        if (tokens.size() != 3 || !parse_double(tokens[0], x) ||
            !parse_double(tokens[1], y) || !parse_double(tokens[2], z)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed point line");
        }
        cloud.points.emplace_back(x, y, z);
    }
    if (in.bad()) throw std::runtime_error("read error on " + path.string());
    if (cloud.empty()) throw std::runtime_error(path.string() + ": no points");
    return cloud;
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    if (cloud.empty()) throw std::invalid_argument("save_xyz: empty cloud");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    char buf[64];
    std::string text;
    text.reserve(cloud.size() * 48);
    for (const Vec3& p : cloud.points) {
        for (int i = 0; i < 3; ++i) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p[i]);
            if (ec != std::errc()) throw std::runtime_error("save_xyz: format failure");
            text.append(buf, ptr);
            text.push_back(i == 2 ? '\n' : ' ');
        }
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write error on " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    DatasetManifest manifest;
    std::set<std::pair<std::string, int>> seen;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        chomp_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fail = [&](const std::string& what) -> void {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
        };
        auto fields = split_tabs(line);
        if (fields.size() != 4) fail("expected 4 tab-separated fields");
        ManifestEntry e;
        e.subject_id = fields[0];
        if (e.subject_id.empty()) fail("empty subject id");
        if (!parse_int(fields[1], e.scan_id) || e.scan_id < 1 || e.scan_id > 16)
            fail("scan id must be an integer in 1..16");
        try {
            e.pose_tag = pose_tag_from_string(fields[2]);
        } catch (const std::exception& ex) {
            fail(ex.what());
        }
        std::filesystem::path p(fields[3]);
        e.path = p.is_absolute() ? p : base / p;
        if (!seen.insert({e.subject_id, e.scan_id}).second)
            fail("duplicate (subject, scan) pair");
        if (!std::filesystem::exists(e.path)) fail("missing file " + e.path.string());
        manifest.entries.push_back(std::move(e));
    }
    if (in.bad()) throw std::runtime_error("read error on " + path.string());
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const ManifestEntry& e : manifest.entries) {
        out << e.subject_id << '\t' << e.scan_id << '\t' << to_string(e.pose_tag) << '\t'
            << e.path.generic_string() << '\n';
    }
    if (!out) throw std::runtime_error("write error on " + path.string());
}

}  // namespace rangeface
