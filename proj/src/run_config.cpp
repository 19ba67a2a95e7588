#include "rangeface/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace rangeface {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw std::invalid_argument("config key '" + key + "': cannot read '" + value +
                                "' as " + expected);
}

double parse_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
    return v;
}

long parse_int(const std::string& key, const std::string& value) {
    long v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || ptr != end) bad_value(key, value, "an unsigned integer");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    bad_value(key, value, "a boolean");
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    PreprocessConfig& pre = pipeline.preprocess;
    DetectorConfig& det = pipeline.detector;
    DescriptorConfig& desc = pipeline.descriptor;
    MatcherConfig& mat = pipeline.matcher;

    if (key == "grid.width") pre.grid_width = static_cast<int>(parse_int(key, value));
    else if (key == "grid.height") pre.grid_height = static_cast<int>(parse_int(key, value));
    else if (key == "grid.margin") pre.grid_margin = parse_double(key, value);
    else if (key == "crop.a") pre.crop_a_frac = parse_double(key, value);
    else if (key == "crop.b") pre.crop_b_frac = parse_double(key, value);
    else if (key == "icp.max_iterations")
        pre.icp.max_iterations = static_cast<int>(parse_int(key, value));
    else if (key == "icp.eps") {
        if (value == "auto") pre.icp.convergence_eps.reset();
        else pre.icp.convergence_eps = parse_double(key, value);
    } else if (key == "icp.max_dist") {
        if (value == "none") pre.icp.max_correspondence_dist.reset();
        else pre.icp.max_correspondence_dist = parse_double(key, value);
    } else if (key == "detector.w") det.hessian_weight = parse_double(key, value);
    else if (key == "detector.octaves") det.octaves = static_cast<int>(parse_int(key, value));
    else if (key == "detector.levels")
        det.levels_per_octave = static_cast<int>(parse_int(key, value));
    else if (key == "detector.base_size")
        det.base_filter_size = static_cast<int>(parse_int(key, value));
    else if (key == "detector.threshold") {
        if (value == "auto") det.response_threshold.reset();
        else det.response_threshold = parse_double(key, value);
    } else if (key == "detector.target_points")
        det.target_points = static_cast<int>(parse_int(key, value));
    else if (key == "descriptor.h") desc.haar_size = static_cast<int>(parse_int(key, value));
    else if (key == "descriptor.n") desc.directions = static_cast<int>(parse_int(key, value));
    else if (key == "descriptor.r1") desc.radii[0] = parse_double(key, value);
    else if (key == "descriptor.r2") desc.radii[1] = parse_double(key, value);
    else if (key == "descriptor.r3") desc.radii[2] = parse_double(key, value);
    else if (key == "descriptor.s1") desc.sigmas[0] = parse_double(key, value);
    else if (key == "descriptor.s2") desc.sigmas[1] = parse_double(key, value);
    else if (key == "descriptor.s3") desc.sigmas[2] = parse_double(key, value);
    else if (key == "descriptor.epsilon") desc.epsilon_norm = parse_double(key, value);
    else if (key == "descriptor.scale_proportional")
        desc.scale_proportional = parse_bool(key, value);
    else if (key == "matcher.ratio") mat.ratio_threshold = parse_double(key, value);
    else if (key == "matcher.mutual") mat.mutual_consistency = parse_bool(key, value);
    else if (key == "run.seed") seed = parse_u64(key, value);
    else if (key == "run.jobs") jobs = static_cast<int>(parse_int(key, value));
    else if (key == "run.verbose") verbose = parse_bool(key, value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw std::runtime_error(where + ": expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::runtime_error(where + ": expected 'key = value'");
        try {
            set(key, value);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
}

void RunConfig::validate() const {
    pipeline.preprocess.validate();
    pipeline.detector.validate();
    pipeline.descriptor.validate();
    pipeline.matcher.validate();
    if (pipeline.preprocess.icp.max_iterations < 1)
        throw std::invalid_argument("icp.max_iterations must be >= 1");
    if (jobs < 1) throw std::invalid_argument("run.jobs must be >= 1");
}

std::vector<std::string> RunConfig::known_keys() {
    return {
        "grid.width",       "grid.height",
        "grid.margin",      "crop.a",
        "crop.b",           "icp.max_iterations",
        "icp.eps",          "icp.max_dist",
        "detector.w",       "detector.octaves",
        "detector.levels",  "detector.base_size",
        "detector.threshold", "detector.target_points",
        "descriptor.h",     "descriptor.n",
        "descriptor.r1",    "descriptor.r2",
        "descriptor.r3",    "descriptor.s1",
        "descriptor.s2",    "descriptor.s3",
        "descriptor.epsilon", "descriptor.scale_proportional",
        "matcher.ratio",    "matcher.mutual",
        "run.seed",         "run.jobs",
        "run.verbose",
    };
}

}  // namespace rangeface
