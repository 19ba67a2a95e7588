#include "rangeface/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rangeface {

namespace {

void check_filter_size(int L) {
    if (L < 9 || L % 2 == 0 || L % 6 != 3)
        throw std::invalid_argument("filter size " + std::to_string(L) +
                                    " must be odd, >= 9 and 9 mod 6");
}

struct Candidate {
    int x, y, octave, level;
    double value;
};

/// Quadratic peak fit over (x, y, level) by central differences. Returns
/// false when the local Hessian is singular.
bool quad_fit(const Image& m0, const Image& m1, const Image& m2, int x, int y,
              Eigen::Vector3d& offset, double& peak_value) {
    const double v = m1.at(x, y);
    Eigen::Vector3d g;
    g[0] = (m1.at(x + 1, y) - m1.at(x - 1, y)) / 2.0;
    g[1] = (m1.at(x, y + 1) - m1.at(x, y - 1)) / 2.0;
    g[2] = (m2.at(x, y) - m0.at(x, y)) / 2.0;

    Eigen::Matrix3d h;
    h(0, 0) = m1.at(x + 1, y) - 2.0 * v + m1.at(x - 1, y);
    h(1, 1) = m1.at(x, y + 1) - 2.0 * v + m1.at(x, y - 1);
    h(2, 2) = m2.at(x, y) - 2.0 * v + m0.at(x, y);
    h(0, 1) = h(1, 0) = (m1.at(x + 1, y + 1) - m1.at(x - 1, y + 1) - m1.at(x + 1, y - 1) +
                         m1.at(x - 1, y - 1)) /
                        4.0;
    h(0, 2) = h(2, 0) =
        (m2.at(x + 1, y) - m2.at(x - 1, y) - m0.at(x + 1, y) + m0.at(x - 1, y)) / 4.0;
    h(1, 2) = h(2, 1) =
        (m2.at(x, y + 1) - m2.at(x, y - 1) - m0.at(x, y + 1) + m0.at(x, y - 1)) / 4.0;

    Eigen::FullPivLU<Eigen::Matrix3d> lu(h);
    if (!lu.isInvertible()) return false;
    offset = lu.solve(-g);
    peak_value = v + 0.5 * g.dot(offset);
    return true;
}

}  // namespace

void DetectorConfig::validate() const {
    if (hessian_weight <= 0.0)
        throw std::invalid_argument("detector: hessian weight must be positive");
    if (octaves < 1) throw std::invalid_argument("detector: octaves must be >= 1");
    if (levels_per_octave < 3)
        throw std::invalid_argument("detector: need at least 3 levels per octave");
    if (target_points < 1)
        throw std::invalid_argument("detector: target_points must be >= 1");
    if (response_threshold && *response_threshold < 0.0)
        throw std::invalid_argument("detector: response threshold must be >= 0");
    check_filter_size(base_filter_size);
}

int filter_step_for(const DetectorConfig& cfg, int octave) {
    (void)cfg;
    return 6 << octave;
}

int filter_size_for(const DetectorConfig& cfg, int octave, int level) {
    int size = cfg.base_filter_size;
    int step = 6;
    for (int o = 0; o < octave; ++o) {
        size += step;
        step *= 2;
    }
    return size + step * level;
}

HessianComponents hessian_components(const IntegralImage& ii, int L) {
    check_filter_size(L);
    if (L > ii.width || L > ii.height)
        throw std::invalid_argument("filter size " + std::to_string(L) +
                                    " exceeds image support");
    const int lobe = L / 3;
    const int b = (L - 1) / 2;
    const int half_lobe = lobe / 2;
    const double inv_area = 1.0 / (static_cast<double>(L) * L);

    HessianComponents out;
    out.filter_size = L;
    out.dxx = Image(ii.width, ii.height, 0.0);
    out.dyy = Image(ii.width, ii.height, 0.0);
    out.dxy = Image(ii.width, ii.height, 0.0);

    for (int y = b; y <= ii.height - 1 - b; ++y) {
        for (int x = b; x <= ii.width - 1 - b; ++x) {
            // second derivative along x: full band minus 3x its middle third
            double dxx = rect_sum(ii, {x - b, y - (lobe - 1), x + b, y + lobe - 1}) -
                         3.0 * rect_sum(ii, {x - half_lobe, y - (lobe - 1), x + half_lobe,
                                             y + lobe - 1});
            double dyy = rect_sum(ii, {x - (lobe - 1), y - b, x + lobe - 1, y + b}) -
                         3.0 * rect_sum(ii, {x - (lobe - 1), y - half_lobe, x + lobe - 1,
                                             y + half_lobe});
            // quadrant boxes, one pixel off the axes
            double dxy = rect_sum(ii, {x + 1, y - lobe, x + lobe, y - 1}) +
                         rect_sum(ii, {x - lobe, y + 1, x - 1, y + lobe}) -
                         rect_sum(ii, {x - lobe, y - lobe, x - 1, y - 1}) -
                         rect_sum(ii, {x + 1, y + 1, x + lobe, y + lobe});
            out.dxx.at(x, y) = dxx * inv_area;
            out.dyy.at(x, y) = dyy * inv_area;
            out.dxy.at(x, y) = dxy * inv_area;
        }
    }
    return out;
}

ResponseMap hessian_response_map(const IntegralImage& ii, int filter_size, double weight) {
    if (weight <= 0.0) throw std::invalid_argument("hessian weight must be positive");
    const HessianComponents c = hessian_components(ii, filter_size);
    ResponseMap map;
    map.filter_size = filter_size;
    map.scale = 1.2 * filter_size / 9.0;
    map.values = Image(ii.width, ii.height, 0.0);
    const int b = (filter_size - 1) / 2;
    for (int y = b; y <= ii.height - 1 - b; ++y) {
        for (int x = b; x <= ii.width - 1 - b; ++x) {
            const double dxy = weight * c.dxy.at(x, y);
            map.values.at(x, y) = c.dxx.at(x, y) * c.dyy.at(x, y) - dxy * dxy;
        }
    }
    return map;
}

ScaleSpace build_scale_space(const IntegralImage& ii, const DetectorConfig& cfg) {
    cfg.validate();
    const int support = std::min(ii.width, ii.height);
    for (int o = 0; o < cfg.octaves; ++o)
        for (int k = 0; k < cfg.levels_per_octave; ++k) {
            const int L = filter_size_for(cfg, o, k);
            if (L > support)
                throw std::invalid_argument("image too small for filter size " +
                                            std::to_string(L));
        }

    ScaleSpace ss;
    ss.octaves = cfg.octaves;
    ss.levels = cfg.levels_per_octave;
    ss.maps.reserve(static_cast<std::size_t>(cfg.octaves) * cfg.levels_per_octave);
    for (int o = 0; o < cfg.octaves; ++o)
        for (int k = 0; k < cfg.levels_per_octave; ++k)
            ss.maps.push_back(
                hessian_response_map(ii, filter_size_for(cfg, o, k), cfg.hessian_weight));
    return ss;
}

std::vector<SignificantPoint> detect_significant_points(const IntegralImage& ii,
                                                        const DetectorConfig& cfg) {
    const ScaleSpace ss = build_scale_space(ii, cfg);
    const bool auto_mode = !cfg.response_threshold.has_value();
    const double threshold = cfg.response_threshold.value_or(0.0);

    std::vector<Candidate> candidates;
    for (int o = 0; o < cfg.octaves; ++o) {
        for (int k = 1; k + 1 < cfg.levels_per_octave; ++k) {
            const Image& m0 = ss.at(o, k - 1).values;
            const Image& m1 = ss.at(o, k).values;
            const Image& m2 = ss.at(o, k + 1).values;
            // stay one pixel inside the support of the widest filter of the
            // trio so every neighbour (and the later quadratic fit) reads
            // computed responses, not padding
            const int margin = ss.at(o, k + 1).border_margin() + 1;
            for (int y = margin; y < ii.height - margin; ++y) {
                for (int x = margin; x < ii.width - margin; ++x) {
                    const double v = m1.at(x, y);
                    if (v < threshold) continue;
                    if (auto_mode && v <= 0.0) continue;
                    bool is_max = true;
                    for (int dy = -1; dy <= 1 && is_max; ++dy)
                        for (int dx = -1; dx <= 1 && is_max; ++dx) {
                            if (v <= m0.at(x + dx, y + dy)) is_max = false;
                            if (v <= m2.at(x + dx, y + dy)) is_max = false;
                            if ((dx != 0 || dy != 0) && v <= m1.at(x + dx, y + dy))
                                is_max = false;
                        }
                    if (is_max) candidates.push_back({x, y, o, k, v});
                }
            }
        }
    }

    std::vector<SignificantPoint> points;
    points.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        int x = c.x, y = c.y;
        const int k = c.level;
        const Image& m0 = ss.at(c.octave, k - 1).values;
        const Image& m1 = ss.at(c.octave, k).values;
        const Image& m2 = ss.at(c.octave, k + 1).values;
        const int margin = ss.at(c.octave, k + 1).border_margin() + 1;

        Eigen::Vector3d offset;
        double peak = 0.0;
        bool ok = false;
        for (int attempt = 0; attempt < 2; ++attempt) {
            if (!quad_fit(m0, m1, m2, x, y, offset, peak)) break;
            if (std::abs(offset[0]) <= 0.5 && std::abs(offset[1]) <= 0.5 &&
                std::abs(offset[2]) <= 0.5) {
                ok = true;
                break;
            }
            if (attempt == 1) break;  // re-centred once already; give up
            // level re-centring would cross octave layers; only x, y move
            if (std::abs(offset[2]) > 0.5) break;
            x += offset[0] > 0.5 ? 1 : (offset[0] < -0.5 ? -1 : 0);
            y += offset[1] > 0.5 ? 1 : (offset[1] < -0.5 ? -1 : 0);
            if (x < margin || y < margin || x >= ii.width - margin || y >= ii.height - margin)
                break;
        }
        if (!ok) continue;
        if (peak < threshold) continue;

        SignificantPoint p;
        p.location.u = x + offset[0];
        p.location.v = y + offset[1];
        const double size = filter_size_for(cfg, c.octave, k) +
                            offset[2] * filter_step_for(cfg, c.octave);
        p.scale = 1.2 * size / 9.0;
        p.response = peak;
        points.push_back(p);
    }

    std::stable_sort(points.begin(), points.end(),
                     [](const SignificantPoint& a, const SignificantPoint& b) {
                         return a.response > b.response;
                     });

    if (auto_mode) {
        // keep the strongest responses; the relative floor sheds numerical
        // dust that would otherwise count as structure
        if (!points.empty()) {
            const double floor = points.front().response * 1e-8;
            std::size_t n = points.size();
            while (n > 0 && points[n - 1].response < floor) --n;
            points.resize(n);
        }
        if (points.size() > static_cast<std::size_t>(cfg.target_points))
            points.resize(static_cast<std::size_t>(cfg.target_points));
    }
    return points;
}

void save_points(const std::vector<SignificantPoint>& points,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    char buf[64];
    std::string text;
    for (const SignificantPoint& p : points) {
        const double fields[4] = {p.location.u, p.location.v, p.scale, p.response};
        for (int i = 0; i < 4; ++i) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, fields[i]);
            if (ec != std::errc()) throw std::runtime_error("save_points: format failure");
            text.append(buf, ptr);
            text.push_back(i == 3 ? '\n' : ' ');
        }
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write error on " + path.string());
}

std::vector<SignificantPoint> load_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<SignificantPoint> points;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        SignificantPoint p;
        double fields[4];
        const char* cur = line.data();
        const char* end = line.data() + line.size();
        bool good = true;
        for (int i = 0; i < 4 && good; ++i) {
            while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
            auto [ptr, ec] = std::from_chars(cur, end, fields[i]);
            good = ec == std::errc();
            cur = ptr;
        }
        while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
        if (!good || cur != end)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed point line");
        p.location.u = fields[0];
        p.location.v = fields[1];
        p.scale = fields[2];
        p.response = fields[3];
        points.push_back(p);
    }
    return points;
}

}  // namespace rangeface
