#include "rangeface/suld.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "rangeface/gaussian.hpp"
#include "rangeface/integral.hpp"

namespace rangeface {

void DescriptorConfig::validate() const {
    if (haar_size < 2 || haar_size % 2 != 0)
        throw std::invalid_argument("descriptor: haar size must be even and >= 2");
    if (directions < 4) throw std::invalid_argument("descriptor: need >= 4 directions");
    if (!(radii[0] > 0.0 && radii[0] < radii[1] && radii[1] < radii[2]))
        throw std::invalid_argument("descriptor: radii must be positive and increasing");
    if (!(sigmas[0] > 0.0 && sigmas[0] < sigmas[1] && sigmas[1] < sigmas[2]))
        throw std::invalid_argument("descriptor: sigmas must be positive and increasing");
    if (!(epsilon_norm > 0.0))
        throw std::invalid_argument("descriptor: epsilon_norm must be positive");
}

ResponseMaps haar_response_maps(const Image& img, int haar_size) {
    if (haar_size < 2 || haar_size % 2 != 0)
        throw std::invalid_argument("haar size must be even and >= 2");
    if (haar_size > std::min(img.width, img.height) / 2)
        throw std::invalid_argument("haar size " + std::to_string(haar_size) +
                                    " too large for " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + " image");

    const IntegralImage ii = integral_image(img);
    const int half = haar_size / 2;

    ResponseMaps maps;
    maps.haar_size = haar_size;
    maps.gx = Image(img.width, img.height, 0.0);
    maps.gy = Image(img.width, img.height, 0.0);
    maps.abs_gx = Image(img.width, img.height, 0.0);
    maps.abs_gy = Image(img.width, img.height, 0.0);

    // window of pixel (x, y): columns [x-half, x+half-1], rows alike, so the
    // positive half of each mask begins at the pixel itself
    for (int y = half; y <= img.height - half; ++y) {
        for (int x = half; x <= img.width - half; ++x) {
            const double gx = rect_sum(ii, {x, y - half, x + half - 1, y + half - 1}) -
                              rect_sum(ii, {x - half, y - half, x - 1, y + half - 1});
            const double gy = rect_sum(ii, {x - half, y, x + half - 1, y + half - 1}) -
                              rect_sum(ii, {x - half, y - half, x + half - 1, y - 1});
            maps.gx.at(x, y) = gx;
            maps.gy.at(x, y) = gy;
            maps.abs_gx.at(x, y) = std::abs(gx);
            maps.abs_gy.at(x, y) = std::abs(gy);
        }
    }
    return maps;
}

ConvolvedStack gaussian_cascade(const ResponseMaps& maps,
                                const std::array<double, 3>& sigmas) {
    if (!(sigmas[0] > 0.0 && sigmas[0] < sigmas[1] && sigmas[1] < sigmas[2]))
        throw std::invalid_argument("cascade sigmas must be positive and increasing");

    ConvolvedStack stack;
    stack.sigmas = sigmas;
    stack.width = maps.gx.width;
    stack.height = maps.gx.height;

    ResponseMaps level = maps;
    for (int k = 0; k < 3; ++k) {
        const double step =
            k == 0 ? sigmas[0]
                   : std::sqrt(sigmas[static_cast<std::size_t>(k)] *
                                   sigmas[static_cast<std::size_t>(k)] -
                               sigmas[static_cast<std::size_t>(k - 1)] *
                                   sigmas[static_cast<std::size_t>(k - 1)]);
        level.gx = gaussian_smooth(level.gx, step);
        level.gy = gaussian_smooth(level.gy, step);
        level.abs_gx = gaussian_smooth(level.abs_gx, step);
        level.abs_gy = gaussian_smooth(level.abs_gy, step);
        stack.levels[static_cast<std::size_t>(k)] = level;
    }
    return stack;
}

std::array<double, 4> sample_vector(const ConvolvedStack& stack, int level,
                                    PixelCoord at, double epsilon_norm) {
    if (level < 0 || level > 2) throw std::out_of_range("stack level out of range");
    if (!(at.u >= 0.0 && at.v >= 0.0 && at.u <= stack.width - 1.0 &&
          at.v <= stack.height - 1.0))
        throw std::out_of_range("sample coordinate outside the image");

    const ResponseMaps& m = stack.levels[static_cast<std::size_t>(level)];
    std::array<double, 4> v{
        sample_bilinear(m.gx, at.u, at.v),
        sample_bilinear(m.gy, at.u, at.v),
        sample_bilinear(m.abs_gx, at.u, at.v),
        sample_bilinear(m.abs_gy, at.u, at.v),
    };
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
    if (norm < epsilon_norm) return {0.0, 0.0, 0.0, 0.0};
    for (double& c : v) c /= norm;
    return v;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::array<double, 3> effective_radii(const DescriptorConfig& cfg, double scale) {
    std::array<double, 3> r = cfg.radii;
    if (cfg.scale_proportional) {
        const double f = scale / 1.2;
        for (double& v : r) v *= f;
    }
    return r;
}

int effective_haar_size(const DescriptorConfig& cfg, double scale) {
    if (!cfg.scale_proportional) return cfg.haar_size;
    const double f = scale / 1.2;
    const int h = 2 * static_cast<int>(std::lround(cfg.haar_size * f / 2.0));
    return std::max(2, h);
}

}  // namespace

std::optional<SuldDescriptor> build_descriptor(const ConvolvedStack& stack,
                                               const SignificantPoint& point,
                                               const DescriptorConfig& cfg) {
    cfg.validate();
    const int n = cfg.directions;
    const std::array<double, 3> radii = effective_radii(cfg, point.scale);

    // reject up front so a partial descriptor never escapes
    const double u = point.location.u;
    const double v = point.location.v;
    const double rmax = radii[2];
    if (!(u - rmax >= 0.0 && v - rmax >= 0.0 && u + rmax <= stack.width - 1.0 &&
          v + rmax <= stack.height - 1.0))
        return std::nullopt;

    SuldDescriptor d;
    d.anchor = point.location;
    d.scale = point.scale;
    d.values.reserve(static_cast<std::size_t>(cfg.length()));

    auto append = [&](int level, PixelCoord at) {
        const std::array<double, 4> s = sample_vector(stack, level, at, cfg.epsilon_norm);
        d.values.insert(d.values.end(), s.begin(), s.end());
    };

    append(0, {u, v});  // center shares the innermost smoothing level
    for (int ring = 0; ring < 3; ++ring) {
        const double r = radii[static_cast<std::size_t>(ring)];
        for (int j = 0; j < n; ++j) {
            const double theta = kTwoPi * j / n;
            append(ring, {u + r * std::cos(theta), v + r * std::sin(theta)});
        }
    }
    return d;
}

DescribeResult describe_all(const Image& img, const std::vector<SignificantPoint>& points,
                            const DescriptorConfig& cfg) {
    cfg.validate();
    DescribeResult result;
    if (points.empty()) return result;

    // stacks keyed by effective Haar size; the default mode only ever builds
    // one
    std::map<int, ConvolvedStack> stacks;
    auto stack_for = [&](int h) -> const ConvolvedStack& {
        auto it = stacks.find(h);
        if (it == stacks.end())
            it = stacks.emplace(h, gaussian_cascade(haar_response_maps(img, h), cfg.sigmas))
                     .first;
        return it->second;
    };

    for (const SignificantPoint& p : points) {
        std::optional<SuldDescriptor> d =
            build_descriptor(stack_for(effective_haar_size(cfg, p.scale)), p, cfg);
        if (d)
            result.descriptors.push_back(std::move(*d));
        else
            ++result.skipped;
    }
    return result;
}

namespace {

constexpr char kMagic[4] = {'S', 'U', 'L', 'D'};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    const unsigned char* cur;
    const unsigned char* end;
    const std::filesystem::path& path;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - cur) < n)
            throw std::runtime_error(path.string() + ": truncated descriptor file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(cur[i]) << (8 * i);
        cur += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(cur[i]) << (8 * i);
        cur += 8;
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
    float f32() {
        const std::uint32_t v = u32();
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
};

}  // namespace

void save_descriptors(const std::vector<SuldDescriptor>& descriptors,
                      const DescriptorConfig& cfg, const std::filesystem::path& path) {
    cfg.validate();
    const std::size_t len = static_cast<std::size_t>(cfg.length());
    for (const SuldDescriptor& d : descriptors)
        if (d.values.size() != len)
            throw std::invalid_argument("descriptor length does not match the config");

    std::string out;
    out.reserve(64 + descriptors.size() * (24 + 4 * len));
    out.append(kMagic, 4);
    put_u32(out, 1);  // version
    put_u32(out, static_cast<std::uint32_t>(cfg.directions));
    for (double r : cfg.radii) put_f64(out, r);
    for (double s : cfg.sigmas) put_f64(out, s);
    put_u32(out, static_cast<std::uint32_t>(cfg.haar_size));
    put_u32(out, static_cast<std::uint32_t>(descriptors.size()));
    for (const SuldDescriptor& d : descriptors) {
        put_f64(out, d.anchor.u);
        put_f64(out, d.anchor.v);
        put_f64(out, d.scale);
        for (double v : d.values) put_f32(out, static_cast<float>(v));
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write error on " + path.string());
}

DescriptorFile load_descriptors(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{reinterpret_cast<const unsigned char*>(raw.data()),
             reinterpret_cast<const unsigned char*>(raw.data()) + raw.size(), path};
    r.need(4);
    if (std::memcmp(r.cur, kMagic, 4) != 0)
        throw std::runtime_error(path.string() + ": not a descriptor file");
    r.cur += 4;

    DescriptorFile file;
    file.header.version = r.u32();
    if (file.header.version != 1)
        throw std::runtime_error(path.string() + ": unsupported descriptor file version " +
                                 std::to_string(file.header.version));
    file.header.directions = r.u32();
    for (double& v : file.header.radii) v = r.f64();
    for (double& v : file.header.sigmas) v = r.f64();
    file.header.haar_size = r.u32();
    const std::uint32_t count = r.u32();
    if (file.header.directions < 4)
        throw std::runtime_error(path.string() + ": corrupt header");

    const std::size_t len = 4 * (1 + 3 * static_cast<std::size_t>(file.header.directions));
    file.descriptors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        SuldDescriptor d;
        d.anchor.u = r.f64();
        d.anchor.v = r.f64();
        d.scale = r.f64();
        d.values.resize(len);
        for (double& v : d.values) v = r.f32();
        file.descriptors.push_back(std::move(d));
    }
    if (r.cur != r.end)
        throw std::runtime_error(path.string() + ": trailing bytes after last record");
    return file;
}

}  // namespace rangeface
